//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a flat `Float64Array` of fixed-width records so the
//! page can plot without parsing. The plain functions below the bindings
//! carry the logic and are what the native tests exercise.

use wasm_bindgen::prelude::*;

use dicke::experiments::config::{Engine, EngineConfig, InitialState};
use dicke::experiments::quench::{run_quench, Schedule};
use dicke::experiments::scan::evaluate_point;
use dicke::mexhat::{self, MexHatParams};
use dicke::ModelParams;

/// Spin length and Fock cutoff are irrelevant to the mean-field engine
/// but must form a valid model.
const CLASSICAL_TWO_J: u32 = 20;
const CLASSICAL_N_MAX: u32 = 60;

fn model(lambda: f64, delta_phi: f64) -> Result<ModelParams, String> {
    ModelParams::resonant(lambda, delta_phi, CLASSICAL_TWO_J, CLASSICAL_N_MAX).map_err(|e| e.to_string())
}

fn meanfield_engine(preset: bool) -> EngineConfig {
    let mut e = EngineConfig::of(Engine::Meanfield);
    if preset {
        e.initial = Some(InitialState::Preset);
    }
    e
}

/// Records `(t, n_ph, n_at)` of a mean-field quench.
pub fn trajectory(lambda: f64, delta_phi: f64, periods: f64, preset: bool) -> Result<Vec<f64>, String> {
    if !(periods > 0.0 && periods <= 500.0) {
        return Err(format!("periods must lie in (0, 500], got {periods}"));
    }
    let p = model(lambda, delta_phi)?;
    let series = run_quench(&p, &meanfield_engine(preset), Schedule::in_periods(&p, periods, 50)).map_err(|e| e.to_string())?;
    let cols: Vec<&[f64]> = ["t", "n_ph", "n_at"].iter().map(|c| series.column(c).unwrap()).collect();
    Ok((0..series.len()).flat_map(|i| [cols[0][i], cols[1][i], cols[2][i]]).collect())
}

/// Records `(λ, n̄_ph, n̄_at)` over `count` couplings. Failed points give NaN.
pub fn darkness_scan(
    lambda_start: f64,
    lambda_stop: f64,
    count: usize,
    delta_phi: f64,
    periods: f64,
    preset: bool,
) -> Result<Vec<f64>, String> {
    if !(2..=400).contains(&count) {
        return Err(format!("count must lie in [2, 400], got {count}"));
    }
    let engine = meanfield_engine(preset);
    let mut out = Vec::with_capacity(3 * count);
    for i in 0..count {
        let lambda = lambda_start + (lambda_stop - lambda_start) * i as f64 / (count - 1) as f64;
        let v = model(lambda, delta_phi).and_then(|p| evaluate_point(&p, &engine, periods, 50).map_err(|e| e.to_string()));
        match v {
            Ok(v) => out.extend([lambda, v.avg_n_ph, v.avg_n_at]),
            Err(_) => out.extend([lambda, f64::NAN, f64::NAN]),
        }
    }
    Ok(out)
}

/// Records `(ε, ⟨ρ²⟩, T_half)` for `count` depths in (0, k²/4g].
pub fn mexhat_curve(mass: f64, quadratic: f64, quartic: f64, count: usize) -> Result<Vec<f64>, String> {
    let base = MexHatParams::new(mass, quadratic, quartic, 0.0).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * count);
    for eps in mexhat::default_depth_grid(&base, count) {
        let p = base.with_depth(eps).map_err(|e| e.to_string())?;
        out.extend([eps, mexhat::average_rho_squared(&p), mexhat::half_period(&p)]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = trajectory)]
pub fn trajectory_js(lambda: f64, delta_phi: f64, periods: f64, preset: bool) -> Result<Vec<f64>, JsError> {
    trajectory(lambda, delta_phi, periods, preset).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = darknessScan)]
pub fn darkness_scan_js(
    lambda_start: f64,
    lambda_stop: f64,
    count: usize,
    delta_phi: f64,
    periods: f64,
    preset: bool,
) -> Result<Vec<f64>, JsError> {
    darkness_scan(lambda_start, lambda_stop, count, delta_phi, periods, preset).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mexhatCurve)]
pub fn mexhat_curve_js(mass: f64, quadratic: f64, quartic: f64, count: usize) -> Result<Vec<f64>, JsError> {
    mexhat_curve(mass, quadratic, quartic, count).map_err(|e| JsError::new(&e))
}
