//! Sudden switch-on of the rotation: prepare a state of the undriven
//! model, then evolve it in the co-rotating frame with one of the engines.

use num_complex::Complex64;

use super::config::{Engine, EngineConfig, InitialState};
use crate::error::{DickeError, Result};
use crate::geomphase::{evolve_phase_resolved, ground_start, PhaseResolvedBasis, PHASE_RESOLVED_CAP};
use crate::meanfield::{self, linear_solution, quench_initial_state, ClassicalState, CoherentParams, Phase};
use crate::model::{build_dicke_hamiltonian, build_parity, build_rotated_hamiltonian, ModelParams};
use crate::propagator::{coherent_state, evolve_and_sample, QuantumState, SampleOptions};
use crate::series::TimeSeries;
use crate::spectra::{extremal_eigenvalues, ground_state};

/// Coherent states losing more than this weight to the Fock cutoff are
/// rejected.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

/// Sampling of a quench run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_final: f64,
    pub sample_dt: f64,
}

impl Schedule {
    /// `periods` drive periods sampled `samples_per_period` times each.
    pub fn in_periods(p: &ModelParams, periods: f64, samples_per_period: u32) -> Self {
        let tp = p.drive_period();
        Schedule { t_final: periods * tp, sample_dt: tp / samples_per_period.max(1) as f64 }
    }
}

/// Classical start for the mean-field engines.
pub fn classical_start(p: &ModelParams, engine: &EngineConfig) -> Result<ClassicalState> {
    match engine.initial_state() {
        InitialState::Meanfield => Ok(quench_initial_state(p, !engine.lower_branch)?.state),
        InitialState::Exact => Err(DickeError::InvalidParameter(
            "the exact ground state is only available to the quantum engines".into(),
        )),
        other => Ok(other.classical().expect("explicit classical start")),
    }
}

/// Fock-basis start for the quantum engines.
pub fn quantum_start(p: &ModelParams, engine: &EngineConfig) -> Result<QuantumState> {
    let coherent = match engine.initial_state() {
        InitialState::Exact => {
            let gs = ground_state(&build_dicke_hamiltonian(p)?, Some(&build_parity(p)?))?;
            return Ok(QuantumState::from_real(&gs.state));
        }
        InitialState::Meanfield => quench_initial_state(p, !engine.lower_branch)?.coherent,
        other => CoherentParams::from_classical(&other.classical().expect("explicit classical start"), p.j())?,
    };
    let (psi, lost) = coherent_state(p, coherent.alpha, coherent.zeta)?;
    if lost > TRUNCATION_LIMIT {
        return Err(DickeError::InvalidParameter(format!(
            "coherent start loses weight {lost:e} to the Fock cutoff n_max = {}",
            p.n_max
        )));
    }
    Ok(psi)
}

/// Runs the quench and returns a series with at least `t`, `n_ph` and
/// `n_at`; the remaining columns depend on the engine.
pub fn run_quench(p: &ModelParams, engine: &EngineConfig, schedule: Schedule) -> Result<TimeSeries> {
    p.validate()?;
    match engine.kind {
        Engine::Quantum => {
            if p.dimension() > engine.dimension_cap {
                return Err(DickeError::DimensionOverflow { dimension: p.dimension(), cap: engine.dimension_cap });
            }
            let psi = quantum_start(p, engine)?;
            let h_rot = build_rotated_hamiltonian(p)?;
            let bounds = extremal_eigenvalues(&h_rot, 1e-10)?;
            let mut opts = SampleOptions::for_model(p, schedule.t_final);
            opts.sample_dt = schedule.sample_dt;
            opts.dt = p.drive_period() / engine.steps_per_period as f64;
            opts.tol = engine.chebyshev_tol;
            Ok(evolve_and_sample(&psi, &h_rot, p, bounds, &opts)?.series)
        }
        Engine::Meanfield => {
            let s0 = classical_start(p, engine)?;
            meanfield::integrate(&s0, p, schedule.t_final, schedule.sample_dt, engine.tolerances())
        }
        Engine::Linear => linear_run(p, &classical_start(p, engine)?, schedule),
        Engine::Geomphase => {
            let cap = engine.dimension_cap.min(PHASE_RESOLVED_CAP);
            let basis = PhaseResolvedBasis::with_cap(p, cap)?;
            let chi0 = match engine.initial_state() {
                InitialState::Exact => ground_start(&basis),
                _ => basis.project(&quantum_start(p, engine)?.amplitudes)?,
            };
            let run = evolve_phase_resolved(
                &chi0,
                &basis,
                schedule.t_final,
                schedule.sample_dt,
                engine.zero_geometric,
                engine.tolerances(),
            )?;
            Ok(run.series)
        }
    }
}

fn linear_run(p: &ModelParams, s0: &ClassicalState, schedule: Schedule) -> Result<TimeSeries> {
    let phase = Phase::of(p);
    let mut out = TimeSeries::new(&["t", "Q", "P", "q", "p", "n_ph", "n_at"]);
    let n = ((schedule.t_final / schedule.sample_dt) - 1e-9).ceil().max(0.0) as usize;
    let at_rest_at_origin = *s0 == ClassicalState::ORIGIN && phase == Phase::Normal;
    let solution = if at_rest_at_origin { None } else { Some(linear_solution(s0, p, phase)?) };
    for i in 0..=n {
        let t = if n == 0 { 0.0 } else { schedule.t_final * i as f64 / n as f64 };
        let s = solution.as_ref().map_or(ClassicalState::ORIGIN, |sol| sol.at(t));
        out.push(&[t, s.spin_q, s.spin_p, s.field_q, s.field_p, s.photon_density(), s.atomic_inversion()]);
    }
    Ok(out)
}

/// Lab-frame spin components of a mean-field trajectory, J_x/j and J_y/j,
/// appended as columns `Jx`, `Jy`.
pub fn with_lab_frame_spin(series: &TimeSeries, p: &ModelParams) -> Result<TimeSeries> {
    let cols: Vec<&[f64]> = ["t", "Q", "P", "q", "p"].iter().map(|c| series.column(c)).collect::<Result<_>>()?;
    let mut names: Vec<String> = series.names().to_vec();
    names.extend(["Jx".to_string(), "Jy".to_string()]);
    let mut out = TimeSeries::new(&names);
    for i in 0..series.len() {
        let s = ClassicalState::new(cols[1][i], cols[2][i], cols[3][i], cols[4][i]);
        let lab = meanfield::lab_frame(&s, p.delta_phi * cols[0][i]);
        // J₊/j = (Q − iP)·√(4 − Q² − P²)/2 in the coherent-state map.
        let root = (4.0 - lab.spin_radius2()).max(0.0).sqrt();
        let jp = Complex64::new(lab.spin_q, -lab.spin_p) * (0.5 * root);
        let mut row = series.row(i);
        row.extend([jp.re, jp.im]);
        out.push(&row);
    }
    out.truncated = series.truncated;
    Ok(out)
}
