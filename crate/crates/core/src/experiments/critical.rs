//! Location of the darkness minimum as a function of the drive velocity
//! and its power-law fit λ_min(δφ) = λ_c⁰ + c·δφ^β.

use serde::Serialize;

use super::config::{Engine, EngineConfig};
use super::scan::{evaluate_points, local_minima, parabolic_vertex};
use crate::error::{DickeError, Result};
use crate::model::ModelParams;
use crate::series::TimeSeries;

pub const CRITICAL_COLUMNS: [&str; 7] =
    ["delta_phi", "lambda_c", "lambda_min", "avg_n_ph_min", "lambda_fit", "lambda_estimate", "flagged"];

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLineSpec {
    pub base: ModelParams,
    pub engine: EngineConfig,
    pub delta_phi: Vec<f64>,
    /// λ runs over (λ_c(δφ), λ_c(δφ) + lambda_span] with this spacing.
    pub lambda_step: f64,
    pub lambda_span: f64,
    pub periods: f64,
    pub samples_per_period: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub delta_phi: f64,
    /// Static critical coupling of the driven model, √(ωΩ)/2.
    pub lambda_c: f64,
    /// Refined location of the deepest interior minimum of n̄_ph.
    pub lambda_min: Option<f64>,
    pub avg_n_ph_min: Option<f64>,
    /// Estimate √(ω(ω₀ + 2δφ))/2.
    pub lambda_estimate: f64,
    /// Set when no interior minimum was found or a grid point failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalLineFit {
    pub points: Vec<CriticalPoint>,
    pub lambda_c0: f64,
    pub coefficient: f64,
    pub exponent: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
    pub lambda_step: f64,
}

impl CriticalLineFit {
    pub fn predict(&self, delta_phi: f64) -> f64 {
        self.lambda_c0 + self.coefficient * delta_phi.powf(self.exponent)
    }

    /// Whether the fitted curve passes within one grid step of every
    /// located minimum.
    pub fn within_resolution(&self) -> bool {
        self.max_residual <= self.lambda_step
    }

    pub fn table(&self) -> TimeSeries {
        let mut t = TimeSeries::new(&CRITICAL_COLUMNS);
        for p in &self.points {
            t.push(&[
                p.delta_phi,
                p.lambda_c,
                p.lambda_min.unwrap_or(f64::NAN),
                p.avg_n_ph_min.unwrap_or(f64::NAN),
                self.predict(p.delta_phi),
                p.lambda_estimate,
                if p.flagged { 1.0 } else { 0.0 },
            ]);
        }
        t
    }
}

/// Deepest strict interior minimum, refined by a parabola through the
/// neighbouring samples. Minima at the grid edges do not count: at the
/// lower edge n̄_ph vanishes trivially as the start approaches the vacuum.
pub fn refine_minimum(lambdas: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let best = local_minima(values).into_iter().min_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    Some(parabolic_vertex(lambdas, values, best))
}

pub fn critical_line(spec: &CriticalLineSpec) -> Result<CriticalLineFit> {
    if spec.engine.kind != Engine::Meanfield {
        return Err(DickeError::InvalidParameter("the critical line is extracted with the mean-field engine".into()));
    }
    if !(spec.lambda_step > 0.0) || !(spec.lambda_span >= 3.0 * spec.lambda_step) {
        return Err(DickeError::InvalidParameter("need lambda_step > 0 and a span of at least three steps".into()));
    }
    if spec.delta_phi.iter().any(|&d| !(d > 0.0)) {
        return Err(DickeError::InvalidParameter("drive velocities must be positive".into()));
    }
    let per_line = (spec.lambda_span / spec.lambda_step + 1e-9).floor() as usize;
    let mut params = Vec::with_capacity(per_line * spec.delta_phi.len());
    for &d in &spec.delta_phi {
        let p = spec.base.with_delta_phi(d);
        let lc = p.lambda_c();
        params.extend((1..=per_line).map(|i| p.with_lambda(lc + spec.lambda_step * i as f64)));
    }
    let results = evaluate_points(&params, &spec.engine, spec.periods, spec.samples_per_period);

    let mut points = Vec::new();
    for (row, &d) in spec.delta_phi.iter().enumerate() {
        let p = spec.base.with_delta_phi(d);
        let slice = row * per_line..(row + 1) * per_line;
        let lambdas: Vec<f64> = params[slice.clone()].iter().map(|q| q.lambda).collect();
        let values: Vec<f64> =
            results[slice].iter().map(|r| r.as_ref().map_or(f64::NAN, |v| v.avg_n_ph)).collect();
        let failed = values.iter().any(|v| v.is_nan());
        let refined = refine_minimum(&lambdas, &values);
        points.push(CriticalPoint {
            delta_phi: d,
            lambda_c: p.lambda_c(),
            lambda_min: refined.map(|r| r.0),
            avg_n_ph_min: refined.map(|r| r.1),
            lambda_estimate: 0.5 * (p.omega * (p.omega0 + 2.0 * d)).sqrt(),
            flagged: failed || refined.is_none(),
        });
    }

    let lambda_c0 = spec.base.lambda_c0();
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.flagged)
        .filter_map(|p| p.lambda_min.map(|l| (p.delta_phi, l - lambda_c0)))
        .collect();
    let (coefficient, exponent) = fit_power_law(&data)?;
    let residuals: Vec<f64> = data.iter().map(|&(x, y)| y - coefficient * x.powf(exponent)).collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(CriticalLineFit {
        points,
        lambda_c0,
        coefficient,
        exponent,
        rms_residual,
        max_residual,
        lambda_step: spec.lambda_step,
    })
}

/// Least-squares fit of y = c·x^β: a straight line in log-log space for the
/// start, then Gauss–Newton on the untransformed residuals.
pub fn fit_power_law(data: &[(f64, f64)]) -> Result<(f64, f64)> {
    let logs: Vec<(f64, f64)> = data.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if logs.len() < 2 {
        return Err(DickeError::InvalidParameter(format!(
            "a power-law fit needs two points with positive offsets, got {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let (mx, my) = (logs.iter().map(|p| p.0).sum::<f64>() / n, logs.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DickeError::InvalidParameter("a power-law fit needs two distinct abscissae".into()));
    }
    let mut beta = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let mut c = (my - beta * mx).exp();

    let cost = |c: f64, beta: f64| data.iter().map(|&(x, y)| (y - c * x.powf(beta)).powi(2)).sum::<f64>();
    let mut current = cost(c, beta);
    for _ in 0..100 {
        // Normal equations of the 2×2 linearized problem.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in data {
            let xb = x.powf(beta);
            let (j1, j2) = (xb, c * xb * x.ln());
            let r = y - c * xb;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 += j1 * r;
            b2 += j2 * r;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-300 {
            break;
        }
        let (dc, db) = ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
        let mut scale = 1.0;
        let mut improved = false;
        while scale > 1e-6 {
            let trial = cost(c + scale * dc, beta + scale * db);
            if trial <= current {
                c += scale * dc;
                beta += scale * db;
                improved = current - trial > 1e-15 * current.max(1e-300);
                current = trial;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((c, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let data: Vec<(f64, f64)> = (1..=10).map(|i| 0.2 * i as f64).map(|x| (x, 0.327 * x.powf(0.75))).collect();
        let (c, b) = fit_power_law(&data).unwrap();
        assert!((c - 0.327).abs() < 1e-12 && (b - 0.75).abs() < 1e-12);
    }

    #[test]
    fn gauss_newton_improves_on_log_fit() {
        // Additive noise biases the log-log line; the refinement must not
        // increase the linear-space residual.
        let data: Vec<(f64, f64)> = (1..=10)
            .map(|i| 0.2 * i as f64)
            .enumerate()
            .map(|(k, x)| (x, 0.33 * x.powf(0.8) + if k % 2 == 0 { 0.004 } else { -0.004 }))
            .collect();
        let (c, b) = fit_power_law(&data).unwrap();
        let cost = |c: f64, b: f64| data.iter().map(|&(x, y)| (y - c * x.powf(b)).powi(2)).sum::<f64>();
        assert!(cost(c, b) <= cost(0.33, 0.8));
        assert!((b - 0.8).abs() < 0.05);
    }

    #[test]
    fn degenerate_fits_fail() {
        assert!(fit_power_law(&[(1.0, 0.3)]).is_err());
        assert!(fit_power_law(&[(1.0, 0.3), (1.0, 0.4)]).is_err());
    }

    #[test]
    fn edge_minimum_is_ignored() {
        let l = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        assert_eq!(refine_minimum(&l, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]), None);
        let (x, _) = refine_minimum(&l, &[0.01, 0.3, 0.2, 0.25, 0.1, 0.2]).unwrap();
        assert!((x - 0.5).abs() < 0.05);
    }

    #[test]
    fn analytic_estimate_and_engine_check() {
        let spec = CriticalLineSpec {
            base: ModelParams::resonant(0.8, 1.0, 20, 40).unwrap(),
            engine: EngineConfig::of(Engine::Quantum),
            delta_phi: vec![1.0],
            lambda_step: 0.01,
            lambda_span: 0.1,
            periods: 2.0,
            samples_per_period: 20,
        };
        assert!(critical_line(&spec).is_err());
        let p = ModelParams::resonant(0.8, 1.0, 20, 40).unwrap();
        let est = 0.5 * (p.omega * (p.omega0 + 2.0 * 1.0)).sqrt();
        assert!((est - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn short_line_runs() {
        let spec = CriticalLineSpec {
            base: ModelParams::resonant(0.8, 1.0, 20, 40).unwrap(),
            engine: EngineConfig::of(Engine::Meanfield),
            delta_phi: vec![0.6, 1.0, 1.4],
            lambda_step: 0.01,
            lambda_span: 0.3,
            periods: 30.0,
            samples_per_period: 50,
        };
        let fit = critical_line(&spec).unwrap();
        assert_eq!(fit.points.len(), 3);
        let t = fit.table();
        assert_eq!(t.len(), 3);
        for p in &fit.points {
            let l = p.lambda_min.unwrap();
            assert!(l > p.lambda_c && l < p.lambda_estimate, "{p:?}");
        }
    }
}
