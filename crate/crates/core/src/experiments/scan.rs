//! Parameter scans of the quench protocol, run on a worker pool.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{EngineConfig, Grid};
use super::quench::{run_quench, Schedule};
use crate::error::{DickeError, Result};
use crate::model::ModelParams;
use crate::series::{time_average, TimeSeries};

pub const SCAN_COLUMNS: [&str; 5] = ["lambda", "delta_phi", "n_ph_Tphi", "avg_n_ph", "avg_n_at"];

/// Environment variable holding the worker count for scans.
pub const WORKERS_ENV: &str = "DICKE_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub base: ModelParams,
    pub engine: EngineConfig,
    /// Values of λ; `None` keeps the base value.
    pub lambda: Option<Grid>,
    /// Values of δφ; `None` keeps the base value.
    pub delta_phi: Option<Grid>,
    /// Run length and averaging window in drive periods.
    pub periods: f64,
    pub samples_per_period: u32,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_none() && self.delta_phi.is_none() {
            return Err(DickeError::InvalidParameter("a scan needs a lambda or delta_phi grid".into()));
        }
        for g in [self.lambda, self.delta_phi].into_iter().flatten() {
            g.validate()?;
        }
        if !(self.periods >= 1.0) {
            return Err(DickeError::InvalidParameter(format!("periods must be >= 1, got {}", self.periods)));
        }
        Ok(())
    }

    /// Grid points, δφ outer and λ inner.
    pub fn points(&self) -> Vec<ModelParams> {
        let lambdas = self.lambda.map_or_else(|| vec![self.base.lambda], |g| g.values());
        let dphis = self.delta_phi.map_or_else(|| vec![self.base.delta_phi], |g| g.values());
        dphis
            .iter()
            .flat_map(|&d| lambdas.iter().map(move |&l| self.base.with_lambda(l).with_delta_phi(d)))
            .collect()
    }
}

/// Observables of one scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    /// n_ph after one drive period.
    pub n_ph_period: f64,
    pub avg_n_ph: f64,
    pub avg_n_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub index: usize,
    pub lambda: f64,
    pub delta_phi: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    /// One row per grid point in grid order, columns [`SCAN_COLUMNS`].
    /// Failed points carry NaN.
    pub table: TimeSeries,
    pub failures: Vec<PointFailure>,
}

/// Quench at `p` over `periods` drive periods and reduce to the scan
/// observables.
pub fn evaluate_point(p: &ModelParams, engine: &EngineConfig, periods: f64, samples_per_period: u32) -> Result<PointValues> {
    let schedule = Schedule::in_periods(p, periods, samples_per_period);
    let series = run_quench(p, engine, schedule)?;
    let window = schedule.t_final;
    Ok(PointValues {
        n_ph_period: series.value_at("n_ph", p.drive_period())?,
        avg_n_ph: time_average(&series, "n_ph", window)?,
        avg_n_at: time_average(&series, "n_at", window)?,
    })
}

/// Evaluates all points in parallel; results come back in input order.
pub fn evaluate_points(
    points: &[ModelParams],
    engine: &EngineConfig,
    periods: f64,
    samples_per_period: u32,
) -> Vec<Result<PointValues>> {
    let work = || points.par_iter().map(|p| evaluate_point(p, engine, periods, samples_per_period)).collect();
    match worker_pool() {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

/// Pool sized by [`WORKERS_ENV`], or `None` for the global pool.
pub fn worker_pool() -> Option<rayon::ThreadPool> {
    let n: usize = std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
}

pub fn scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let points = spec.points();
    let results = evaluate_points(&points, &spec.engine, spec.periods, spec.samples_per_period);
    let mut table = TimeSeries::new(&SCAN_COLUMNS);
    let mut failures = Vec::new();
    for (index, (p, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(v) => table.push(&[p.lambda, p.delta_phi, v.n_ph_period, v.avg_n_ph, v.avg_n_at]),
            Err(e) => {
                table.push(&[p.lambda, p.delta_phi, f64::NAN, f64::NAN, f64::NAN]);
                failures.push(PointFailure { index, lambda: p.lambda, delta_phi: p.delta_phi, message: e.to_string() });
            }
        }
    }
    Ok(ScanResult { table, failures })
}

/// Indices of strict interior local minima of `values`, NaN-aware.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect()
}

/// Vertex of the parabola through three equally spaced samples around
/// index `i`, returned as (x, y).
pub fn parabolic_vertex(xs: &[f64], ys: &[f64], i: usize) -> (f64, f64) {
    let (ym, y0, yp) = (ys[i - 1], ys[i], ys[i + 1]);
    let h = xs[i + 1] - xs[i];
    let curvature = ym - 2.0 * y0 + yp;
    if !(curvature > 0.0) {
        return (xs[i], y0);
    }
    let shift = 0.5 * (ym - yp) / curvature;
    (xs[i] + shift * h, y0 - 0.125 * (ym - yp) * (ym - yp) / curvature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Engine;

    fn spec(lambda: Grid) -> ScanSpec {
        ScanSpec {
            base: ModelParams::resonant(0.8, 1.0, 20, 40).unwrap(),
            engine: EngineConfig::of(Engine::Meanfield),
            lambda: Some(lambda),
            delta_phi: None,
            periods: 5.0,
            samples_per_period: 50,
        }
    }

    #[test]
    fn rows_follow_grid_order() {
        let s = spec(Grid::new(0.3, 1.2, 10).unwrap());
        let r = scan(&s).unwrap();
        assert_eq!(r.table.len(), 10);
        assert!(r.failures.is_empty());
        let l = r.table.column("lambda").unwrap();
        assert!(l.windows(2).all(|w| w[1] > w[0]));
        // Below λ_c⁰ the start is the vacuum and stays there.
        assert_eq!(r.table.column("avg_n_ph").unwrap()[0], 0.0);
    }

    #[test]
    fn deterministic() {
        let s = spec(Grid::new(0.6, 1.0, 5).unwrap());
        let a = scan(&s).unwrap().table.to_csv_string();
        let b = scan(&s).unwrap().table.to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn failures_are_recorded_and_scan_continues() {
        let mut s = spec(Grid::new(0.6, 1.0, 3).unwrap());
        s.engine.kind = Engine::Quantum;
        s.engine.dimension_cap = 10;
        s.lambda = Some(Grid::new(0.3, 0.4, 2).unwrap());
        s.base = ModelParams::resonant(0.3, 1.0, 2, 2).unwrap();
        s.periods = 1.0;
        let ok = scan(&s).unwrap();
        assert!(ok.failures.is_empty());
        s.base = ModelParams::resonant(0.3, 1.0, 2, 5).unwrap();
        let r = scan(&s).unwrap();
        assert_eq!(r.failures.len(), 2);
        assert!(r.table.column("avg_n_ph").unwrap().iter().all(|x| x.is_nan()));
    }

    #[test]
    fn two_dimensional_grid() {
        let mut s = spec(Grid::new(0.6, 0.8, 3).unwrap());
        s.delta_phi = Some(Grid::new(0.5, 1.0, 2).unwrap());
        let pts = s.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].delta_phi, pts[3].delta_phi), (0.5, 1.0));
        assert_eq!((pts[2].lambda, pts[3].lambda), (0.8, 0.6));
    }

    #[test]
    fn validation() {
        let mut s = spec(Grid::new(0.6, 0.8, 3).unwrap());
        s.periods = 0.5;
        assert!(scan(&s).is_err());
        s.periods = 2.0;
        s.lambda = None;
        assert!(scan(&s).is_err());
    }

    #[test]
    fn parabola_recovers_vertex() {
        let xs: Vec<f64> = (0..5).map(|i| 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (x - 0.237f64).powi(2) + 0.5).collect();
        assert_eq!(local_minima(&ys), vec![2]);
        let (x, y) = parabolic_vertex(&xs, &ys, 2);
        assert!((x - 0.237).abs() < 1e-12 && (y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn minima_skip_endpoints_and_plateaus() {
        assert!(local_minima(&[0.0, 1.0, 2.0]).is_empty());
        assert!(local_minima(&[1.0, 0.5, 0.5, 1.0]).is_empty());
        assert_eq!(local_minima(&[1.0, 0.5, 0.7, 0.2, 0.9]), vec![1, 3]);
    }
}
