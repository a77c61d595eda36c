//! Embedded Dormand–Prince 5(4) integrator with adaptive step control.

use crate::error::{DickeError, Result};

/// First-order system dy/dt = f(t, y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size (0 = unbounded).
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 0.0,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights minus 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Stateful Dormand–Prince stepper. Keeps the step-size proposal and the
/// FSAL derivative between calls to [`Dopri5::advance`], so sampling on a
/// fine output grid does not shrink the internal step.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    tol: Tolerances,
    h: f64,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    fsal_valid: bool,
    pub stats: Stats,
}

impl Dopri5 {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        Dopri5 {
            tol,
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            fsal_valid: false,
            stats: Stats::default(),
        }
    }

    /// Forget the cached derivative; call after modifying `y` externally.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn initial_step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], span: f64) -> f64 {
        let n = y.len() as f64;
        let sc = |v: f64| self.tol.atol + self.tol.rtol * v.abs();
        let d0 = (y.iter().map(|&v| (v / sc(v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y.iter().zip(&self.k[0]).map(|(&v, &f)| (f / sc(v)).powi(2)).sum::<f64>() / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + h0 * self.k[0][i];
        }
        let (ys, k1) = (&self.y_stage, &mut self.k[1]);
        sys.rhs(t + h0, ys, k1);
        self.stats.evaluations += 1;
        let d2 = (0..y.len())
            .map(|i| ((self.k[1][i] - self.k[0][i]) / sc(y[i])).powi(2))
            .sum::<f64>()
            .sqrt()
            / n.sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrates from `*t` to `t_target` in place. The final step is
    /// shortened to land on `t_target` exactly; the unclipped proposal is
    /// kept for the next call.
    pub fn advance<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: &mut f64,
        y: &mut [f64],
        t_target: f64,
    ) -> Result<()> {
        let span = t_target - *t;
        if span <= 0.0 {
            return Ok(());
        }
        if !self.fsal_valid {
            sys.rhs(*t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal_valid = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(sys, *t, y, span);
        }
        let dim = y.len();
        let mut steps = 0u64;
        while *t < t_target {
            steps += 1;
            if steps > self.tol.max_steps {
                return Err(DickeError::Integration(format!(
                    "step budget of {} exhausted at t = {}",
                    self.tol.max_steps, *t
                )));
            }
            if self.tol.h_max > 0.0 {
                self.h = self.h.min(self.tol.h_max);
            }
            let remaining = t_target - *t;
            let last = self.h >= remaining * (1.0 - 1e-12);
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * t.abs().max(1.0) && !last {
                return Err(DickeError::Integration(format!("step size underflow at t = {}", *t)));
            }

            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (r, a) in A[s].iter().enumerate().take(s) {
                        acc += h * a * self.k[r][i];
                    }
                    self.y_stage[i] = acc;
                }
                sys.rhs(*t + C[s] * h, &self.y_stage, &mut self.k[s]);
            }
            self.stats.evaluations += 6;
            // Stage 6 is the 5th-order solution (FSAL row).
            self.y_new.copy_from_slice(&self.y_stage);
            let mut acc = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (s, w) in E.iter().enumerate() {
                    e += w * self.k[s][i];
                }
                e *= h;
                let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(self.y_new[i].abs());
                acc = f64::max(acc, (e / scale).abs());
            }
            let err = acc;
            if !err.is_finite() || self.y_new.iter().any(|v| !v.is_finite()) {
                self.stats.rejected += 1;
                self.h = h * 0.2;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.stats.accepted += 1;
                *t = if last { t_target } else { *t + h };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                // Keep the free-running proposal when the step was clipped.
                self.h = if last { self.h.max(h * factor) } else { h * factor };
            } else {
                self.stats.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

/// Integrates `sys` from `t0` and calls `observe(t, y)` at every time in
/// `times` (which must be non-decreasing and start at or after `t0`).
pub fn integrate_sampled<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    tol: Tolerances,
    mut observe: impl FnMut(f64, &[f64]) -> Result<bool>,
) -> Result<Stats> {
    let mut stepper = Dopri5::new(y0.len(), tol);
    let mut y = y0.to_vec();
    let mut t = t0;
    for &ts in times {
        stepper.advance(sys, &mut t, &mut y, ts)?;
        if !observe(t, &y)? {
            break;
        }
    }
    Ok(stepper.stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sys = (1usize, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]);
        let mut st = Dopri5::new(1, Tolerances::default());
        let (mut t, mut y) = (0.0, [1.0]);
        st.advance(&sys, &mut t, &mut y, 3.0).unwrap();
        assert_eq!(t, 3.0);
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_on_fine_grid() {
        let sys = (2usize, |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        });
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let mut worst: f64 = 0.0;
        let stats = integrate_sampled(&sys, 0.0, &[1.0, 0.0], &times, Tolerances::default(), |t, y| {
            worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
            Ok(true)
        })
        .unwrap();
        assert!(worst < 1e-9, "max error {worst}");
        // Sampling every 0.01 must not force one step per sample.
        assert!(stats.accepted < 2 * times.len() as u64);
    }

    #[test]
    fn time_dependent_rhs() {
        let sys = (1usize, |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = t.cos());
        let mut st = Dopri5::new(1, Tolerances::default());
        let (mut t, mut y) = (0.0, [0.0]);
        st.advance(&sys, &mut t, &mut y, 2.0).unwrap();
        assert!((y[0] - 2.0f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn nan_is_rejected_then_budget_error() {
        let sys = (1usize, |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = f64::NAN);
        let tol = Tolerances { max_steps: 100, ..Tolerances::default() };
        let mut st = Dopri5::new(1, tol);
        let (mut t, mut y) = (0.0, [0.0]);
        assert!(st.advance(&sys, &mut t, &mut y, 1.0).is_err());
    }
}
