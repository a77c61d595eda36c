//! Classical (large-spin) limit in canonical coordinates.
//!
//! The spin coherent state is mapped onto a canonical pair `(Q, P)` with
//! `Q² + P² ≤ 4`, the field coherent state onto `(q, p)`. All dynamics run
//! in the co-rotating frame with splitting Ω = ω₀ + δφ.

use num_complex::Complex64;

use crate::error::{DickeError, Result};
use crate::model::ModelParams;
use crate::ode::{integrate_sampled, Dopri5, OdeSystem, Tolerances};
use crate::series::TimeSeries;

/// Trajectories stop once Q² + P² exceeds `4 − SINGULARITY_GUARD`.
pub const SINGULARITY_GUARD: f64 = 1e-9;
pub const TRAJECTORY_COLUMNS: [&str; 8] = ["t", "Q", "P", "q", "p", "n_ph", "n_at", "H_cl"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalState {
    /// Q: spin coordinate.
    pub spin_q: f64,
    /// P: spin momentum.
    pub spin_p: f64,
    /// q: field coordinate.
    pub field_q: f64,
    /// p: field momentum.
    pub field_p: f64,
}

/// Fine-tuned start state for the darkening protocol at λ = 0.823 with
/// ω = ω₀ = δφ = 1. It lies on the H_cl ≈ 0 shell, close to the unstable
/// manifold of the origin.
pub const FINE_TUNED_PRESET: ClassicalState = ClassicalState {
    spin_q: 0.9049,
    spin_p: -0.0204,
    field_q: -1.6382,
    field_p: 0.171581,
};

impl ClassicalState {
    pub const ORIGIN: ClassicalState = ClassicalState { spin_q: 0.0, spin_p: 0.0, field_q: 0.0, field_p: 0.0 };

    pub fn new(spin_q: f64, spin_p: f64, field_q: f64, field_p: f64) -> Self {
        ClassicalState { spin_q, spin_p, field_q, field_p }
    }

    /// `[Q, P, q, p]`
    pub fn to_array(self) -> [f64; 4] {
        [self.spin_q, self.spin_p, self.field_q, self.field_p]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        ClassicalState::new(y[0], y[1], y[2], y[3])
    }

    pub fn spin_radius2(&self) -> f64 {
        self.spin_q * self.spin_q + self.spin_p * self.spin_p
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn photon_density(&self) -> f64 {
        0.5 * (self.field_q * self.field_q + self.field_p * self.field_p)
    }

    pub fn atomic_inversion(&self) -> f64 {
        0.5 * self.spin_radius2()
    }

    pub fn negated(self) -> Self {
        ClassicalState::new(-self.spin_q, -self.spin_p, -self.field_q, -self.field_p)
    }
}

/// Coherent-state labels of a classical point for spin length `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub alpha: Complex64,
    pub zeta: Complex64,
}

impl CoherentParams {
    pub fn from_classical(s: &ClassicalState, j: f64) -> Result<Self> {
        let r2 = s.spin_radius2();
        if r2 >= 4.0 {
            return Err(DickeError::Singularity { radius2: r2, time: 0.0 });
        }
        Ok(CoherentParams {
            alpha: Complex64::new(s.field_q, s.field_p) * (j / 2.0).sqrt(),
            zeta: Complex64::new(s.spin_q, s.spin_p) / (4.0 - r2).sqrt(),
        })
    }

    pub fn to_classical(&self, j: f64) -> ClassicalState {
        let field = self.alpha / (j / 2.0).sqrt();
        let spin = self.zeta * (2.0 / (1.0 + self.zeta.norm_sqr()).sqrt());
        ClassicalState::new(spin.re, spin.im, field.re, field.im)
    }
}

fn check_domain(s: &ClassicalState) -> Result<f64> {
    let r2 = s.spin_radius2();
    if r2 >= 4.0 || !r2.is_finite() {
        return Err(DickeError::Singularity { radius2: r2, time: f64::NAN });
    }
    Ok((4.0 - r2).sqrt())
}

fn rhs_unchecked(y: &[f64], omega: f64, big_omega: f64, lambda: f64, dy: &mut [f64]) {
    let (bq, bp, q, p) = (y[0], y[1], y[2], y[3]);
    let r2 = bq * bq + bp * bp;
    // Outside the disk the flow is undefined; NaN makes the stepper retreat.
    let s = if r2 < 4.0 { (4.0 - r2).sqrt() } else { f64::NAN };
    dy[0] = big_omega * bp - lambda * q * bq * bp / s;
    dy[1] = -big_omega * bq + lambda * q * (2.0 * bq * bq + bp * bp - 4.0) / s;
    dy[2] = omega * p;
    dy[3] = -omega * q - lambda * bq * s;
}

/// Time derivative (Q̇, Ṗ, q̇, ṗ) in the co-rotating frame.
pub fn eom_rhs(s: &ClassicalState, p: &ModelParams) -> Result<ClassicalState> {
    check_domain(s)?;
    let mut dy = [0.0; 4];
    rhs_unchecked(&s.to_array(), p.omega, p.big_omega(), p.lambda, &mut dy);
    Ok(ClassicalState::from_slice(&dy))
}

pub fn classical_hamiltonian(s: &ClassicalState, p: &ModelParams) -> f64 {
    let root = (4.0 - s.spin_radius2()).max(0.0).sqrt();
    0.5 * p.big_omega() * s.spin_radius2()
        + 0.5 * p.omega * (s.field_q * s.field_q + s.field_p * s.field_p)
        + p.lambda * s.spin_q * s.field_q * root
}

/// Potential part of H_cl, V(Q, q) at fixed P (the momentum terms in P and
/// p are left out).
pub fn classical_potential(spin_q: f64, field_q: f64, spin_p: f64, p: &ModelParams) -> f64 {
    let root = (4.0 - spin_q * spin_q - spin_p * spin_p).max(0.0).sqrt();
    0.5 * p.big_omega() * spin_q * spin_q + 0.5 * p.omega * field_q * field_q + p.lambda * spin_q * field_q * root
}

/// V(Q, q) with P = 0 on a regular grid. Points outside |Q| < 2 are
/// skipped. Columns `Q,q,V`.
pub fn potential_grid(p: &ModelParams, q_span: f64, field_span: f64, points: usize) -> Result<TimeSeries> {
    if points < 2 || !(q_span > 0.0) || !(field_span > 0.0) {
        return Err(DickeError::InvalidParameter("grid needs >= 2 points and positive spans".into()));
    }
    let q_span = q_span.min(2.0);
    let mut out = TimeSeries::new(&["Q", "q", "V"]);
    for i in 0..points {
        let bq = -q_span + 2.0 * q_span * i as f64 / (points - 1) as f64;
        if bq * bq > 4.0 {
            continue;
        }
        for k in 0..points {
            let fq = -field_span + 2.0 * field_span * k as f64 / (points - 1) as f64;
            out.push(&[bq, fq, classical_potential(bq, fq, 0.0, p)]);
        }
    }
    Ok(out)
}

/// Rotation of the spin pair back to the lab frame by angle `phi`.
pub fn lab_frame(s: &ClassicalState, phi: f64) -> ClassicalState {
    let (sin, cos) = phi.sin_cos();
    ClassicalState::new(
        s.spin_q * cos - s.spin_p * sin,
        s.spin_q * sin + s.spin_p * cos,
        s.field_q,
        s.field_p,
    )
}

/// Stationary points of the co-rotating flow: the origin, plus the two
/// symmetry-broken points when λ > λ_c (upper sign first).
pub fn stationary_states(p: &ModelParams) -> Vec<ClassicalState> {
    let mut out = vec![ClassicalState::ORIGIN];
    let (lambda, lc) = (p.lambda, p.lambda_c());
    if lambda > lc {
        for sign in [1.0, -1.0] {
            out.push(broken_point(p, lc, sign));
        }
    }
    out
}

/// Symmetry-broken stationary point for critical coupling `lc`; the
/// origin when λ ≤ lc.
fn broken_point(p: &ModelParams, lc: f64, sign: f64) -> ClassicalState {
    let lambda = p.lambda;
    if lambda <= lc {
        return ClassicalState::ORIGIN;
    }
    let r2 = (lc / lambda).powi(2);
    ClassicalState::new(
        sign * (2.0 * (1.0 - r2)).sqrt(),
        0.0,
        -sign * (2.0 * lambda / p.omega) * (1.0 - r2 * r2).sqrt(),
        0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Normal,
    Superradiant,
}

impl Phase {
    pub fn of(p: &ModelParams) -> Phase {
        if p.lambda < p.lambda_c() {
            Phase::Normal
        } else {
            Phase::Superradiant
        }
    }

    fn name(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
        }
    }
}

/// Small-oscillation modes around the stationary point of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModes {
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub eps_plus_sq: f64,
    pub eps_minus_sq: f64,
    pub phase: Phase,
}

/// Normal modes of the flow linearized at the stationary point of
/// `phase`. Fails for the phase that is unstable at λ (the critical point
/// itself belongs to both).
pub fn linear_modes(p: &ModelParams, phase: Phase) -> Result<LinearModes> {
    let (w, big_w, lambda, lc) = (p.omega, p.big_omega(), p.lambda, p.lambda_c());
    let valid = match phase {
        Phase::Normal => lambda <= lc,
        Phase::Superradiant => lambda >= lc,
    };
    if !valid {
        return Err(DickeError::WrongPhase { expected: phase.name(), lambda, lambda_c: lc });
    }
    // ε₊² from the sum and discriminant, ε₋² from the product of the
    // roots, which stays accurate as ε₋ → 0.
    let (plus_sq, product) = match phase {
        Phase::Normal => {
            let sum = big_w * big_w + w * w;
            let disc = ((big_w * big_w - w * w).powi(2) + 16.0 * lambda * lambda * big_w * w).sqrt();
            (0.5 * (sum + disc), 4.0 * big_w * w * (lc * lc - lambda * lambda))
        }
        Phase::Superradiant => {
            let g = 16.0 * lambda.powi(4) / (w * w);
            let sum = w * w + g;
            let disc = ((w * w - g).powi(2) + 4.0 * (w * big_w).powi(2)).sqrt();
            (0.5 * (sum + disc), 16.0 * (lambda.powi(4) - lc.powi(4)))
        }
    };
    let minus_sq = if plus_sq > 0.0 { product / plus_sq } else { 0.0 };
    Ok(LinearModes {
        eps_plus: plus_sq.sqrt(),
        eps_minus: minus_sq.max(0.0).sqrt(),
        eps_plus_sq: plus_sq,
        eps_minus_sq: minus_sq,
        phase,
    })
}

/// Closed-form small-amplitude trajectory started at rest (P = p = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolution {
    pub modes: LinearModes,
    /// Stationary point the motion is expanded around.
    pub center: ClassicalState,
    /// Spin amplitudes A₊, A₋.
    pub spin_amp: [f64; 2],
    /// Field amplitudes a₊, a₋.
    pub field_amp: [f64; 2],
    /// Ṡpin-velocity to P conversion: Q̇ = `velocity_scale` · P.
    velocity_scale: f64,
    omega: f64,
}

/// Linearized solution in `phase` for a start at rest. In the
/// superradiant phase the expansion point is the broken stationary state
/// on the same side as `s0.spin_q`.
pub fn linear_solution(s0: &ClassicalState, p: &ModelParams, phase: Phase) -> Result<LinearSolution> {
    if s0.spin_p != 0.0 || s0.field_p != 0.0 {
        return Err(DickeError::InvalidParameter("the linear solution requires P(0) = p(0) = 0".into()));
    }
    let modes = linear_modes(p, phase)?;
    let (w, big_w, lambda, lc) = (p.omega, p.big_omega(), p.lambda, p.lambda_c());
    let (center, ratio, velocity_scale) = match phase {
        Phase::Normal => {
            let f = |e2: f64| (e2 - big_w * big_w) / (2.0 * lambda * big_w);
            (ClassicalState::ORIGIN, [f(modes.eps_plus_sq), f(modes.eps_minus_sq)], big_w)
        }
        Phase::Superradiant => {
            let sign = if s0.spin_q < 0.0 { -1.0 } else { 1.0 };
            let root = (lambda * lambda + lc * lc).sqrt();
            let g = |e2: f64| 2.0 * 2f64.sqrt() * w * lc * lc / ((e2 - w * w) * root);
            (
                broken_point(p, lc, sign),
                [g(modes.eps_plus_sq), g(modes.eps_minus_sq)],
                2.0 * (lambda * lambda + lc * lc) / w,
            )
        }
    };
    let denom = ratio[0] - ratio[1];
    if !denom.is_finite() || denom.abs() < 1e-300 || ratio.iter().any(|r| !r.is_finite()) {
        return Err(DickeError::DegenerateModes);
    }
    let big_dev = s0.spin_q - center.spin_q;
    let small_dev = s0.field_q - center.field_q;
    let a_plus = (small_dev - big_dev * ratio[1]) / denom;
    let a_minus = (big_dev * ratio[0] - small_dev) / denom;
    Ok(LinearSolution {
        modes,
        center,
        spin_amp: [a_plus, a_minus],
        field_amp: [ratio[0] * a_plus, ratio[1] * a_minus],
        velocity_scale,
        omega: w,
    })
}

impl LinearSolution {
    pub fn at(&self, t: f64) -> ClassicalState {
        let e = [self.modes.eps_plus, self.modes.eps_minus];
        let (mut x_big, mut x_small, mut v_big, mut v_small) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..2 {
            let (s, c) = (e[i] * t).sin_cos();
            x_big += self.spin_amp[i] * c;
            x_small += self.field_amp[i] * c;
            v_big -= self.spin_amp[i] * e[i] * s;
            v_small -= self.field_amp[i] * e[i] * s;
        }
        ClassicalState::new(
            self.center.spin_q + x_big,
            v_big / self.velocity_scale,
            self.center.field_q + x_small,
            v_small / self.omega,
        )
    }

    /// Long-time average of (q² + p²)/2.
    pub fn mean_photon_number(&self) -> f64 {
        let w2 = self.omega * self.omega;
        let e2 = [self.modes.eps_plus_sq, self.modes.eps_minus_sq];
        let fluct: f64 = (0..2).map(|i| (e2[i] + w2) * self.field_amp[i].powi(2)).sum::<f64>() / (4.0 * w2);
        0.5 * self.center.field_q.powi(2) + fluct
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchStart {
    pub state: ClassicalState,
    pub coherent: CoherentParams,
    /// Set when λ ≤ λ_c⁰: the undriven ground state is the vacuum and the
    /// quench does nothing.
    pub trivial: bool,
}

/// Mean-field ground state of the undriven Hamiltonian, used as the start
/// of a quench into the rotating frame. `upper` picks Q(0) > 0.
pub fn quench_initial_state(p: &ModelParams, upper: bool) -> Result<QuenchStart> {
    let lc0 = p.lambda_c0();
    let trivial = p.lambda <= lc0;
    let state = broken_point(p, lc0, if upper { 1.0 } else { -1.0 });
    Ok(QuenchStart { state, coherent: CoherentParams::from_classical(&state, p.j())?, trivial })
}

struct Flow {
    omega: f64,
    big_omega: f64,
    lambda: f64,
}

impl OdeSystem for Flow {
    fn dim(&self) -> usize {
        4
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        rhs_unchecked(y, self.omega, self.big_omega, self.lambda, dy)
    }
}

/// Step cap of a fraction of the fastest linear time scale, so that near
/// stationary trajectories are not skipped over with huge steps.
fn step_cap(p: &ModelParams) -> f64 {
    0.5 / (p.big_omega().abs() + p.omega + 2.0 * p.lambda)
}

fn capped(tol: Tolerances, p: &ModelParams) -> Tolerances {
    if tol.h_max > 0.0 {
        tol
    } else {
        Tolerances { h_max: step_cap(p), ..tol }
    }
}

fn flow(p: &ModelParams) -> Flow {
    Flow { omega: p.omega, big_omega: p.big_omega(), lambda: p.lambda }
}

/// Default tolerances for classical trajectories.
pub fn default_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-10, atol: 1e-12, ..Tolerances::default() }
}

/// Integrates the co-rotating flow and samples [`TRAJECTORY_COLUMNS`]
/// every `sample_dt` (shortened to divide `t_final`). A trajectory that
/// runs into the pole Q² + P² = 4 stops early with `truncated` set.
pub fn integrate(
    s0: &ClassicalState,
    p: &ModelParams,
    t_final: f64,
    sample_dt: f64,
    tol: Tolerances,
) -> Result<TimeSeries> {
    check_domain(s0)?;
    if !(t_final >= 0.0) || !(sample_dt > 0.0) {
        return Err(DickeError::InvalidParameter(format!(
            "need t_final >= 0 and sample_dt > 0, got {t_final} and {sample_dt}"
        )));
    }
    let n = ((t_final / sample_dt) - 1e-9).ceil().max(0.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| if n == 0 { 0.0 } else { t_final * i as f64 / n as f64 }).collect();
    let mut series = TimeSeries::new(&TRAJECTORY_COLUMNS);
    let mut hit_pole = false;
    let outcome = integrate_sampled(&flow(p), 0.0, &s0.to_array(), &times, capped(tol, p), |t, y| {
        let s = ClassicalState::from_slice(y);
        if s.spin_radius2() > 4.0 - SINGULARITY_GUARD {
            hit_pole = true;
            return Ok(false);
        }
        series.push(&[t, y[0], y[1], y[2], y[3], s.photon_density(), s.atomic_inversion(), classical_hamiltonian(&s, p)]);
        Ok(true)
    });
    match outcome {
        Ok(_) => {}
        Err(DickeError::Integration(_)) if series.last_row().is_some_and(|r| r[1] * r[1] + r[2] * r[2] > 3.9) => {
            hit_pole = true;
        }
        Err(e) => return Err(e),
    }
    series.truncated = hit_pole;
    Ok(series)
}

/// State after following the flow from `s0` until its Euclidean norm
/// first exceeds `radius`, located by bisection to `1e-12` in time.
pub fn first_exit(s0: &ClassicalState, p: &ModelParams, radius: f64, t_max: f64) -> Result<(f64, ClassicalState)> {
    let sys = flow(p);
    let probe = 0.01;
    let mut stepper = Dopri5::new(4, capped(default_tolerances(), p));
    let mut y = s0.to_array().to_vec();
    let mut t = 0.0;
    let mut prev = (t, y.clone());
    while t < t_max {
        let target = (t + probe).min(t_max);
        stepper.advance(&sys, &mut t, &mut y, target)?;
        if ClassicalState::from_slice(&y).norm() > radius {
            let (mut lo, mut hi) = (prev.0, t);
            let base = prev.1.clone();
            let mut found = y.clone();
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let mut ym = base.clone();
                let mut tm = prev.0;
                Dopri5::new(4, capped(default_tolerances(), p)).advance(&sys, &mut tm, &mut ym, mid)?;
                if ClassicalState::from_slice(&ym).norm() > radius {
                    hi = mid;
                    found = ym;
                } else {
                    lo = mid;
                }
            }
            return Ok((hi, ClassicalState::from_slice(&found)));
        }
        prev = (t, y.clone());
    }
    Err(DickeError::Integration(format!("norm stayed below {radius} up to t = {t_max}")))
}

/// Two-stage construction of the fine-tuned start: leave the origin along
/// its unstable direction from (0, 0, 0, η) and stop where the norm first
/// exceeds 1.
pub fn fine_tune_two_stage(p: &ModelParams, eta: f64) -> Result<ClassicalState> {
    first_exit(&ClassicalState::new(0.0, 0.0, 0.0, eta), p, 1.0, 1e4).map(|(_, s)| s)
}
