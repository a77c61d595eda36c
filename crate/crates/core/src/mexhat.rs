//! Particle in the isotropic quartic double well V(ρ) = −(k/2)ρ² + (g/4)ρ⁴.
//!
//! At energy −ε the radial motion runs between turning points ρ₋ and ρ₊;
//! the half period and the time average of ρ² have closed forms in terms
//! of complete elliptic integrals. Both diverge/vanish logarithmically as
//! ε → 0, where the orbit touches the hump at the origin.

use crate::error::{DickeError, Result};
use crate::ode::{integrate_sampled, Dopri5, OdeSystem, Tolerances};
use crate::series::TimeSeries;
use crate::specfun::elliptic_ke_complementary;

/// Below this depth the half period is reported as infinite.
pub const DEPTH_GUARD: f64 = 1e-300;
pub const SWEEP_COLUMNS: [&str; 4] = ["eps", "avg_rho2_analytic", "avg_rho2_numeric", "T_half"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MexHatParams {
    pub mass: f64,
    /// k: coefficient of the inverted quadratic term.
    pub quadratic: f64,
    /// g: coefficient of the quartic term.
    pub quartic: f64,
    /// ε: the orbit has energy −ε.
    pub depth: f64,
}

impl MexHatParams {
    pub fn new(mass: f64, quadratic: f64, quartic: f64, depth: f64) -> Result<Self> {
        let p = MexHatParams { mass, quadratic, quartic, depth };
        if !(mass > 0.0 && quadratic > 0.0 && quartic > 0.0) || !mass.is_finite() {
            return Err(DickeError::InvalidParameter(format!(
                "mass, k and g must be positive, got m={mass}, k={quadratic}, g={quartic}"
            )));
        }
        if !(depth >= 0.0 && depth <= p.max_depth() * (1.0 + 1e-12)) {
            return Err(DickeError::InvalidParameter(format!(
                "depth must lie in [0, k²/4g = {}], got {depth}",
                p.max_depth()
            )));
        }
        Ok(p)
    }

    pub fn with_depth(self, depth: f64) -> Result<Self> {
        Self::new(self.mass, self.quadratic, self.quartic, depth)
    }

    /// ρ₀² = k/g, the radius of the potential minimum squared.
    pub fn rho0_sq(&self) -> f64 {
        self.quadratic / self.quartic
    }

    /// k²/(4g) = −V_min.
    pub fn max_depth(&self) -> f64 {
        self.quadratic * self.quadratic / (4.0 * self.quartic)
    }

    pub fn potential(&self, rho_sq: f64) -> f64 {
        -0.5 * self.quadratic * rho_sq + 0.25 * self.quartic * rho_sq * rho_sq
    }
}

/// (ρ₋, ρ₊) for the radial orbit at energy −ε.
pub fn turning_points(p: &MexHatParams) -> (f64, f64) {
    let (plus_sq, minus_sq) = turning_points_sq(p);
    (minus_sq.sqrt(), plus_sq.sqrt())
}

fn turning_points_sq(p: &MexHatParams) -> (f64, f64) {
    let r0 = p.rho0_sq();
    let disc = (r0 * r0 - 4.0 * p.depth / p.quartic).max(0.0).sqrt();
    let plus_sq = r0 + disc;
    // Product of the roots is 4ε/g; avoids cancellation for small ε.
    let minus_sq = if plus_sq > 0.0 { (4.0 * p.depth / p.quartic) / plus_sq } else { 0.0 };
    (plus_sq, minus_sq.min(plus_sq))
}

/// Time from ρ₋ to ρ₊, √(2m/g) K(κ)/ρ₊ with κ' = ρ₋/ρ₊.
pub fn half_period(p: &MexHatParams) -> f64 {
    if p.depth < DEPTH_GUARD {
        return f64::INFINITY;
    }
    let (minus, plus) = turning_points(p);
    let (k, _) = elliptic_ke_complementary(minus / plus).expect("ρ₋/ρ₊ lies in (0, 1]");
    (2.0 * p.mass / p.quartic).sqrt() * k / plus
}

/// ⟨ρ²⟩ over a half period, ρ₊² E(κ)/K(κ). Tends to zero with ε.
pub fn average_rho_squared(p: &MexHatParams) -> f64 {
    if p.depth < DEPTH_GUARD {
        return 0.0;
    }
    let (plus_sq, minus_sq) = turning_points_sq(p);
    let (k, e) = elliptic_ke_complementary((minus_sq / plus_sq).sqrt()).expect("ρ₋/ρ₊ lies in (0, 1]");
    plus_sq * e / k
}

/// Cartesian equations of motion, with ∫ρ² dt carried as a fifth
/// component so that time averages come out of the integrator directly.
struct Motion {
    mass: f64,
    quadratic: f64,
    quartic: f64,
}

impl OdeSystem for Motion {
    fn dim(&self) -> usize {
        5
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let rho_sq = y[0] * y[0] + y[1] * y[1];
        let force = (self.quadratic - self.quartic * rho_sq) / self.mass;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = force * y[0];
        dy[3] = force * y[1];
        dy[4] = rho_sq;
    }
}

fn motion(p: &MexHatParams) -> Motion {
    Motion { mass: p.mass, quadratic: p.quadratic, quartic: p.quartic }
}

pub fn default_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() }
}

fn observables(p: &MexHatParams, t: f64, y: &[f64]) -> [f64; 8] {
    let rho_sq = y[0] * y[0] + y[1] * y[1];
    let radial_v = if rho_sq > 0.0 { (y[0] * y[2] + y[1] * y[3]) / rho_sq.sqrt() } else { 0.0 };
    let kinetic = 0.5 * p.mass * (y[2] * y[2] + y[3] * y[3]);
    let angular = p.mass * (y[0] * y[3] - y[1] * y[2]);
    [
        t,
        y[0],
        y[1],
        rho_sq,
        (p.mass * radial_v).powi(2),
        kinetic + p.potential(rho_sq),
        angular,
        y[4],
    ]
}

/// Trajectory from position `x0` and velocity `v0`. Columns
/// `t,q1,q2,rho2,p_rho2,energy,ang_mom,int_rho2`; the last is ∫₀ᵗ ρ² dt.
/// The `depth` field of `p` is not used.
pub fn integrate_mexhat(
    x0: [f64; 2],
    v0: [f64; 2],
    p: &MexHatParams,
    t_final: f64,
    sample_dt: f64,
    tol: Tolerances,
) -> Result<TimeSeries> {
    if !(t_final >= 0.0) || !(sample_dt > 0.0) {
        return Err(DickeError::InvalidParameter("need t_final >= 0 and sample_dt > 0".into()));
    }
    let n = ((t_final / sample_dt) - 1e-9).ceil().max(0.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| if n == 0 { 0.0 } else { t_final * i as f64 / n as f64 }).collect();
    let mut series = TimeSeries::new(&["t", "q1", "q2", "rho2", "p_rho2", "energy", "ang_mom", "int_rho2"]);
    integrate_sampled(&motion(p), 0.0, &[x0[0], x0[1], v0[0], v0[1], 0.0], &times, tol, |t, y| {
        series.push(&observables(p, t, y));
        Ok(true)
    })?;
    Ok(series)
}

/// ⟨ρ²⟩ from a radial orbit released at rest at ρ₊, averaged over
/// `half_periods` closed-form half periods.
pub fn numeric_average_rho_squared(p: &MexHatParams, half_periods: u32, tol: Tolerances) -> Result<f64> {
    let t_half = half_period(p);
    if !t_half.is_finite() {
        return Ok(0.0);
    }
    let (_, plus) = turning_points(p);
    let window = t_half * half_periods.max(1) as f64;
    let mut y = [plus, 0.0, 0.0, 0.0, 0.0];
    let mut t = 0.0;
    Dopri5::new(5, tol).advance(&motion(p), &mut t, &mut y, window)?;
    Ok(y[4] / window)
}

/// Closed-form and numerical ⟨ρ²⟩ with the half period, one row per depth.
pub fn sweep(base: &MexHatParams, depths: &[f64], half_periods: u32, tol: Tolerances) -> Result<TimeSeries> {
    let mut out = TimeSeries::new(&SWEEP_COLUMNS);
    for &eps in depths {
        let p = base.with_depth(eps)?;
        out.push(&[
            eps,
            average_rho_squared(&p),
            numeric_average_rho_squared(&p, half_periods, tol)?,
            half_period(&p),
        ]);
    }
    Ok(out)
}

/// `count` depths evenly spaced in (0, k²/4g], excluding zero.
pub fn default_depth_grid(base: &MexHatParams, count: usize) -> Vec<f64> {
    let top = base.max_depth();
    (1..=count).map(|i| top * i as f64 / count as f64).collect()
}
