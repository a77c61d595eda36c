//! Chebyshev propagation in the co-rotating frame.
//!
//! The co-rotating Hamiltonian is time independent, so one expansion of
//! `exp(-i H dt)` is precomputed per run and applied with the three-term
//! recurrence.

use num_complex::Complex64;

use crate::error::{DickeError, Result};
use crate::model::{build_observable, Basis, BasisIndex, ModelParams, Observable, SparseMatrix};
use crate::series::TimeSeries;
use crate::specfun::bessel_j_array;
use crate::spectra::SpectralBounds;

/// Truncation tolerance for the Chebyshev tail.
pub const DEFAULT_CHEBYSHEV_TOL: f64 = 1e-15;
/// Allowed deviation of the norm from its initial value.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
/// Column layout of [`evolve_and_sample`] output.
pub const SAMPLE_COLUMNS: [&str; 8] = ["t", "n_ph", "n_at", "n_ex", "ReJp", "ImJp", "norm", "energy"];

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        QuantumState { amplitudes, time: 0.0 }
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Fock ⊗ Dicke product state |n⟩|j, m⟩.
    pub fn basis_state(p: &ModelParams, n: u32, m: f64) -> Result<Self> {
        let basis = Basis::new(p)?;
        let flat = basis
            .flat_nm(n, m)
            .ok_or_else(|| DickeError::InvalidParameter(format!("|n={n}, m={m}⟩ is outside the basis")))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amps[flat] = Complex64::new(1.0, 0.0);
        Ok(Self::new(amps))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        n
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Product of a field coherent state |α⟩ and a spin coherent state |ζ⟩,
/// truncated at `n_max` photons and renormalized. Returns the state and
/// the probability weight lost to the truncation.
///
/// The spin state is built from |j, −j⟩, so ζ = 0 is the lowest level.
pub fn coherent_state(p: &ModelParams, alpha: Complex64, zeta: Complex64) -> Result<(QuantumState, f64)> {
    let basis = Basis::new(p)?;
    let two_j = p.two_j as usize;

    let mut photon = Vec::with_capacity(p.n_max as usize + 1);
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=p.n_max {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        photon.push(amp);
    }
    let photon_weight: f64 = photon.iter().map(|a| a.norm_sqr()).sum();

    // ζ^k √C(2j, k) (1 + |ζ|²)^(−j), evaluated through logarithms so large
    // |ζ| (close to the upper pole) does not overflow.
    let r = zeta.norm();
    let arg = zeta.arg();
    let log_norm = -(two_j as f64 / 2.0) * (1.0 + r * r).ln();
    let mut log_binom = 0.0;
    let mut spin = Vec::with_capacity(two_j + 1);
    for k in 0..=two_j {
        if k > 0 {
            log_binom += ((two_j - k + 1) as f64).ln() - (k as f64).ln();
        }
        let modulus = if r == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (k as f64 * r.ln() + 0.5 * log_binom + log_norm).exp()
        };
        spin.push(Complex64::from_polar(modulus, k as f64 * arg));
    }

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
    for (flat, BasisIndex { n, k }) in basis.iter() {
        amplitudes[flat] = photon[n as usize] * spin[k as usize];
    }
    let mut state = QuantumState::new(amplitudes);
    let kept = state.norm().powi(2);
    if !(kept > 0.0) {
        return Err(DickeError::InvalidParameter("coherent state has no weight inside the basis".into()));
    }
    state.normalize();
    Ok((state, (1.0 - photon_weight).max(0.0).max(1.0 - kept)))
}

#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    pub bounds: SpectralBounds,
    pub dt: f64,
    pub order: usize,
    pub coeffs: Vec<Complex64>,
    center: f64,
    half_width: f64,
}

impl ChebyshevPlan {
    /// Upper bound on the coefficient tail beyond `order`.
    pub fn tail_bound(&self) -> f64 {
        tail_sum(self.half_width * self.dt, self.order)
    }
}

fn tail_sum(x: f64, order: usize) -> f64 {
    let k_max = order + 60 + (x.abs() * 0.5) as usize;
    let j = bessel_j_array(x, k_max);
    j[order + 1..].iter().map(|v| 2.0 * v.abs()).sum()
}

/// Chebyshev coefficients for `exp(-i H dt)` on the padded interval of
/// `bounds`, truncated at the smallest order whose tail Σ_{k>M} |a_k| is
/// below `tol`.
pub fn make_plan(bounds: SpectralBounds, dt: f64, tol: f64) -> Result<ChebyshevPlan> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DickeError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if !(tol > 0.0) {
        return Err(DickeError::InvalidParameter(format!("truncation tolerance must be positive, got {tol}")));
    }
    let (lo, hi) = bounds.padded();
    let center = 0.5 * (hi + lo);
    let half_width = 0.5 * (hi - lo);
    let x = dt * half_width;
    // J_k(x) decays super-exponentially once k exceeds x; this start is
    // comfortably past the point where the tail drops below 1e-300.
    let k_max = (x + 10.0 * x.cbrt() + 60.0).ceil() as usize;
    let j = bessel_j_array(x, k_max);
    let mut tail = 0.0;
    let mut order = k_max;
    for k in (0..=k_max).rev() {
        if tail + 2.0 * j[k].abs() >= tol {
            order = k;
            break;
        }
        tail += 2.0 * j[k].abs();
        order = k;
    }
    let order = order.max(1).min(k_max);
    let phase = Complex64::from_polar(1.0, -dt * center);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut ik = Complex64::new(1.0, 0.0);
    for (k, &jk) in j.iter().enumerate().take(order + 1) {
        let weight = if k == 0 { 1.0 } else { 2.0 };
        coeffs.push(ik * phase * (weight * jk));
        ik *= minus_i;
    }
    Ok(ChebyshevPlan { bounds, dt, order, coeffs, center, half_width })
}

/// Stateful stepper applying one plan to states of a fixed Hamiltonian.
pub struct Propagator<'a> {
    h: &'a SparseMatrix,
    plan: ChebyshevPlan,
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
    reference_norm: Option<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(h: &'a SparseMatrix, plan: ChebyshevPlan) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); h.dim()];
        Propagator {
            h,
            plan,
            prev: zero.clone(),
            cur: zero.clone(),
            next: zero.clone(),
            acc: zero,
            reference_norm: None,
        }
    }

    pub fn plan(&self) -> &ChebyshevPlan {
        &self.plan
    }

    /// y = ĥ x with ĥ = (H − c)/w mapping the padded interval onto [−1, 1].
    fn apply_rescaled(h: &SparseMatrix, center: f64, inv_w: f64, x: &[Complex64], y: &mut [Complex64]) {
        h.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - xi * center) * inv_w;
        }
    }

    /// Advances `state` by one plan step. The first call fixes the
    /// reference norm against which drift is measured.
    pub fn step(&mut self, state: &mut QuantumState) -> Result<()> {
        if state.dim() != self.h.dim() {
            return Err(DickeError::InvalidParameter(format!(
                "state dimension {} does not match the Hamiltonian ({})",
                state.dim(),
                self.h.dim()
            )));
        }
        let reference = *self.reference_norm.get_or_insert_with(|| state.norm());
        let (c, inv_w) = (self.plan.center, 1.0 / self.plan.half_width);
        let a = &self.plan.coeffs;

        self.prev.copy_from_slice(&state.amplitudes);
        for (o, x) in self.acc.iter_mut().zip(&self.prev) {
            *o = x * a[0];
        }
        Self::apply_rescaled(self.h, c, inv_w, &self.prev, &mut self.cur);
        for (o, x) in self.acc.iter_mut().zip(&self.cur) {
            *o += x * a[1];
        }
        for ak in &a[2..] {
            Self::apply_rescaled(self.h, c, inv_w, &self.cur, &mut self.next);
            for ((n, p), o) in self.next.iter_mut().zip(&self.prev).zip(self.acc.iter_mut()) {
                *n = *n * 2.0 - p;
                *o += *n * ak;
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        state.amplitudes.copy_from_slice(&self.acc);
        state.time += self.plan.dt;

        let drift = (state.norm() - reference).abs();
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(DickeError::NormDrift { drift, limit: NORM_DRIFT_LIMIT, time: state.time });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub t_final: f64,
    pub sample_dt: f64,
    /// Requested propagation step; shortened so that it divides `sample_dt`.
    pub dt: f64,
    pub tol: f64,
    /// Lab-frame rotation rate δφ used to rotate ⟨J₊⟩ back to the lab frame.
    pub delta_phi: f64,
}

impl SampleOptions {
    /// Step T_φ/1000 and sampling every T_φ/100 for the given model.
    pub fn for_model(p: &ModelParams, t_final: f64) -> Self {
        let period = p.drive_period();
        SampleOptions {
            t_final,
            sample_dt: period / 100.0,
            dt: period / 1000.0,
            tol: DEFAULT_CHEBYSHEV_TOL,
            delta_phi: p.delta_phi,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub final_state: QuantumState,
    /// Largest population of the highest Fock layer seen at a sample; a
    /// large value means `n_max` is too small.
    pub max_top_layer: f64,
    pub plan_order: usize,
    pub dt: f64,
}

/// Diagonal observables and the spin-raising matrix, built once per run.
struct Probes {
    photons: Vec<f64>,
    jz: Vec<f64>,
    top_layer: Vec<bool>,
    j_plus: SparseMatrix,
    j: f64,
}

impl Probes {
    fn new(p: &ModelParams) -> Result<Self> {
        let basis = Basis::new(p)?;
        let half = p.j();
        let mut photons = Vec::with_capacity(basis.dimension());
        let mut jz = Vec::with_capacity(basis.dimension());
        let mut top_layer = Vec::with_capacity(basis.dimension());
        for (_, idx) in basis.iter() {
            photons.push(idx.n as f64);
            jz.push(idx.k as f64 - half);
            top_layer.push(idx.n == p.n_max);
        }
        Ok(Probes { photons, jz, top_layer, j_plus: build_observable(Observable::JPlus, p)?, j: half })
    }

    fn row(&self, psi: &QuantumState, h: &SparseMatrix, delta_phi: f64) -> ([f64; 8], f64) {
        let (mut n_ph, mut jz, mut norm2, mut top) = (0.0, 0.0, 0.0, 0.0);
        for (i, a) in psi.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            norm2 += w;
            n_ph += w * self.photons[i];
            jz += w * self.jz[i];
            if self.top_layer[i] {
                top += w;
            }
        }
        let jp_lab = Complex64::from_polar(1.0, -delta_phi * psi.time) * self.j_plus.expectation(&psi.amplitudes);
        let energy = h.expectation(&psi.amplitudes).re;
        let j = self.j;
        let row = [
            psi.time,
            n_ph / j,
            1.0 + jz / j,
            (n_ph + jz + j) / j,
            jp_lab.re,
            jp_lab.im,
            norm2.sqrt(),
            energy,
        ];
        (row, top)
    }
}

/// Propagates `psi0` under the co-rotating Hamiltonian `h_rot` and records
/// the [`SAMPLE_COLUMNS`] observables. Densities are frame independent;
/// ⟨J₊⟩ is reported in the lab frame, ⟨J₊⟩_lab = e^{−iφ(t)} ⟨J₊⟩_rot with
/// φ(t) = δφ t.
pub fn evolve_and_sample(
    psi0: &QuantumState,
    h_rot: &SparseMatrix,
    p: &ModelParams,
    bounds: SpectralBounds,
    opts: &SampleOptions,
) -> Result<Evolution> {
    if !(opts.t_final >= 0.0) || !(opts.sample_dt > 0.0) || !(opts.dt > 0.0) {
        return Err(DickeError::InvalidParameter(format!(
            "need t_final >= 0 and positive steps, got t_final={}, sample_dt={}, dt={}",
            opts.t_final, opts.sample_dt, opts.dt
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(DickeError::InvalidParameter(format!("initial state has norm {}", psi0.norm())));
    }
    let n_samples = ((opts.t_final / opts.sample_dt) - 1e-9).ceil().max(0.0) as usize;
    let sample_dt = if n_samples > 0 { opts.t_final / n_samples as f64 } else { opts.sample_dt };
    let steps_per_sample = ((sample_dt / opts.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = sample_dt / steps_per_sample as f64;

    let plan = make_plan(bounds, dt, opts.tol)?;
    let plan_order = plan.order;
    let probes = Probes::new(p)?;
    let mut prop = Propagator::new(h_rot, plan);
    let mut psi = psi0.clone();
    psi.time = 0.0;

    let mut series = TimeSeries::new(&SAMPLE_COLUMNS);
    let (row, mut max_top) = probes.row(&psi, h_rot, opts.delta_phi);
    series.push(&row);
    for s in 1..=n_samples {
        for _ in 0..steps_per_sample {
            prop.step(&mut psi)?;
        }
        // Re-anchor the clock to avoid accumulated rounding in t.
        psi.time = s as f64 * sample_dt;
        let (row, top) = probes.row(&psi, h_rot, opts.delta_phi);
        max_top = max_top.max(top);
        series.push(&row);
    }
    Ok(Evolution { series, final_state: psi, max_top_layer: max_top, plan_order, dt })
}
