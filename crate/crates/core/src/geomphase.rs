//! Evolution in the instantaneous eigenbasis of the driven Hamiltonian,
//! with dynamic and geometric phases kept separate.
//!
//! The instantaneous eigenstates are rotations of the undriven eigenstates
//! |φ_l⟩, so the eigenvalues ε_l are constant and the connection
//! A_lk = −δφ ⟨φ_l|J_z|φ_k⟩ is time independent. In the gauge
//! c_l = χ_l e^{iθ_l}, θ_l = (−ε_l + A_ll) t, the coefficients obey
//!
//! ```text
//! dχ_l/dt = i Σ_{k≠l} A_lk e^{i(θ_k − θ_l)} χ_k
//! ```
//!
//! Setting the geometric part of θ to zero gives the ablated dynamics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{DickeError, Result};
use crate::model::{build_dicke_hamiltonian, build_observable, ModelParams, Observable};
use crate::ode::{integrate_sampled, OdeSystem, Tolerances};
use crate::series::TimeSeries;
use crate::spectra::{full_diagonalization_capped, EigenDecomposition};

/// Largest basis handled here; cost per step grows with the square.
pub const PHASE_RESOLVED_CAP: usize = 256;
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Undriven eigenbasis with the matrices needed for phase-resolved
/// evolution, all expressed in that basis.
#[derive(Debug, Clone)]
pub struct PhaseResolvedBasis {
    pub decomposition: EigenDecomposition,
    /// A_lk = −δφ ⟨φ_l|J_z|φ_k⟩.
    pub connection: DMatrix<f64>,
    /// ⟨φ_k|a†a|φ_l⟩.
    pub photon_matrix: DMatrix<f64>,
    /// ⟨φ_k|J_z|φ_l⟩.
    pub spin_z_matrix: DMatrix<f64>,
    pub delta_phi: f64,
    pub j: f64,
}

fn to_eigenbasis(vectors: &DMatrix<f64>, op: &DMatrix<f64>) -> DMatrix<f64> {
    vectors.transpose() * op * vectors
}

impl PhaseResolvedBasis {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Self::with_cap(p, PHASE_RESOLVED_CAP)
    }

    pub fn with_cap(p: &ModelParams, cap: usize) -> Result<Self> {
        if p.dimension() > cap {
            return Err(DickeError::DimensionOverflow { dimension: p.dimension(), cap });
        }
        let decomposition = full_diagonalization_capped(&build_dicke_hamiltonian(p)?, cap)?;
        Self::from_decomposition(decomposition, p)
    }

    pub fn from_decomposition(decomposition: EigenDecomposition, p: &ModelParams) -> Result<Self> {
        let v = &decomposition.vectors;
        if v.nrows() != p.dimension() {
            return Err(DickeError::InvalidParameter("eigenbasis does not match the model dimension".into()));
        }
        let spin_z_matrix = to_eigenbasis(v, &build_observable(Observable::Jz, p)?.to_dense());
        let connection = &spin_z_matrix * (-p.delta_phi);
        let photon_matrix = to_eigenbasis(v, &build_observable(Observable::PhotonNumber, p)?.to_dense());
        Ok(PhaseResolvedBasis { decomposition, connection, photon_matrix, spin_z_matrix, delta_phi: p.delta_phi, j: p.j() })
    }

    pub fn dim(&self) -> usize {
        self.decomposition.values.len()
    }

    /// Coefficients of a Fock-basis state in the undriven eigenbasis.
    pub fn project(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let v = &self.decomposition.vectors;
        if psi.len() != v.nrows() {
            return Err(DickeError::InvalidParameter(format!("expected {} amplitudes, got {}", v.nrows(), psi.len())));
        }
        Ok((0..self.dim()).map(|l| (0..psi.len()).map(|i| psi[i] * v[(i, l)]).sum()).collect())
    }

    /// θ_l(t) = −ε_l t + γ_l(t), or −ε_l t alone when geometric phases
    /// are switched off.
    fn gauge_phases(&self, t: f64, geometric: bool, out: &mut [f64]) {
        for (l, o) in out.iter_mut().enumerate() {
            let dynamic = -self.decomposition.values[l] * t;
            *o = if geometric { dynamic + self.connection[(l, l)] * t } else { dynamic };
        }
    }
}

/// A_lk = −δφ ⟨φ_l|J_z|φ_k⟩ for the eigenvectors in `basis`.
pub fn connection_matrix(basis: &EigenDecomposition, p: &ModelParams) -> Result<DMatrix<f64>> {
    let jz = build_observable(Observable::Jz, p)?.to_dense();
    Ok(to_eigenbasis(&basis.vectors, &jz) * (-p.delta_phi))
}

/// γ_l(t) = −⟨φ_l|J_z|φ_l⟩ δφ t.
pub fn berry_phase(basis: &PhaseResolvedBasis, level: usize, t: f64) -> f64 {
    basis.connection[(level, level)] * t
}

/// Dynamic phase ε_l t.
pub fn dynamic_phase(basis: &PhaseResolvedBasis, level: usize, t: f64) -> f64 {
    basis.decomposition.values[level] * t
}

struct GaugeFlow<'a> {
    basis: &'a PhaseResolvedBasis,
    geometric: bool,
}

impl OdeSystem for GaugeFlow<'_> {
    fn dim(&self) -> usize {
        2 * self.basis.dim()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.basis.dim();
        let mut theta = vec![0.0; n];
        self.basis.gauge_phases(t, self.geometric, &mut theta);
        let z: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(1.0, theta[k]) * Complex64::new(y[k], y[n + k])).collect();
        let a = &self.basis.connection;
        for l in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != l {
                    acc += z[k] * a[(l, k)];
                }
            }
            let d = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -theta[l]) * acc;
            dy[l] = d.re;
            dy[n + l] = d.im;
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseResolvedRun {
    /// Columns `t,n_ph,n_at,norm`.
    pub series: TimeSeries,
    /// χ at the final sample.
    pub chi: Vec<Complex64>,
    pub time: f64,
}

impl PhaseResolvedRun {
    /// Populations |χ_l|² at the final sample.
    pub fn populations(&self) -> Vec<f64> {
        self.chi.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Σ_kl c_k* c_l M_kl for a real symmetric M.
fn expectation(m: &DMatrix<f64>, c: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..c.len() {
        let mut row = Complex64::new(0.0, 0.0);
        for l in 0..c.len() {
            row += c[l] * m[(k, l)];
        }
        acc += c[k].conj() * row;
    }
    acc.re
}

/// (n_ph, n_at) with c_l = χ_l e^{iθ_l}.
fn densities(basis: &PhaseResolvedBasis, chi: &[Complex64], theta: &[f64]) -> (f64, f64) {
    let c: Vec<Complex64> = chi.iter().zip(theta).map(|(x, th)| x * Complex64::from_polar(1.0, *th)).collect();
    (expectation(&basis.photon_matrix, &c) / basis.j, 1.0 + expectation(&basis.spin_z_matrix, &c) / basis.j)
}

/// Integrates the gauge-transformed coefficients from `chi0` and samples
/// the photon density every `sample_dt` up to `t_final`.
pub fn evolve_phase_resolved(
    chi0: &[Complex64],
    basis: &PhaseResolvedBasis,
    t_final: f64,
    sample_dt: f64,
    zero_geometric: bool,
    tol: Tolerances,
) -> Result<PhaseResolvedRun> {
    let n = basis.dim();
    if chi0.len() != n {
        return Err(DickeError::InvalidParameter(format!("expected {n} coefficients, got {}", chi0.len())));
    }
    let norm0 = chi0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(DickeError::InvalidParameter(format!("initial coefficients have norm {norm0}")));
    }
    if !(t_final >= 0.0) || !(sample_dt > 0.0) {
        return Err(DickeError::InvalidParameter("need t_final >= 0 and sample_dt > 0".into()));
    }
    let samples = ((t_final / sample_dt) - 1e-9).ceil().max(0.0) as usize;
    let times: Vec<f64> = (0..=samples).map(|i| if samples == 0 { 0.0 } else { t_final * i as f64 / samples as f64 }).collect();
    let y0: Vec<f64> = chi0.iter().map(|c| c.re).chain(chi0.iter().map(|c| c.im)).collect();
    let flow = GaugeFlow { basis, geometric: !zero_geometric };

    let mut series = TimeSeries::new(&["t", "n_ph", "n_at", "norm"]);
    let mut chi = chi0.to_vec();
    let mut theta = vec![0.0; n];
    let mut last_t = 0.0;
    integrate_sampled(&flow, 0.0, &y0, &times, tol, |t, y| {
        for l in 0..n {
            chi[l] = Complex64::new(y[l], y[n + l]);
        }
        let norm = chi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - norm0).abs() <= NORM_DRIFT_LIMIT) {
            return Err(DickeError::NormDrift { drift: (norm - norm0).abs(), limit: NORM_DRIFT_LIMIT, time: t });
        }
        basis.gauge_phases(t, !zero_geometric, &mut theta);
        let (n_ph, n_at) = densities(basis, &chi, &theta);
        series.push(&[t, n_ph, n_at, norm]);
        last_t = t;
        Ok(true)
    })?;
    Ok(PhaseResolvedRun { series, chi, time: last_t })
}

/// Start in the undriven ground state, χ_l(0) = δ_l0.
pub fn ground_start(basis: &PhaseResolvedBasis) -> Vec<Complex64> {
    let mut chi = vec![Complex64::new(0.0, 0.0); basis.dim()];
    chi[0] = Complex64::new(1.0, 0.0);
    chi
}

/// Default tolerances for phase-resolved runs.
pub fn default_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-10, atol: 1e-12, ..Tolerances::default() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_rotated_hamiltonian;
    use crate::propagator::{evolve_and_sample, QuantumState, SampleOptions};
    use crate::spectra::extremal_eigenvalues;

    #[test]
    fn projection_of_an_eigenvector_is_a_unit_vector() {
        let p = ModelParams::resonant(0.9, 1.0, 2, 5).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        let psi: Vec<Complex64> = b.decomposition.vectors.column(3).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let chi = b.project(&psi).unwrap();
        for (l, c) in chi.iter().enumerate() {
            let want = if l == 3 { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-12);
        }
    }

    #[test]
    fn no_drive_means_zero_connection() {
        let p = ModelParams::resonant(0.8, 0.0, 2, 5).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        assert_eq!(b.connection.abs().max(), 0.0);
        let run = evolve_phase_resolved(&ground_start(&b), &b, 10.0, 0.5, false, default_tolerances()).unwrap();
        assert_eq!(run.chi, ground_start(&b));
    }

    #[test]
    fn connection_is_symmetric() {
        let p = ModelParams::resonant(0.9, 0.7, 4, 8).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        assert!((&b.connection - b.connection.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn decoupled_connection_is_diagonal_in_m() {
        let p = ModelParams::new(1.0, 0.7, 0.0, 0.4, 3, 4).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        let jz = build_observable(Observable::Jz, &p).unwrap().to_dense();
        for l in 0..b.dim() {
            for k in 0..b.dim() {
                if l != k {
                    assert!(b.connection[(l, k)].abs() < 1e-14);
                }
            }
            // Each eigenvector is a product state |n, m⟩.
            let v = b.decomposition.vectors.column(l);
            let m = (v.transpose() * &jz * v)[(0, 0)];
            assert!((b.connection[(l, l)] + 0.4 * m).abs() < 1e-14);
            assert!((2.0 * m - (2.0 * m).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn berry_phase_is_linear() {
        let p = ModelParams::resonant(1.1, 0.8, 2, 6).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        for l in [0, 3, 7] {
            assert_eq!(berry_phase(&b, l, 0.0), 0.0);
            assert!((berry_phase(&b, l, 2.6) - 2.0 * berry_phase(&b, l, 1.3)).abs() < 1e-15);
        }
        let free = ModelParams::new(1.0, 1.0, 0.0, 0.8, 2, 2).unwrap();
        let b = PhaseResolvedBasis::new(&free).unwrap();
        // Lowest level of the decoupled model is |0, −1⟩.
        assert!((berry_phase(&b, 0, 2.0) - 0.8 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let p = ModelParams::resonant(0.5, 1.0, 10, 40).unwrap();
        assert!(matches!(PhaseResolvedBasis::new(&p), Err(DickeError::DimensionOverflow { .. })));
    }

    #[test]
    fn equivalent_to_co_rotating_propagation() {
        for lambda in [0.4, 0.823, 1.3] {
            let p = ModelParams::resonant(lambda, 1.0, 2, 5).unwrap();
            let b = PhaseResolvedBasis::new(&p).unwrap();
            let t_final = 2.0 * p.drive_period();
            let run = evolve_phase_resolved(&ground_start(&b), &b, t_final, 0.1, false, default_tolerances()).unwrap();

            let h_rot = build_rotated_hamiltonian(&p).unwrap();
            let v0: Vec<f64> = b.decomposition.vectors.column(0).iter().copied().collect();
            let psi = QuantumState::from_real(&v0);
            let mut opts = SampleOptions::for_model(&p, t_final);
            opts.sample_dt = t_final / (run.series.len() - 1) as f64;
            let ev = evolve_and_sample(&psi, &h_rot, &p, extremal_eigenvalues(&h_rot, 1e-12).unwrap(), &opts).unwrap();

            for name in ["n_ph", "n_at"] {
                let (a, c) = (run.series.column(name).unwrap(), ev.series.column(name).unwrap());
                assert_eq!(a.len(), c.len());
                let worst = a.iter().zip(c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(worst < 1e-8, "λ={lambda} {name}: max deviation {worst:e}");
            }
            let norm = run.series.column("norm").unwrap();
            assert!(norm.iter().all(|x| (x - 1.0).abs() < 1e-8));
        }
    }

    #[test]
    fn ablation_changes_the_dynamics() {
        let p = ModelParams::resonant(0.9, 1.0, 2, 8).unwrap();
        let b = PhaseResolvedBasis::new(&p).unwrap();
        let t = p.drive_period();
        let full = evolve_phase_resolved(&ground_start(&b), &b, t, t / 20.0, false, default_tolerances()).unwrap();
        let ablated = evolve_phase_resolved(&ground_start(&b), &b, t, t / 20.0, true, default_tolerances()).unwrap();
        let (x, y) = (full.series.column("n_ph").unwrap(), ablated.series.column("n_ph").unwrap());
        assert_eq!(x[0], y[0]);
        assert!((x[x.len() - 1] - y[y.len() - 1]).abs() > 1e-3);
        let total: f64 = ablated.populations().iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
    }
}
