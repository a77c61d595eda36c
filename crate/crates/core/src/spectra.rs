//! Extremal eigenvalues, ground states and dense eigenbases.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DickeError, Result};
use crate::model::{DiagonalOperator, SparseMatrix};

/// Default cap on the dimension accepted by [`full_diagonalization`].
pub const DEFAULT_DENSE_CAP: usize = 4096;
/// Relative padding applied to the spectral interval.
pub const DEFAULT_MARGIN: f64 = 0.01;
/// Two parity-sector ground energies closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

const KRYLOV_MAX: usize = 160;
const MAX_RESTARTS: usize = 200;
pub const KRYLOV_SEED: u64 = 0x5eed_d1c4e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
    pub margin: f64,
}

impl SpectralBounds {
    pub fn new(e_min: f64, e_max: f64, margin: f64) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite()) || !(margin >= 0.0) {
            return Err(DickeError::InvalidParameter(format!(
                "bad spectral bounds [{e_min}, {e_max}] with margin {margin}"
            )));
        }
        Ok(SpectralBounds { e_min, e_max, margin })
    }

    /// Interval widened by `margin` times its width on both sides. A
    /// degenerate interval (scalar H) is widened by `margin` in absolute
    /// terms so the rescaling stays finite.
    pub fn padded(&self) -> (f64, f64) {
        let width = (self.e_max - self.e_min).max(1.0e-300);
        let pad = if self.e_max > self.e_min { self.margin * width } else { self.margin.max(1e-3) };
        (self.e_min - pad, self.e_max + pad)
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Real normalized eigenvector, largest-magnitude component positive.
    pub state: Vec<f64>,
    /// True when the other symmetry sector has a ground energy within
    /// [`DEGENERACY_TOL`].
    pub degenerate: bool,
    /// Eigenvalue of the symmetry operator on the returned state, if one
    /// was supplied.
    pub sector: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Lowest,
    Highest,
}

struct Ritz {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Restarted Lanczos with full reorthogonalization for one end of the
/// spectrum. The start vector is restricted to the support of `mask` when
/// given (entries where the mask is false stay zero, which selects a
/// symmetry sector of an H that commutes with the symmetry).
fn lanczos_extremal(h: &SparseMatrix, end: End, tol: f64, mask: Option<&[bool]>) -> Result<Ritz> {
    let dim = h.dim();
    let scale = h.row_sum_norm().max(1e-300);
    let mut rng = ChaCha8Rng::seed_from_u64(KRYLOV_SEED ^ dim as u64);
    let mut start: Vec<f64> = (0..dim)
        .map(|i| match mask {
            Some(m) if !m[i] => 0.0,
            _ => rng.gen::<f64>() - 0.5,
        })
        .collect();
    if normalize(&mut start) == 0.0 {
        return Err(DickeError::InvalidParameter("empty symmetry sector".into()));
    }
    let m_max = KRYLOV_MAX.min(dim);
    let mut best = f64::NAN;
    let mut iterations = 0;

    for _restart in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![0.0; dim];
        let mut exhausted = false;
        loop {
            iterations += 1;
            let k = basis.len() - 1;
            h.apply_real(&basis[k], &mut w);
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // Full reorthogonalization, applied twice for stability.
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if b <= 1e-13 * scale {
                exhausted = true;
                break;
            }
            if basis.len() == m_max {
                beta.push(b);
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let pick = (0..m)
            .min_by(|&x, &y| {
                let (a, b) = (eig.eigenvalues[x], eig.eigenvalues[y]);
                match end {
                    End::Lowest => a.total_cmp(&b),
                    End::Highest => b.total_cmp(&a),
                }
            })
            .expect("Krylov space is never empty");
        let theta = eig.eigenvalues[pick];
        let s = eig.eigenvectors.column(pick);
        let mut vector = vec![0.0; dim];
        for (c, v) in s.iter().zip(&basis) {
            vector.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
        }
        normalize(&mut vector);
        // Explicit residual; cheap compared with the Krylov build and
        // immune to loss of orthogonality.
        h.apply_real(&vector, &mut w);
        let residual = w
            .iter()
            .zip(&vector)
            .map(|(hv, v)| (hv - theta * v).powi(2))
            .sum::<f64>()
            .sqrt();
        best = theta;
        if residual <= tol * scale || exhausted {
            return Ok(Ritz { value: theta, vector, residual });
        }
        start = vector;
    }
    Err(DickeError::NotConverged {
        solver: "lanczos",
        iterations,
        best: vec![best],
    })
}

/// Lowest and highest eigenvalue of a real symmetric `h`, padded by
/// [`DEFAULT_MARGIN`]. `tol` bounds the eigen-residual relative to the
/// row-sum norm of `h`, which also bounds the eigenvalue error.
pub fn extremal_eigenvalues(h: &SparseMatrix, tol: f64) -> Result<SpectralBounds> {
    if h.dim() == 0 {
        return Err(DickeError::InvalidParameter("empty matrix".into()));
    }
    let lo = lanczos_extremal(h, End::Lowest, tol, None);
    let hi = lanczos_extremal(h, End::Highest, tol, None);
    match (lo, hi) {
        (Ok(lo), Ok(hi)) => SpectralBounds::new(lo.value, hi.value, DEFAULT_MARGIN),
        (lo, hi) => {
            let est = |r: &Result<Ritz>| match r {
                Ok(r) => r.value,
                Err(DickeError::NotConverged { best, .. }) => best[0],
                Err(_) => f64::NAN,
            };
            Err(DickeError::NotConverged {
                solver: "lanczos",
                iterations: MAX_RESTARTS * KRYLOV_MAX,
                best: vec![est(&lo), est(&hi)],
            })
        }
    }
}

fn fix_phase(v: &mut [f64]) {
    let mut imax = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[imax].abs() * (1.0 + 1e-12) {
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest eigenvector of `h`. With a `symmetry` that commutes with `h`
/// (typically parity), each ±1 sector is solved separately: the lower one
/// is returned and near-degenerate sectors set the `degenerate` flag.
pub fn ground_state(h: &SparseMatrix, symmetry: Option<&DiagonalOperator>) -> Result<GroundState> {
    let tol = 1e-12;
    let Some(sym) = symmetry else {
        let mut r = lanczos_extremal(h, End::Lowest, tol, None)?;
        fix_phase(&mut r.vector);
        return Ok(GroundState { energy: r.value, state: r.vector, degenerate: false, sector: None });
    };
    if sym.diagonal.len() != h.dim() {
        return Err(DickeError::InvalidParameter("symmetry operator has the wrong dimension".into()));
    }
    let mut sectors = Vec::new();
    for sign in [1.0, -1.0] {
        let mask: Vec<bool> = sym.diagonal.iter().map(|&s| s * sign > 0.0).collect();
        if mask.iter().any(|&b| b) {
            let r = lanczos_extremal(h, End::Lowest, tol, Some(&mask))?;
            sectors.push((sign, r));
        }
    }
    sectors.sort_by(|a, b| a.1.value.total_cmp(&b.1.value));
    let degenerate = sectors.len() == 2 && (sectors[1].1.value - sectors[0].1.value).abs() < DEGENERACY_TOL;
    let (sign, mut r) = sectors.swap_remove(0);
    debug_assert!(r.residual.is_finite());
    fix_phase(&mut r.vector);
    Ok(GroundState { energy: r.value, state: r.vector, degenerate, sector: Some(sign) })
}

pub fn full_diagonalization(h: &SparseMatrix) -> Result<EigenDecomposition> {
    full_diagonalization_capped(h, DEFAULT_DENSE_CAP)
}

/// Dense eigendecomposition, refused above `cap`. Eigenvectors follow the
/// same phase convention as [`ground_state`].
pub fn full_diagonalization_capped(h: &SparseMatrix, cap: usize) -> Result<EigenDecomposition> {
    let dim = h.dim();
    if dim > cap {
        return Err(DickeError::DimensionOverflow { dimension: dim, cap });
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    for (c, &i) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_phase(&mut v);
        vectors.column_mut(c).copy_from_slice(&v);
    }
    Ok(EigenDecomposition { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_dicke_hamiltonian, build_parity, build_rotated_hamiltonian};
    use crate::ModelParams;
    use proptest::prelude::*;
    use rand::Rng;

    fn dense_extremes(h: &SparseMatrix) -> (f64, f64) {
        let eig = SymmetricEigen::new(h.to_dense());
        let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    #[test]
    fn diagonal_case_is_exact() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 1, 1).unwrap();
        let b = extremal_eigenvalues(&build_dicke_hamiltonian(&p).unwrap(), 1e-12).unwrap();
        assert!((b.e_min + 0.5).abs() < 1e-12);
        assert!((b.e_max - 1.5).abs() < 1e-12);
        let (lo, hi) = b.padded();
        assert!(lo < b.e_min && hi > b.e_max);
    }

    #[test]
    fn bounds_match_dense_oracle() {
        let p = ModelParams::resonant(1.0, 0.0, 2, 5).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        let b = extremal_eigenvalues(&h, 1e-12).unwrap();
        let (lo, hi) = dense_extremes(&h);
        assert!((b.e_min - lo).abs() < 1e-10 * lo.abs().max(1.0));
        assert!((b.e_max - hi).abs() < 1e-10 * hi.abs().max(1.0));
    }

    #[test]
    fn bounds_on_larger_system() {
        let p = ModelParams::resonant(1.3, 1.0, 20, 60).unwrap();
        let h = build_rotated_hamiltonian(&p).unwrap();
        let b = extremal_eigenvalues(&h, 1e-12).unwrap();
        let (lo, hi) = dense_extremes(&h);
        assert!((b.e_min - lo).abs() < 1e-10 * lo.abs());
        assert!((b.e_max - hi).abs() < 1e-10 * hi.abs());
    }

    #[test]
    fn ground_state_at_zero_coupling() {
        let p = ModelParams::resonant(0.0, 0.0, 4, 3).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        let g = ground_state(&h, None).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12);
        assert!((g.state[0] - 1.0).abs() < 1e-12);
        assert!((dot(&g.state, &g.state) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ground_state_matches_dense_oracle() {
        let p = ModelParams::resonant(0.3, 0.0, 2, 5).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        let parity = build_parity(&p).unwrap();
        let g = ground_state(&h, Some(&parity)).unwrap();
        let oracle = full_diagonalization(&h).unwrap();
        assert!((g.energy - oracle.values[0]).abs() < 1e-10);
        let v0 = oracle.vectors.column(0);
        let diff = g.state.iter().zip(v0.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "eigenvector mismatch {diff}");
        assert!(!g.degenerate);
        assert_eq!(g.sector, Some(1.0));
    }

    #[test]
    fn deep_superradiant_doublet_is_flagged() {
        let p = ModelParams::resonant(3.0, 0.0, 8, 60).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        let g = ground_state(&h, Some(&build_parity(&p).unwrap())).unwrap();
        assert!(g.degenerate);
        let plain = ground_state(&h, None).unwrap();
        assert!((plain.energy - g.energy).abs() < 1e-8);
    }

    #[test]
    fn full_spectrum_at_zero_coupling() {
        let p = ModelParams::new(1.0, 0.7, 0.0, 0.0, 3, 4).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        let d = full_diagonalization(&h).unwrap();
        let mut expected: Vec<f64> = (0..=4)
            .flat_map(|n| (0..=3).map(move |k| n as f64 + 0.7 * (k as f64 - 1.5)))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in d.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn completeness_trace_and_residuals() {
        let p = ModelParams::resonant(0.9, 0.4, 4, 20).unwrap();
        let h = build_rotated_hamiltonian(&p).unwrap();
        let d = full_diagonalization(&h).unwrap();
        let n = h.dim();
        let gram = &d.vectors * d.vectors.transpose();
        assert!((gram - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-12);
        let trace: f64 = d.values.iter().sum();
        assert!((trace - h.trace()).abs() < 1e-10 * h.trace().abs().max(1.0));
        let dense = h.to_dense();
        let norm = h.row_sum_norm();
        for l in 0..n {
            let v = d.vectors.column(l);
            let r = (&dense * v - v * d.values[l]).norm();
            assert!(r < 1e-10 * norm);
        }
        assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let p = ModelParams::resonant(0.5, 0.0, 2, 9).unwrap();
        let h = build_dicke_hamiltonian(&p).unwrap();
        assert!(matches!(
            full_diagonalization_capped(&h, 10),
            Err(DickeError::DimensionOverflow { dimension: 30, cap: 10 })
        ));
    }

    #[test]
    fn ground_energy_non_increasing_in_coupling() {
        let base = ModelParams::resonant(0.0, 0.0, 4, 30).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..=20 {
            let p = base.with_lambda(0.1 * i as f64);
            let e = ground_state(&build_dicke_hamiltonian(&p).unwrap(), None).unwrap().energy;
            assert!(e <= last + 1e-12);
            last = e;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rayleigh_quotients_lie_inside_bounds(
            lambda in 0.0f64..2.0,
            dphi in -0.5f64..1.0,
            two_j in 1u32..5,
            n_max in 1u32..12,
            seed in any::<u64>(),
        ) {
            let p = ModelParams::resonant(lambda, dphi, two_j, n_max).unwrap();
            let h = build_rotated_hamiltonian(&p).unwrap();
            let b = extremal_eigenvalues(&h, 1e-12).unwrap();
            let (lo, hi) = dense_extremes(&h);
            prop_assert!((b.e_min - lo).abs() <= 1e-10 * lo.abs().max(1.0));
            prop_assert!((b.e_max - hi).abs() <= 1e-10 * hi.abs().max(1.0));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hv = vec![0.0; h.dim()];
            for _ in 0..100 {
                let mut v: Vec<f64> = (0..h.dim()).map(|_| rng.gen::<f64>() - 0.5).collect();
                normalize(&mut v);
                h.apply_real(&v, &mut hv);
                let r = dot(&v, &hv);
                prop_assert!(r >= b.e_min - 1e-12 && r <= b.e_max + 1e-12);
            }
        }
    }
}
