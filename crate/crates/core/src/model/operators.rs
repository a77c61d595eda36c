use crate::error::Result;

use super::{Basis, BasisIndex, ModelParams, SparseMatrix};

/// Observables available on the truncated product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// a†a
    PhotonNumber,
    /// J_z
    Jz,
    /// J₊
    JPlus,
    /// J₋
    JMinus,
    /// a
    Annihilation,
    /// N_ex = a†a + J_z + j
    Excitations,
}

/// √((j − m)(j + m + 1)) written with k = m + j.
fn j_plus_element(two_j: u32, k: u32) -> f64 {
    (((two_j - k) as f64) * (k as f64 + 1.0)).sqrt()
}

/// √((j + m)(j − m + 1)) written with k = m + j.
fn j_minus_element(two_j: u32, k: u32) -> f64 {
    ((k as f64) * ((two_j - k) as f64 + 1.0)).sqrt()
}

/// Dicke Hamiltonian with an explicit level splitting:
/// `splitting J_z + ω a†a + λ/√N (a† + a)(J₊ + J₋)`.
fn dicke_with_splitting(basis: &Basis, p: &ModelParams, splitting: f64) -> SparseMatrix {
    let two_j = basis.two_j();
    let coupling = p.lambda / (two_j as f64).sqrt();
    let mut t = Vec::with_capacity(basis.dimension() * 5);
    for (col, BasisIndex { n, k }) in basis.iter() {
        let m = k as f64 - two_j as f64 / 2.0;
        t.push((col, col, p.omega * n as f64 + splitting * m));
        if coupling == 0.0 {
            continue;
        }
        let spin_moves = [
            (k < two_j).then(|| (k + 1, j_plus_element(two_j, k))),
            (k > 0).then(|| (k - 1, j_minus_element(two_j, k))),
        ];
        for (k2, spin_amp) in spin_moves.into_iter().flatten() {
            if n < basis.n_max() {
                let row = basis.flat(BasisIndex { n: n + 1, k: k2 });
                t.push((row, col, coupling * ((n + 1) as f64).sqrt() * spin_amp));
            }
            if n > 0 {
                let row = basis.flat(BasisIndex { n: n - 1, k: k2 });
                t.push((row, col, coupling * (n as f64).sqrt() * spin_amp));
            }
        }
    }
    SparseMatrix::from_triplets(basis.dimension(), t)
}

/// H_D = ω₀ J_z + ω a†a + (λ/√N)(a† + a)(J₊ + J₋) on the truncated basis.
/// The rotation velocity in `p` is ignored.
pub fn build_dicke_hamiltonian(p: &ModelParams) -> Result<SparseMatrix> {
    let basis = Basis::new(p)?;
    Ok(dicke_with_splitting(&basis, p, p.omega0))
}

/// Co-rotating-frame Hamiltonian H_ROT = H_D + δφ J_z, i.e. the Dicke
/// Hamiltonian with ω₀ replaced by Ω = ω₀ + δφ.
pub fn build_rotated_hamiltonian(p: &ModelParams) -> Result<SparseMatrix> {
    let basis = Basis::new(p)?;
    Ok(dicke_with_splitting(&basis, p, p.big_omega()))
}

/// Diagonal operator, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    pub diagonal: Vec<f64>,
}

impl DiagonalOperator {
    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_diagonal(&self.diagonal)
    }

    /// Max-norm of the commutator [D, A]; (D A − A D)_rc = (d_r − d_c) a_rc.
    pub fn commutator_max_norm(&self, a: &SparseMatrix) -> f64 {
        a.entries()
            .map(|(r, c, v)| ((self.diagonal[r] - self.diagonal[c]) * v).abs())
            .fold(0.0, f64::max)
    }
}

/// Parity Π = exp(iπ N_ex) with eigenvalues (−1)^(n + m + j).
pub fn build_parity(p: &ModelParams) -> Result<DiagonalOperator> {
    let basis = Basis::new(p)?;
    Ok(DiagonalOperator {
        diagonal: basis.iter().map(|(_, idx)| idx.parity()).collect(),
    })
}

/// Matrix of the requested observable on the truncated basis.
pub fn build_observable(kind: Observable, p: &ModelParams) -> Result<SparseMatrix> {
    let basis = Basis::new(p)?;
    let two_j = basis.two_j();
    let dim = basis.dimension();
    let half_j = two_j as f64 / 2.0;
    let diag = |f: &dyn Fn(BasisIndex) -> f64| SparseMatrix::from_diagonal(&basis.iter().map(|(_, i)| f(i)).collect::<Vec<_>>());
    let m = match kind {
        Observable::PhotonNumber => diag(&|i| i.n as f64),
        Observable::Jz => diag(&|i| i.k as f64 - half_j),
        Observable::Excitations => diag(&|i| (i.n + i.k) as f64),
        Observable::JPlus => SparseMatrix::from_triplets(
            dim,
            basis
                .iter()
                .filter(|(_, i)| i.k < two_j)
                .map(|(c, i)| (basis.flat(BasisIndex { n: i.n, k: i.k + 1 }), c, j_plus_element(two_j, i.k)))
                .collect(),
        ),
        Observable::JMinus => SparseMatrix::from_triplets(
            dim,
            basis
                .iter()
                .filter(|(_, i)| i.k > 0)
                .map(|(c, i)| (basis.flat(BasisIndex { n: i.n, k: i.k - 1 }), c, j_minus_element(two_j, i.k)))
                .collect(),
        ),
        Observable::Annihilation => SparseMatrix::from_triplets(
            dim,
            basis
                .iter()
                .filter(|(_, i)| i.n > 0)
                .map(|(c, i)| (basis.flat(BasisIndex { n: i.n - 1, k: i.k }), c, (i.n as f64).sqrt()))
                .collect(),
        ),
    };
    Ok(m)
}
