use crate::error::{DickeError, Result};

use super::ModelParams;

/// Default cap on the product-basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 22;

/// One product state |n⟩ ⊗ |j, m⟩.
///
/// `k = m + j` runs over `0..=2j`, so all quantum numbers stay integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub n: u32,
    pub k: u32,
}

impl BasisIndex {
    /// Magnetic quantum number m = k − j.
    pub fn m(&self, two_j: u32) -> f64 {
        self.k as f64 - two_j as f64 / 2.0
    }

    /// Excitation number n + m + j.
    pub fn excitations(&self) -> u32 {
        self.n + self.k
    }

    /// Parity eigenvalue exp(iπ(n + m + j)) = ±1.
    pub fn parity(&self) -> f64 {
        if self.excitations() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Boson-major product basis: flat = n (2j + 1) + (m + j).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    two_j: u32,
    n_max: u32,
}

impl Basis {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Self::with_cap(p, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(p: &ModelParams, cap: usize) -> Result<Self> {
        let dimension = (p.n_max as usize + 1)
            .checked_mul(p.two_j as usize + 1)
            .unwrap_or(usize::MAX);
        if dimension > cap {
            return Err(DickeError::DimensionOverflow { dimension, cap });
        }
        Ok(Basis {
            two_j: p.two_j,
            n_max: p.n_max,
        })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn spin_states(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn dimension(&self) -> usize {
        (self.n_max as usize + 1) * self.spin_states()
    }

    pub fn flat(&self, idx: BasisIndex) -> usize {
        debug_assert!(idx.n <= self.n_max && idx.k <= self.two_j);
        idx.n as usize * self.spin_states() + idx.k as usize
    }

    pub fn index(&self, flat: usize) -> BasisIndex {
        let s = self.spin_states();
        BasisIndex {
            n: (flat / s) as u32,
            k: (flat % s) as u32,
        }
    }

    /// Flat index of (n, m); `None` if out of range or m is not a valid
    /// projection for this j.
    pub fn flat_nm(&self, n: u32, m: f64) -> Option<usize> {
        let k = m + self.two_j as f64 / 2.0;
        if n > self.n_max || k < 0.0 || k.fract() != 0.0 || k > self.two_j as f64 {
            return None;
        }
        Some(self.flat(BasisIndex { n, k: k as u32 }))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, BasisIndex)> + '_ {
        (0..self.dimension()).map(move |f| (f, self.index(f)))
    }
}
