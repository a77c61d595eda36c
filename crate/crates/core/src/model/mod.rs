//! Parameters, product basis, operators and Hamiltonians.

mod basis;
mod operators;
mod params;
mod sparse;

pub use basis::{Basis, BasisIndex, DEFAULT_DIMENSION_CAP};
pub use operators::{
    build_dicke_hamiltonian, build_observable, build_parity, build_rotated_hamiltonian, DiagonalOperator, Observable,
};
pub use params::ModelParams;
pub use sparse::SparseMatrix;
