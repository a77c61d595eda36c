//! Dynamics of the rotationally driven Dicke model.
//!
//! The crate covers four routes to the same physics:
//!
//! * exact quantum evolution in the truncated Fock ⊗ Dicke basis, propagated
//!   with a Chebyshev expansion of the co-rotating-frame evolution operator
//!   ([`propagator`]),
//! * the classical (mean-field) limit of large spin, expressed in canonical
//!   coordinates `(Q, P, q, p)` ([`meanfield`]),
//! * evolution in the instantaneous eigenbasis with separated dynamic and
//!   geometric phases ([`geomphase`]),
//! * the isotropic quartic "Mexican hat" used as a reference model for the
//!   slowing down close to a separatrix ([`mexhat`]).
//!
//! [`experiments`] assembles those pieces into quench protocols, parameter
//! scans and the extraction of the dynamic critical line.

pub mod error;
pub mod experiments;
pub mod geomphase;
pub mod meanfield;
pub mod mexhat;
pub mod model;
pub mod ode;
pub mod propagator;
pub mod series;
pub mod specfun;
pub mod spectra;

pub use error::{DickeError, Result};
pub use model::{ModelParams, SparseMatrix};
pub use num_complex::Complex64;
pub use series::TimeSeries;
