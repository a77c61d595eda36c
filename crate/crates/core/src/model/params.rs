use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

/// Physical and truncation parameters of the driven Dicke model (ħ = 1).
///
/// The spin length is stored doubled (`two_j = 2j = N`) so half-integer
/// values never go through float comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    /// Photon frequency ω.
    pub omega: f64,
    /// Atomic level splitting ω₀.
    pub omega0: f64,
    /// Light-matter coupling λ.
    pub lambda: f64,
    /// Rotation velocity δφ of the drive.
    pub delta_phi: f64,
    /// Twice the spin length, i.e. the number of two-level atoms.
    pub two_j: u32,
    /// Boson truncation n_M (largest kept Fock state).
    pub n_max: u32,
}

/// Serialized form: `j` as a plain number (0.5, 1, 1.5, ...).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    omega: f64,
    omega0: f64,
    lambda: f64,
    delta_phi: f64,
    j: f64,
    n_max: u32,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = DickeError;

    fn try_from(raw: RawParams) -> Result<Self> {
        let two_j = 2.0 * raw.j;
        if !(two_j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0 && two_j <= u32::MAX as f64) {
            return Err(DickeError::InvalidParameter(format!(
                "j = {} is not a positive integer or half-integer",
                raw.j
            )));
        }
        ModelParams::new(raw.omega, raw.omega0, raw.lambda, raw.delta_phi, two_j as u32, raw.n_max)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            omega: p.omega,
            omega0: p.omega0,
            lambda: p.lambda,
            delta_phi: p.delta_phi,
            j: p.j(),
            n_max: p.n_max,
        }
    }
}

impl ModelParams {
    pub fn new(omega: f64, omega0: f64, lambda: f64, delta_phi: f64, two_j: u32, n_max: u32) -> Result<Self> {
        let p = ModelParams {
            omega,
            omega0,
            lambda,
            delta_phi,
            two_j,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant parameters ω = ω₀ = 1 used throughout the reference runs.
    pub fn resonant(lambda: f64, delta_phi: f64, two_j: u32, n_max: u32) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, delta_phi, two_j, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(DickeError::InvalidParameter(what.to_string()));
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return bad("omega must be positive");
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return bad("omega0 must be non-negative");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !self.delta_phi.is_finite() {
            return bad("delta_phi must be finite");
        }
        if self.two_j == 0 {
            return bad("j must be at least 1/2");
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta_phi(mut self, delta_phi: f64) -> Self {
        self.delta_phi = delta_phi;
        self
    }

    /// Spin length j = N/2.
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Number of two-level atoms N = 2j.
    pub fn n_atoms(&self) -> u32 {
        self.two_j
    }

    /// Renormalized level splitting Ω = ω₀ + δφ of the co-rotating frame.
    pub fn big_omega(&self) -> f64 {
        self.omega0 + self.delta_phi
    }

    /// Critical coupling of the undriven model, √(ω ω₀)/2.
    pub fn lambda_c0(&self) -> f64 {
        (self.omega * self.omega0).sqrt() / 2.0
    }

    /// Critical coupling in the co-rotating frame, √(ω Ω)/2.
    pub fn lambda_c(&self) -> f64 {
        (self.omega * self.big_omega()).max(0.0).sqrt() / 2.0
    }

    /// Period of one revolution T_φ = 2π/δφ. Without drive the photon
    /// period 2π/ω is used as the natural time unit instead.
    pub fn drive_period(&self) -> f64 {
        if self.delta_phi != 0.0 {
            2.0 * PI / self.delta_phi.abs()
        } else {
            2.0 * PI / self.omega
        }
    }

    /// Number of spin states 2j + 1.
    pub fn spin_states(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Product-basis dimension (n_M + 1)(2j + 1).
    pub fn dimension(&self) -> usize {
        (self.n_max as usize + 1) * self.spin_states()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_couplings() {
        let p = ModelParams::resonant(0.9, 1.0, 20, 60).unwrap();
        assert_eq!(p.big_omega(), 2.0);
        assert_eq!(p.lambda_c0(), 0.5);
        assert!((p.lambda_c() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(p.lambda_c() >= p.lambda_c0());
        assert_eq!(p.dimension(), 21 * 61);
    }

    #[test]
    fn json_uses_plain_spin_length() {
        let p: ModelParams = serde_json::from_str(
            r#"{"omega":1,"omega0":1,"lambda":0.5,"delta_phi":1,"j":1.5,"n_max":4}"#,
        )
        .unwrap();
        assert_eq!(p.two_j, 3);
        let back = serde_json::to_value(p).unwrap();
        assert_eq!(back["j"], 1.5);
        let err = serde_json::from_str::<ModelParams>(
            r#"{"omega":1,"omega0":1,"lambda":0.5,"delta_phi":1,"j":0.7,"n_max":4}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.0, 2, 3).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 0.0, 2, 3).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.0, 2, 3).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 0.0, 0, 3).is_err());
    }
}
