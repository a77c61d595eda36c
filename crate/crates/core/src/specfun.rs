//! Bessel functions of integer order and complete elliptic integrals.

use std::f64::consts::PI;

use crate::error::{DickeError, Result};

const RESCALE_ABOVE: f64 = 1e250;

/// J_0(x), …, J_{k_max}(x) for x ≥ 0.
///
/// Miller's backward recurrence J_{k−1} = (2k/x) J_k − J_{k+1}, normalized
/// with J_0 + 2 Σ_{k≥1} J_{2k} = 1.
pub fn bessel_j_array(x: f64, k_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_array needs a finite x >= 0, got {x}");
    let mut out = vec![0.0; k_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // The recurrence is only stable downwards from well above max(k, x).
    let top = k_max.max(x.ceil() as usize);
    let mut start = top + (10.0 + 2.0 * ((top as f64) * x).sqrt()).ceil() as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k, arbitrary scale
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= k_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in &mut out {
        *v /= norm;
    }
    out
}

fn agm_k_e(kprime: f64, kappa: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = kprime;
    let mut c = kappa;
    let mut weight = 0.5; // 2^{n−1}
    let mut sum = weight * c * c;
    for _ in 0..40 {
        if c.abs() <= 1e-16 * a {
            break;
        }
        let a_next = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = a_next;
        weight *= 2.0;
        sum += weight * c * c;
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Complete elliptic integrals (K(κ), E(κ)) of modulus κ ∈ [0, 1) via the
/// arithmetic-geometric mean.
pub fn elliptic_ke(kappa: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(DickeError::InvalidParameter(format!("elliptic modulus {kappa} outside [0, 1)")));
    }
    Ok(agm_k_e(((1.0 - kappa) * (1.0 + kappa)).sqrt(), kappa))
}

/// Same as [`elliptic_ke`] but parametrized by the complementary modulus
/// κ' = √(1 − κ²), which keeps full accuracy as κ → 1.
pub fn elliptic_ke_complementary(kprime: f64) -> Result<(f64, f64)> {
    if !(kprime > 0.0 && kprime <= 1.0) {
        return Err(DickeError::InvalidParameter(format!("complementary modulus {kprime} outside (0, 1]")));
    }
    let kappa = ((1.0 - kprime) * (1.0 + kprime)).sqrt();
    Ok(agm_k_e(kprime, kappa))
}

pub fn elliptic_k(kappa: f64) -> Result<f64> {
    elliptic_ke(kappa).map(|(k, _)| k)
}

/// E(κ) on the closed interval [0, 1]; E(1) = 1.
pub fn elliptic_e(kappa: f64) -> Result<f64> {
    if kappa == 1.0 {
        return Ok(1.0);
    }
    elliptic_ke(kappa).map(|(_, e)| e)
}
