//! Logistic link and its derivatives.
//!
//! All functions are evaluated in a form that never overflows: `exp` is only
//! ever applied to a non-positive argument.

/// Logistic function `1 / (1 + e^{-z})`.
#[inline]
pub fn mu(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic variance `mu(z) (1 - mu(z))`, maximal (1/4) at zero.
///
/// Computed as `mu(z) mu(-z)` so the tails keep full relative precision.
#[inline]
pub fn mudot(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `log mu(z)`.
#[inline]
pub fn log_mu(z: f64) -> f64 {
    -softplus(-z)
}

/// `log(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Inverse of [`mu`]. Returns `±inf` at 0 and 1.
#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
