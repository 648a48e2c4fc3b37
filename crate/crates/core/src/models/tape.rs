//! Tape-counter model.
//!
//! The counter reading n(t) of a cassette player satisfies n' = p / sqrt(b t + 1),
//! so n(t) = a (sqrt(b t + 1) - 1) with a = 2p / b. The fractional model replaces
//! n' with a Caputo derivative of order α, giving
//!
//! n(t) = p / Γ(α) ∫_0^t (t - s)^(α-1) / sqrt(b s + 1) ds.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad;
use crate::specfun::gamma;

/// Absolute tolerance for the reduced convolution integral.
const QUAD_TOL: f64 = 1e-10;
const QUAD_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapeParams {
    /// Counter rate at t = 0.
    pub p: f64,
    /// Relative growth of the reel radius per unit time.
    pub b: f64,
    /// Derivative order; ignored by the classical model.
    pub alpha: f64,
}

impl TapeParams {
    /// Amplitude a = 2p / b of the classical solution.
    pub fn amplitude(&self) -> f64 {
        2.0 * self.p / self.b
    }

    /// Parameters with the given classical amplitude a and rate b.
    pub fn from_amplitude(a: f64, b: f64) -> Self {
        TapeParams {
            p: a * b / 2.0,
            b,
            alpha: 1.0,
        }
    }

    fn validate(&self, func: &'static str, t: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(func, format!("t must be finite and non-negative, got {t}")));
        }
        if !(self.b > 0.0) {
            return Err(domain(func, format!("b must be positive, got {}", self.b)));
        }
        Ok(())
    }
}

/// a (sqrt(b t + 1) - 1), evaluated as 2 p t / (sqrt(b t + 1) + 1).
pub fn tape_classical(t: f64, theta: &TapeParams) -> Result<f64> {
    theta.validate("tape_classical", t)?;
    Ok(2.0 * theta.p * t / ((theta.b * t + 1.0).sqrt() + 1.0))
}

/// Fractional counter reading by adaptive quadrature.
pub fn tape_fractional(t: f64, theta: &TapeParams) -> Result<f64> {
    theta.validate("tape_fractional", t)?;
    let alpha = theta.alpha;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain("tape_fractional", format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // w = (t - s)^α removes the kernel singularity:
    // ∫_0^t (t-s)^(α-1) g(s) ds = (1/α) ∫_0^(t^α) g(t - w^(1/α)) dw
    let upper = t.powf(alpha);
    let inv = 1.0 / alpha;
    let integrand = |w: f64| {
        let s = (t - w.powf(inv)).max(0.0);
        1.0 / (theta.b * s + 1.0).sqrt()
    };
    let integral = quad::integrate(integrand, 0.0, upper, QUAD_TOL, QUAD_PANELS)?;
    Ok(theta.p * integral / gamma(alpha + 1.0)?)
}
