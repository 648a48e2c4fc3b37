//! Malthusian population growth, N' = P N, and its Caputo analogue.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::{mittag_leffler, SeriesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    /// Population at t = 0.
    pub n0: f64,
    /// Growth rate per unit time.
    pub rate: f64,
    /// Derivative order; ignored by the classical model.
    pub alpha: f64,
}

fn check_time(func: &'static str, t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(func, format!("t must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// N0 e^(P t).
pub fn population_classical(t: f64, theta: &PopulationParams) -> Result<f64> {
    check_time("population_classical", t)?;
    Ok(theta.n0 * (theta.rate * t).exp())
}

/// N0 E_α(P t^α).
pub fn population_fractional(t: f64, theta: &PopulationParams, cfg: &SeriesConfig) -> Result<f64> {
    check_time("population_fractional", t)?;
    if !(theta.alpha > 0.0 && theta.alpha < 2.0) {
        return Err(domain(
            "population_fractional",
            format!("alpha must lie in (0, 2), got {}", theta.alpha),
        ));
    }
    Ok(theta.n0 * mittag_leffler(theta.alpha, theta.rate * t.powf(theta.alpha), cfg)?)
}
