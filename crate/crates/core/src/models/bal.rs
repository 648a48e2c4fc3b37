//! Two-compartment blood alcohol model: stomach concentration A, blood
//! concentration B.
//!
//! Classical system: A' = -k1 A, B' = k1 A - k2 B, A(0) = A0, B(0) = 0.
//! The fractional system replaces both derivatives with Caputo derivatives of
//! orders α and β. Its stomach component is A0 E_α(-k1 t^α) and its blood
//! component is the double series
//!
//! B(t) = k1 A0 Σ_m Σ_n (-k1)^m (-k2)^n t^(mα + nβ + β) / Γ(nβ + β + mα + 1).

use std::cell::RefCell;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::dd::{self, Dd};
use crate::specfun::{mittag_leffler, SeriesConfig, DIRECT_LOG_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalParams {
    /// Ingested alcohol (initial stomach concentration).
    pub a0: f64,
    /// Stomach absorption rate, 1/min.
    pub k1: f64,
    /// Blood elimination rate, 1/min.
    pub k2: f64,
    /// Order of the stomach equation (1 for the classical model).
    pub alpha: f64,
    /// Order of the blood equation (1 for the classical model).
    pub beta: f64,
}

impl BalParams {
    pub fn classical(a0: f64, k1: f64, k2: f64) -> Self {
        BalParams {
            a0,
            k1,
            k2,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    fn validate(&self, func: &'static str) -> Result<()> {
        if !(self.a0 > 0.0 && self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(domain(
                func,
                format!("A0, k1, k2 must be positive, got ({}, {}, {})", self.a0, self.k1, self.k2),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0 && self.beta > 0.0 && self.beta < 2.0) {
            return Err(domain(
                func,
                format!("orders must lie in (0, 2), got alpha = {}, beta = {}", self.alpha, self.beta),
            ));
        }
        Ok(())
    }
}

fn check_time(func: &'static str, t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(func, format!("t must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// A0 e^(-k1 t).
pub fn bal_classical_a(t: f64, theta: &BalParams) -> Result<f64> {
    check_time("bal_classical_a", t)?;
    Ok(theta.a0 * (-theta.k1 * t).exp())
}

/// A0 k1 / (k2 - k1) (e^(-k1 t) - e^(-k2 t)).
pub fn bal_classical_b(t: f64, theta: &BalParams) -> Result<f64> {
    check_time("bal_classical_b", t)?;
    let diff = theta.k2 - theta.k1;
    if diff.abs() < 1e-12 {
        return Err(Error::Degenerate(format!(
            "k1 = {} and k2 = {} coincide; the closed form is singular",
            theta.k1, theta.k2
        )));
    }
    // factor out the slower exponential so neither factor overflows
    let gap = if diff > 0.0 {
        -(-theta.k1 * t).exp() * (-diff * t).exp_m1()
    } else {
        (-theta.k2 * t).exp() * (diff * t).exp_m1()
    };
    Ok(theta.a0 * theta.k1 / diff * gap)
}

/// A0 E_α(-k1 t^α).
pub fn bal_fractional_a(t: f64, theta: &BalParams, cfg: &SeriesConfig) -> Result<f64> {
    check_time("bal_fractional_a", t)?;
    theta.validate("bal_fractional_a")?;
    Ok(theta.a0 * mittag_leffler(theta.alpha, -theta.k1 * t.powf(theta.alpha), cfg)?)
}

/// Blood component of the fractional system, truncated at
/// `cfg.double_series_order` in both indices.
pub fn bal_fractional_b(t: f64, theta: &BalParams, cfg: &SeriesConfig) -> Result<f64> {
    Ok(bal_fractional_b_many(&[t], theta, cfg)?[0])
}

/// [`bal_fractional_b`] at several times, sharing the reciprocal-Gamma table.
pub fn bal_fractional_b_many(ts: &[f64], theta: &BalParams, cfg: &SeriesConfig) -> Result<Vec<f64>> {
    theta.validate("bal_fractional_b")?;
    cfg.validate()?;
    for &t in ts {
        check_time("bal_fractional_b", t)?;
    }
    let series = DoubleSeries::cached(theta.alpha, theta.beta, cfg.double_series_order);
    ts.iter().map(|&t| series.evaluate(t, theta)).collect()
}

const CACHE_SLOTS: usize = 4;

thread_local! {
    /// Recently built tables, most recent last. A finite-difference Jacobian
    /// revisits the same orders for every rate and amplitude column.
    static TABLES: RefCell<Vec<Rc<DoubleSeries>>> = const { RefCell::new(Vec::new()) };
}

/// Reciprocal Gamma values 1/Γ(mα + nβ + β + 1) for 0 ≤ m, n ≤ order.
struct DoubleSeries {
    order: usize,
    alpha: f64,
    beta: f64,
    /// Double-double 1/Γ, zero where it would underflow.
    rgamma: Vec<Dd>,
    /// f64 ln(1/Γ), used to decide how each term is formed.
    ln_rgamma: Vec<f64>,
}

impl DoubleSeries {
    fn cached(alpha: f64, beta: f64, order: usize) -> Rc<DoubleSeries> {
        TABLES.with(|cell| {
            let mut tables = cell.borrow_mut();
            let hit = tables
                .iter()
                .position(|s| s.order == order && s.alpha.to_bits() == alpha.to_bits() && s.beta.to_bits() == beta.to_bits());
            let series = match hit {
                Some(i) => tables.remove(i),
                None => Rc::new(DoubleSeries::new(alpha, beta, order)),
            };
            if tables.len() == CACHE_SLOTS {
                tables.remove(0);
            }
            tables.push(Rc::clone(&series));
            series
        })
    }

    fn new(alpha: f64, beta: f64, order: usize) -> Self {
        let side = order + 1;
        let mut rgamma = Vec::with_capacity(side * side);
        let mut ln_rgamma = Vec::with_capacity(side * side);
        for m in 0..side {
            for n in 0..side {
                let x = Self::gamma_arg(alpha, beta, m, n);
                let lr = -crate::specfun::ln_gamma(x.hi).unwrap_or(f64::INFINITY);
                ln_rgamma.push(lr);
                rgamma.push(if lr > -DIRECT_LOG_LIMIT { dd::rgamma(x) } else { Dd::ZERO });
            }
        }
        DoubleSeries {
            order,
            alpha,
            beta,
            rgamma,
            ln_rgamma,
        }
    }

    /// mα + (n+1)β + 1, formed exactly in double-double.
    fn gamma_arg(alpha: f64, beta: f64, m: usize, n: usize) -> Dd {
        Dd::prod(alpha, m as f64) + Dd::prod(beta, (n + 1) as f64) + Dd::ONE
    }

    fn evaluate(&self, t: f64, theta: &BalParams) -> Result<f64> {
        if t == 0.0 {
            // every exponent mα + nβ + β is positive
            return Ok(0.0);
        }
        let side = self.order + 1;
        let ln_t = Dd::from_f64(t).ln();
        // log of k1 t^α, k2 t^β and t^β
        let ln_u = Dd::from_f64(theta.k1).ln() + ln_t.mul_f64(self.alpha);
        let ln_v = Dd::from_f64(theta.k2).ln() + ln_t.mul_f64(self.beta);
        let ln_w = ln_t.mul_f64(self.beta);
        let (lu, lv, lw) = (ln_u.to_f64(), ln_v.to_f64(), ln_w.to_f64());

        let within = |x: f64| x.abs() <= DIRECT_LOG_LIMIT;
        let rows: Vec<Option<Dd>> = (0..side)
            .map(|m| {
                let l = m as f64 * lu + lw;
                within(l).then(|| (ln_u.mul_f64(m as f64) + ln_w).exp())
            })
            .collect();
        let cols: Vec<Option<Dd>> = (0..side)
            .map(|n| within(n as f64 * lv).then(|| ln_v.mul_f64(n as f64).exp()))
            .collect();

        let mut sum = Dd::ZERO;
        for m in 0..side {
            for n in 0..side {
                let idx = m * side + n;
                let row_log = m as f64 * lu + lw + self.ln_rgamma[idx];
                let log_term = row_log + n as f64 * lv;
                if log_term > 709.0 {
                    return Err(Error::Overflow(format!(
                        "double-series term (m = {m}, n = {n}) at t = {t} has log magnitude {log_term:.1}"
                    )));
                }
                if log_term < -745.0 {
                    continue;
                }
                let fast = match (rows[m], cols[n]) {
                    (Some(r), Some(c)) if within(row_log) && self.rgamma[idx].hi != 0.0 => {
                        Some(r * self.rgamma[idx] * c)
                    }
                    _ => None,
                };
                let term = fast.unwrap_or_else(|| {
                    let x = Self::gamma_arg(self.alpha, self.beta, m, n);
                    (ln_u.mul_f64(m as f64) + ln_v.mul_f64(n as f64) + ln_w - dd::ln_gamma(x)).exp()
                });
                sum = if (m + n) % 2 == 1 { sum - term } else { sum + term };
            }
        }
        Ok((sum.mul_f64(theta.k1).mul_f64(theta.a0)).to_f64())
    }
}
