//! Numerical Riemann fractional integral and Caputo derivative on uniform grids.
//!
//! Both operators integrate the weakly singular kernel exactly against a
//! piecewise interpolant of the samples: piecewise-linear `y` for the integral
//! (product trapezoidal rule, O(h^2)) and piecewise-constant `y'` for the
//! derivative (L1 scheme, O(h^(2-α))). They serve as independent checks of
//! the closed-form model solutions, not as a production solver.

use crate::error::{domain, Result};
use crate::specfun::gamma;

/// Samples of a function on the uniform grid `t_k = a + k * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    a: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(a: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !a.is_finite() {
            return Err(domain("GridFunction", format!("invalid grid a = {a}, step = {step}")));
        }
        if values.len() < 3 {
            return Err(domain(
                "GridFunction",
                format!("need at least 3 grid points, got {}", values.len()),
            ));
        }
        Ok(GridFunction { a, step, values })
    }

    /// Samples `f` on `[a, t_max]`; `(t_max - a) / step` must be (close to) an integer.
    pub fn from_fn(a: f64, t_max: f64, step: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(t_max > a) || !(step > 0.0) {
            return Err(domain("GridFunction", format!("need t_max > a and step > 0 (a = {a}, t_max = {t_max}, step = {step})")));
        }
        let intervals = ((t_max - a) / step).round();
        if ((a + intervals * step) - t_max).abs() > 1e-9 * step.max(t_max.abs() * 1e-6) {
            return Err(domain(
                "GridFunction",
                format!("[{a}, {t_max}] is not a whole number of steps of {step}"),
            ));
        }
        let n = intervals as usize;
        let values = (0..=n).map(|k| f(a + k as f64 * step)).collect();
        GridFunction::new(a, step, values)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.a + k as f64 * self.step
    }

    /// Grid index of `t`, which must lie on the grid and strictly right of `a`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let pos = (t - self.a) / self.step;
        let k = pos.round();
        if !(k >= 1.0) || k as usize >= self.values.len() || (pos - k).abs() > 1e-6 {
            return Err(domain(
                "GridFunction::index_of",
                format!("t = {t} is not a grid point in ({}, {}]", self.a, self.t_max()),
            ));
        }
        Ok(k as usize)
    }

    fn with_values(&self, values: Vec<f64>) -> GridFunction {
        GridFunction {
            a: self.a,
            step: self.step,
            values,
        }
    }
}

/// k^p ((1 + 1/k)^p - 2 + (1 - 1/k)^p), the interior product-trapezoid weight.
fn second_difference_weight(k: usize, p: f64) -> f64 {
    let kf = k as f64;
    let x = 1.0 / kf;
    kf.powf(p) * ((p * x.ln_1p()).exp_m1() + (p * (-x).ln_1p()).exp_m1())
}

/// (n-1)^p - (n-1-α) n^α with p = α + 1, the weight of the left endpoint.
fn left_endpoint_weight(n: usize, alpha: f64) -> f64 {
    let p = alpha + 1.0;
    let nf = n as f64;
    let x = 1.0 / nf;
    nf.powf(p) * ((p * (-x).ln_1p()).exp_m1() + p * x)
}

/// (k+1)^(1-α) - k^(1-α), the L1 weight.
fn l1_weight(k: usize, alpha: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    let q = 1.0 - alpha;
    kf.powf(q) * (q * (1.0 / kf).ln_1p()).exp_m1()
}

fn check_alpha_positive(func: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(func, format!("order must be positive, got {alpha}")));
    }
    Ok(())
}

fn check_alpha_unit(func: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(func, format!("order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Riemann fractional integral I^α y at the grid point `t`.
pub fn frac_integral(y: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    check_alpha_positive("frac_integral", alpha)?;
    let n = y.index_of(t)?;
    let scale = y.step.powf(alpha) / gamma(alpha + 2.0)?;
    let p = alpha + 1.0;
    let v = &y.values;
    let mut acc = left_endpoint_weight(n, alpha) * v[0] + v[n];
    for (j, yj) in v.iter().enumerate().take(n).skip(1) {
        acc += second_difference_weight(n - j, p) * yj;
    }
    Ok(scale * acc)
}

/// I^α y at every grid point (zero at `a`).
pub fn frac_integral_grid(y: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_alpha_positive("frac_integral_grid", alpha)?;
    let len = y.values.len();
    let scale = y.step.powf(alpha) / gamma(alpha + 2.0)?;
    let p = alpha + 1.0;
    let kernel: Vec<f64> = (0..len).map(|k| if k == 0 { 0.0 } else { second_difference_weight(k, p) }).collect();
    let v = &y.values;
    let mut out = vec![0.0; len];
    for n in 1..len {
        let mut acc = left_endpoint_weight(n, alpha) * v[0] + v[n];
        for j in 1..n {
            acc += kernel[n - j] * v[j];
        }
        out[n] = scale * acc;
    }
    Ok(y.with_values(out))
}

/// Caputo derivative of order α ∈ (0, 1) at the grid point `t` (L1 scheme).
pub fn caputo_derivative(y: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    check_alpha_unit("caputo_derivative", alpha)?;
    let n = y.index_of(t)?;
    let scale = y.step.powf(-alpha) / gamma(2.0 - alpha)?;
    let v = &y.values;
    let acc: f64 = (0..n).map(|j| l1_weight(n - 1 - j, alpha) * (v[j + 1] - v[j])).sum();
    Ok(scale * acc)
}

/// Caputo derivative at every grid point. The value at `a` is 0, the limit
/// for functions with bounded first derivative.
pub fn caputo_derivative_grid(y: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_alpha_unit("caputo_derivative_grid", alpha)?;
    let len = y.values.len();
    let scale = y.step.powf(-alpha) / gamma(2.0 - alpha)?;
    let weights: Vec<f64> = (0..len).map(|k| l1_weight(k, alpha)).collect();
    let diffs: Vec<f64> = y.values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![0.0; len];
    for n in 1..len {
        let acc: f64 = (0..n).map(|j| weights[n - 1 - j] * diffs[j]).sum();
        out[n] = scale * acc;
    }
    Ok(y.with_values(out))
}

/// Max over the grid of |y(t_k) - y_a - I^α[f(·, y(·))](t_k)|.
///
/// A solution of the Caputo problem D^α y = f(t, y), y(a) = y_a satisfies the
/// Volterra equation exactly, so the residual measures only the quadrature
/// error of the product trapezoidal rule. `alpha = 1` gives the ordinary
/// integral form of the classical Cauchy problem.
pub fn volterra_residual(
    model_curve: &GridFunction,
    rhs: impl Fn(f64, f64) -> f64,
    alpha: f64,
    y_a: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("volterra_residual", format!("order must lie in (0, 1], got {alpha}")));
    }
    let start = model_curve.values[0];
    if (start - y_a).abs() > 1e-12 * y_a.abs().max(1.0) {
        return Err(domain(
            "volterra_residual",
            format!("curve starts at {start}, initial condition is {y_a}"),
        ));
    }
    let forcing: Vec<f64> = model_curve
        .values
        .iter()
        .enumerate()
        .map(|(k, &yk)| rhs(model_curve.t(k), yk))
        .collect();
    let integral = frac_integral_grid(&model_curve.with_values(forcing), alpha)?;
    Ok(model_curve
        .values
        .iter()
        .zip(integral.values())
        .map(|(yk, ik)| (yk - y_a - ik).abs())
        .fold(0.0, f64::max))
}

/// Closed-form Caputo derivative of y(t) = t, t ≥ 0:
/// t^(1-α) / Γ(2-α) for α ∈ (0, 1), 1 at α = 1, and 0 for α > 1.
pub fn caputo_of_identity(alpha: f64, t: f64) -> Result<f64> {
    check_alpha_positive("caputo_of_identity", alpha)?;
    if !(t >= 0.0) {
        return Err(domain("caputo_of_identity", format!("t must be non-negative, got {t}")));
    }
    if alpha < 1.0 {
        Ok(t.powf(1.0 - alpha) / gamma(2.0 - alpha)?)
    } else if alpha == 1.0 {
        Ok(1.0)
    } else {
        Ok(0.0)
    }
}
