//! Box-constrained Levenberg-Marquardt least squares and multistart search.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::TimeSeries;
use crate::error::{domain, Error, Result};
use crate::models::ModelSpec;

/// Parameter values with their names and boxes, in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl ParamVector {
    /// Checks length and that every free value lies in its box.
    pub fn new(model: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.params.len() {
            return Err(Error::Param(format!(
                "{} takes {} parameters, got {}",
                model.name(),
                model.params.len(),
                values.len()
            )));
        }
        for (p, v) in model.params.iter().zip(&values) {
            if p.is_free() && !(p.lower <= *v && *v <= p.upper) {
                return Err(Error::Param(format!(
                    "{} = {v} is outside [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
        }
        Ok(ParamVector {
            names: model.params.iter().map(|p| p.name.clone()).collect(),
            bounds: model.params.iter().map(|p| (p.lower, p.upper)).collect(),
            values,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Projected gradient below `gtol`.
    Gradient,
    /// Accepted step reduced the SSE by less than `ftol` relative.
    RelativeReduction,
    /// No damping produced a decrease; the point is stationary to working precision.
    Stagnation,
    MaxIterations,
}

impl Termination {
    pub fn converged(self) -> bool {
        !matches!(self, Termination::MaxIterations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub best_params: ParamVector,
    pub sse: f64,
    /// Observed minus predicted.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub start_point: ParamVector,
    /// Position of the winning start in the multistart sequence.
    pub start_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iter: usize,
    pub gtol: f64,
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 500,
            gtol: 1e-8,
            ftol: 1e-12,
        }
    }
}

/// Σ (y_i - M(t_i; θ))².
pub fn sse(model: &ModelSpec, theta: &[f64], data: &TimeSeries) -> Result<f64> {
    Ok(residuals(model, theta, data)?.iter().map(|r| r * r).sum())
}

fn residuals(model: &ModelSpec, theta: &[f64], data: &TimeSeries) -> Result<Vec<f64>> {
    let predicted = model.evaluate_many(&data.times(), theta)?;
    let out: Vec<f64> = data.values().iter().zip(&predicted).map(|(y, m)| y - m).collect();
    if out.iter().any(|r| !r.is_finite()) {
        return Err(Error::Overflow(format!("{} produced a non-finite prediction", model.name())));
    }
    Ok(out)
}

/// |E_classical - E_fractional| / E_classical.
pub fn efficiency_gain(e_classical: f64, e_fractional: f64) -> Result<f64> {
    if !(e_classical > 0.0) || !(e_fractional >= 0.0) {
        return Err(domain(
            "efficiency_gain",
            format!("need e_classical > 0 and e_fractional >= 0, got {e_classical}, {e_fractional}"),
        ));
    }
    Ok(((e_classical - e_fractional) / e_classical).abs())
}

struct Problem<'a> {
    model: &'a ModelSpec,
    times: Vec<f64>,
    free: Vec<usize>,
}

impl Problem<'_> {
    fn predict(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let m = self.model.evaluate_many(&self.times, theta)?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!("{} produced a non-finite prediction", self.model.name())));
        }
        Ok(m)
    }

    /// Forward-difference Jacobian of the predictions over the free parameters.
    /// Steps that would leave the box are taken backwards instead.
    fn jacobian(&self, theta: &[f64], base: &[f64]) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(base.len(), self.free.len());
        for (col, &j) in self.free.iter().enumerate() {
            let p = &self.model.params[j];
            let h = (1e-7 * theta[j].abs()).max(1e-7);
            let step = if theta[j] + h <= p.upper { h } else { -h };
            let mut shifted = theta.to_vec();
            shifted[j] += step;
            let actual = shifted[j] - theta[j];
            let m = self.predict(&shifted)?;
            for i in 0..base.len() {
                jac[(i, col)] = (m[i] - base[i]) / actual;
            }
        }
        Ok(jac)
    }

    fn project(&self, theta: &mut [f64]) {
        for &j in &self.free {
            let p = &self.model.params[j];
            theta[j] = theta[j].clamp(p.lower, p.upper);
        }
    }

    /// Max-norm of the SSE gradient with components that push against an
    /// active bound removed.
    fn projected_gradient_norm(&self, theta: &[f64], grad: &DVector<f64>) -> f64 {
        self.free
            .iter()
            .zip(grad.iter())
            .map(|(&j, &g)| {
                let p = &self.model.params[j];
                let blocked = (theta[j] <= p.lower && g > 0.0) || (theta[j] >= p.upper && g < 0.0);
                if blocked {
                    0.0
                } else {
                    g.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Levenberg-Marquardt from `start` (full parameter vector; fixed entries are
/// replaced by their fixed values).
pub fn lm_fit(model: &ModelSpec, start: &[f64], data: &TimeSeries, opts: &LmOptions) -> Result<FitResult> {
    model.validate()?;
    let mut theta = start.to_vec();
    for (v, p) in theta.iter_mut().zip(&model.params) {
        if let Some(f) = p.fixed {
            *v = f;
        }
    }
    let start_point = ParamVector::new(model, theta.clone())?;
    let problem = Problem {
        model,
        times: data.times(),
        free: (0..model.params.len()).filter(|&j| model.params[j].is_free()).collect(),
    };
    let y = DVector::from_vec(data.values());

    let mut pred = problem.predict(&theta)?;
    let mut r = &y - DVector::from_column_slice(&pred);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;

    let termination = 'outer: loop {
        if problem.free.is_empty() || cost == 0.0 {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let jac = problem.jacobian(&theta, &pred)?;
        let jtr = jac.tr_mul(&r);
        // d SSE / d θ = -2 J^T r
        let grad = &jtr * -2.0;
        if problem.projected_gradient_norm(&theta, &grad) < opts.gtol {
            break Termination::Gradient;
        }
        let jtj = jac.tr_mul(&jac);
        let max_diag = jtj.diagonal().max();
        let scale: Vec<f64> = jtj.diagonal().iter().map(|d| d.max(1e-12 * max_diag).max(f64::MIN_POSITIVE)).collect();

        loop {
            let mut damped = jtj.clone();
            for (k, s) in scale.iter().enumerate() {
                damped[(k, k)] += lambda * s;
            }
            let step = damped.cholesky().map(|c| c.solve(&jtr));
            if let Some(step) = step {
                let mut trial = theta.clone();
                for (k, &j) in problem.free.iter().enumerate() {
                    trial[j] += step[k];
                }
                problem.project(&mut trial);
                if trial == theta {
                    break 'outer Termination::Stagnation;
                }
                if let Ok(trial_pred) = problem.predict(&trial) {
                    let trial_r = &y - DVector::from_column_slice(&trial_pred);
                    let trial_cost = trial_r.norm_squared();
                    if trial_cost < cost {
                        let reduction = (cost - trial_cost) / cost;
                        theta = trial;
                        pred = trial_pred;
                        r = trial_r;
                        cost = trial_cost;
                        lambda = (lambda / 10.0).max(1e-12);
                        if reduction < opts.ftol {
                            break 'outer Termination::RelativeReduction;
                        }
                        break;
                    }
                }
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break 'outer Termination::Stagnation;
            }
        }
    };

    Ok(FitResult {
        best_params: ParamVector::new(model, theta)?,
        sse: cost,
        residuals: r.iter().copied().collect(),
        iterations,
        converged: termination.converged(),
        termination,
        start_point,
        start_index: 0,
    })
}

/// Latin-hypercube start points over each free parameter's start range.
pub fn latin_hypercube_starts(model: &ModelSpec, n_starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = (0..n_starts).map(|_| model.default_start()).collect();
    for (j, p) in model.params.iter().enumerate() {
        if !p.is_free() {
            continue;
        }
        let lo = p.start_range.0.clamp(p.lower, p.upper);
        let hi = p.start_range.1.clamp(p.lower, p.upper);
        let mut strata: Vec<usize> = (0..n_starts).collect();
        // Fisher-Yates
        for i in (1..n_starts).rev() {
            strata.swap(i, rng.random_range(0..=i));
        }
        for (start, stratum) in starts.iter_mut().zip(strata) {
            let u = (stratum as f64 + rng.random::<f64>()) / n_starts as f64;
            let v = if p.log_scale && lo > 0.0 {
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            } else {
                lo + u * (hi - lo)
            };
            start[j] = v.clamp(p.lower, p.upper);
        }
    }
    starts
}

/// Runs [`lm_fit`] from `n_starts` seeded Latin-hypercube points and keeps the
/// lowest SSE (earliest start on ties). Starts run in parallel.
pub fn multistart_fit(
    model: &ModelSpec,
    data: &TimeSeries,
    n_starts: usize,
    seed: u64,
    opts: &LmOptions,
) -> Result<FitResult> {
    if n_starts == 0 {
        return Err(Error::Config("n_starts must be at least 1".into()));
    }
    let starts = latin_hypercube_starts(model, n_starts, seed);
    let results: Vec<Result<FitResult>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            lm_fit(model, s, data, opts).map(|mut f| {
                f.start_index = i;
                f
            })
        })
        .collect();

    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(f) if f.sse.is_finite() => {
                if best.as_ref().is_none_or(|b| f.sse < b.sse) {
                    best = Some(f);
                }
            }
            Ok(f) => last_err = Some(Error::Overflow(format!("start {} ended with SSE {}", f.start_index, f.sse))),
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| Error::AllStartsFailed {
        starts: n_starts,
        last: Box::new(last_err.expect("at least one start ran")),
    })
}
