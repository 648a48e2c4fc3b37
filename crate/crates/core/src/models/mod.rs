//! Model registry.
//!
//! Each model is addressed by name and evaluated on a flat parameter slice in
//! the order given by [`ModelSpec::params`].

mod bal;
mod population;
mod tape;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bal::{bal_classical_a, bal_classical_b, bal_fractional_a, bal_fractional_b, bal_fractional_b_many, BalParams};
pub use population::{population_classical, population_fractional, PopulationParams};
pub use tape::{tape_classical, tape_fractional, TapeParams};

use crate::error::{Error, Result};
use crate::specfun::SeriesConfig;

const ORDER_BOUNDS: (f64, f64) = (0.05, 1.95);
const POSITIVE_BOUNDS: (f64, f64) = (1e-6, 1e4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PopulationClassical,
    PopulationFractional,
    BalClassical,
    BalFractional,
    TapeClassical,
    TapeFractional,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::PopulationClassical,
        ModelKind::PopulationFractional,
        ModelKind::BalClassical,
        ModelKind::BalFractional,
        ModelKind::TapeClassical,
        ModelKind::TapeFractional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PopulationClassical => "population-classical",
            ModelKind::PopulationFractional => "population-fractional",
            ModelKind::BalClassical => "bal-classical",
            ModelKind::BalFractional => "bal-fractional",
            ModelKind::TapeClassical => "tape-classical",
            ModelKind::TapeFractional => "tape-fractional",
        }
    }

    pub fn is_fractional(self) -> bool {
        matches!(
            self,
            ModelKind::PopulationFractional | ModelKind::BalFractional | ModelKind::TapeFractional
        )
    }

    /// The classical model of the same family.
    pub fn classical(self) -> ModelKind {
        match self {
            ModelKind::PopulationClassical | ModelKind::PopulationFractional => ModelKind::PopulationClassical,
            ModelKind::BalClassical | ModelKind::BalFractional => ModelKind::BalClassical,
            ModelKind::TapeClassical | ModelKind::TapeFractional => ModelKind::TapeClassical,
        }
    }

    /// The fractional model of the same family.
    pub fn fractional(self) -> ModelKind {
        match self {
            ModelKind::PopulationClassical | ModelKind::PopulationFractional => ModelKind::PopulationFractional,
            ModelKind::BalClassical | ModelKind::BalFractional => ModelKind::BalFractional,
            ModelKind::TapeClassical | ModelKind::TapeFractional => ModelKind::TapeFractional,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// One model parameter with its box constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Held at this value during fitting.
    pub fixed: Option<f64>,
    /// Range sampled for multistart initial points (clipped to the bounds).
    pub start_range: (f64, f64),
    /// Sample the start range log-uniformly.
    pub log_scale: bool,
}

impl ParamDef {
    fn free(name: &str, bounds: (f64, f64), start_range: (f64, f64), log_scale: bool) -> Self {
        ParamDef {
            name: name.to_string(),
            lower: bounds.0,
            upper: bounds.1,
            fixed: None,
            start_range,
            log_scale,
        }
    }

    fn order(name: &str, start_range: (f64, f64)) -> Self {
        ParamDef::free(name, ORDER_BOUNDS, start_range, false)
    }

    fn positive(name: &str, start_range: (f64, f64)) -> Self {
        ParamDef::free(name, POSITIVE_BOUNDS, start_range, true)
    }

    pub fn is_free(&self) -> bool {
        self.fixed.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: Vec<ParamDef>,
    pub series: SeriesConfig,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        let params = match kind {
            ModelKind::PopulationClassical => vec![n0_fixed(), rate()],
            ModelKind::PopulationFractional => {
                vec![n0_fixed(), rate(), ParamDef::order("alpha", (0.5, 1.8))]
            }
            ModelKind::BalClassical => vec![a0(), k1(), k2()],
            ModelKind::BalFractional => vec![
                a0(),
                k1(),
                k2(),
                ParamDef::order("alpha", (0.5, 1.5)),
                ParamDef::order("beta", (0.5, 1.5)),
            ],
            ModelKind::TapeClassical => vec![tape_p(), tape_b()],
            ModelKind::TapeFractional => vec![tape_p(), tape_b(), ParamDef::order("alpha", (0.5, 1.5))],
        };
        ModelSpec {
            kind,
            params,
            series: SeriesConfig::default(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(ModelSpec::new(name.parse()?))
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn with_series(mut self, series: SeriesConfig) -> Self {
        self.series = series;
        self
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.params
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::Param(format!("{} has no parameter {name:?}", self.name())))
    }

    /// Replaces the box of one parameter.
    pub fn set_bounds(&mut self, name: &str, lower: f64, upper: f64) -> Result<()> {
        let i = self.param_index(name)?;
        let mut next = self.clone();
        next.params[i].lower = lower;
        next.params[i].upper = upper;
        next.validate()?;
        *self = next;
        Ok(())
    }

    /// Fixes (`Some`) or frees (`None`) one parameter.
    pub fn set_fixed(&mut self, name: &str, value: Option<f64>) -> Result<()> {
        let i = self.param_index(name)?;
        let mut next = self.clone();
        next.params[i].fixed = value;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.params {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(Error::Config(format!(
                    "{}: bounds of {} must be finite with lower < upper, got [{}, {}]",
                    self.name(),
                    p.name,
                    p.lower,
                    p.upper
                )));
            }
            if let Some(v) = p.fixed {
                if !v.is_finite() {
                    return Err(Error::Config(format!("{}: fixed {} is not finite", self.name(), p.name)));
                }
            }
        }
        self.series.validate()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.params.len() {
            return Err(Error::Param(format!(
                "{} takes {} parameters ({}), got {}",
                self.name(),
                self.params.len(),
                self.param_names().join(", "),
                theta.len()
            )));
        }
        if let Some(bad) = theta.iter().position(|v| !v.is_finite()) {
            return Err(Error::Param(format!("{} is not finite", self.params[bad].name)));
        }
        Ok(())
    }

    /// Model value at one time.
    pub fn evaluate(&self, t: f64, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate_many(&[t], theta)?[0])
    }

    /// Model values at several times.
    pub fn evaluate_many(&self, ts: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        let cfg = &self.series;
        match self.kind {
            ModelKind::PopulationClassical => {
                let p = PopulationParams {
                    n0: theta[0],
                    rate: theta[1],
                    alpha: 1.0,
                };
                ts.iter().map(|&t| population_classical(t, &p)).collect()
            }
            ModelKind::PopulationFractional => {
                let p = PopulationParams {
                    n0: theta[0],
                    rate: theta[1],
                    alpha: theta[2],
                };
                ts.iter().map(|&t| population_fractional(t, &p, cfg)).collect()
            }
            ModelKind::BalClassical => {
                let p = BalParams::classical(theta[0], theta[1], theta[2]);
                ts.iter().map(|&t| bal_classical_b(t, &p)).collect()
            }
            ModelKind::BalFractional => {
                let p = BalParams {
                    a0: theta[0],
                    k1: theta[1],
                    k2: theta[2],
                    alpha: theta[3],
                    beta: theta[4],
                };
                bal_fractional_b_many(ts, &p, cfg)
            }
            ModelKind::TapeClassical => {
                let p = TapeParams {
                    p: theta[0],
                    b: theta[1],
                    alpha: 1.0,
                };
                ts.iter().map(|&t| tape_classical(t, &p)).collect()
            }
            ModelKind::TapeFractional => {
                let p = TapeParams {
                    p: theta[0],
                    b: theta[1],
                    alpha: theta[2],
                };
                ts.iter().map(|&t| tape_fractional(t, &p)).collect()
            }
        }
    }

    /// Start point for single-start runs: the reference classical estimates,
    /// with fractional orders at 1.05.
    pub fn default_start(&self) -> Vec<f64> {
        let classical: &[f64] = match self.kind.classical() {
            ModelKind::PopulationClassical => &[1750.0, 1.3501e-2],
            ModelKind::BalClassical => &[245.8769, 0.109456, 0.017727],
            _ => &[988.1532 * 0.0219 / 2.0, 0.0219],
        };
        let mut start = classical.to_vec();
        start.resize(self.params.len(), 1.05);
        for (v, p) in start.iter_mut().zip(&self.params) {
            *v = p.fixed.unwrap_or_else(|| v.clamp(p.lower, p.upper));
        }
        start
    }
}

fn n0_fixed() -> ParamDef {
    ParamDef {
        fixed: Some(1750.0),
        ..ParamDef::positive("N0", (1000.0, 3000.0))
    }
}

fn rate() -> ParamDef {
    ParamDef::positive("P", (1e-4, 0.1))
}

fn a0() -> ParamDef {
    ParamDef::positive("A0", (50.0, 1000.0))
}

fn k1() -> ParamDef {
    ParamDef::positive("k1", (5e-3, 0.5))
}

fn k2() -> ParamDef {
    ParamDef::positive("k2", (1e-3, 0.1))
}

fn tape_p() -> ParamDef {
    ParamDef::positive("p", (0.5, 100.0))
}

fn tape_b() -> ParamDef {
    ParamDef::positive("b", (1e-3, 1.0))
}
