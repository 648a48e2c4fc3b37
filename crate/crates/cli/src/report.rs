use anyhow::{bail, ensure, Context, Result};
use fracfit::{efficiency_gain, FitResult, ModelSpec, TimeSeries};
use serde::{Deserialize, Serialize};

/// Relative tolerance for re-derived predictions.
const PREDICTION_TOL: f64 = 1e-10;
const SSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRef {
    /// `bundled:<name>` or the path given on the command line.
    pub source: String,
    pub name: String,
    pub sha256: String,
    pub t_unit: String,
    pub y_unit: String,
}

impl DatasetRef {
    pub fn new(source: &str, data: &TimeSeries) -> Self {
        DatasetRef {
            source: source.to_string(),
            name: data.name.clone(),
            sha256: data.sha256(),
            t_unit: data.t_unit.clone(),
            y_unit: data.y_unit.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub fixed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointEntry {
    pub t: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solver {
    pub converged: bool,
    pub termination: fracfit::Termination,
    pub iterations: usize,
    pub start_index: usize,
    pub start_point: Vec<f64>,
    /// Number of multistart points, or 0 for a single run from the default start.
    pub starts: usize,
    pub seed: u64,
    pub series_order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: String,
    pub tool_version: String,
    pub model: String,
    pub dataset: DatasetRef,
    pub params: Vec<ParamEntry>,
    /// Classical tape amplitude a = 2p / b, for tape models.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub derived_a: Option<f64>,
    pub sse: f64,
    pub efficiency_gain: Option<f64>,
    pub points: Vec<PointEntry>,
    pub solver: Solver,
}

impl FitReport {
    pub fn new(model: &ModelSpec, dataset: DatasetRef, data: &TimeSeries, fit: &FitResult, starts: usize, seed: u64) -> Result<Self> {
        let values = &fit.best_params.values;
        let predicted = model.evaluate_many(&data.times(), values)?;
        let points = data
            .points()
            .iter()
            .zip(predicted)
            .map(|(&(t, observed), predicted)| PointEntry {
                t,
                observed,
                predicted,
                residual: observed - predicted,
            })
            .collect();
        let derived_a = model.name().starts_with("tape-").then(|| 2.0 * values[0] / values[1]);
        Ok(FitReport {
            kind: "fit-report".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            model: model.name().into(),
            dataset,
            params: model
                .params
                .iter()
                .zip(values)
                .map(|(p, &value)| ParamEntry {
                    name: p.name.clone(),
                    value,
                    lower: p.lower,
                    upper: p.upper,
                    fixed: !p.is_free(),
                })
                .collect(),
            derived_a,
            sse: fit.sse,
            efficiency_gain: None,
            points,
            solver: Solver {
                converged: fit.converged,
                termination: fit.termination,
                iterations: fit.iterations,
                start_index: fit.start_index,
                start_point: fit.start_point.values.clone(),
                starts,
                seed,
                series_order: model.series.double_series_order,
            },
        })
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let spec = ModelSpec::by_name(&self.model)?;
        let series = spec.series.with_double_series_order(self.solver.series_order);
        Ok(spec.with_series(series))
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    /// Re-derives predictions, residuals and SSE from the parameters.
    pub fn verify(&self) -> Result<()> {
        let model = self.model_spec()?;
        let ts: Vec<f64> = self.points.iter().map(|p| p.t).collect();
        let predicted = model.evaluate_many(&ts, &self.values())?;
        let mut sse = 0.0;
        for (p, m) in self.points.iter().zip(predicted) {
            ensure!(
                (p.predicted - m).abs() <= PREDICTION_TOL * m.abs().max(1.0),
                "{}: prediction at t = {} is {}, report says {}",
                self.model,
                p.t,
                m,
                p.predicted
            );
            let r = p.observed - m;
            ensure!(
                (p.residual - r).abs() <= PREDICTION_TOL * p.observed.abs().max(1.0),
                "{}: residual at t = {} is {r}, report says {}",
                self.model,
                p.t,
                p.residual
            );
            sse += r * r;
        }
        ensure!(
            (sse - self.sse).abs() <= SSE_TOL * sse.max(f64::MIN_POSITIVE) + PREDICTION_TOL,
            "{}: SSE is {sse}, report says {}",
            self.model,
            self.sse
        );
        if let Some(a) = self.derived_a {
            let v = self.values();
            ensure!((a - 2.0 * v[0] / v[1]).abs() <= PREDICTION_TOL * a.abs(), "derived amplitude mismatch");
        }
        Ok(())
    }

    /// Checks the recorded observations against the dataset they came from.
    pub fn verify_dataset(&self, data: &TimeSeries) -> Result<()> {
        ensure!(
            data.sha256() == self.dataset.sha256,
            "dataset {} hash {} differs from the report's {}",
            self.dataset.source,
            data.sha256(),
            self.dataset.sha256
        );
        ensure!(data.len() == self.points.len(), "dataset has {} points, report has {}", data.len(), self.points.len());
        for (&(t, y), p) in data.points().iter().zip(&self.points) {
            ensure!(t == p.t && y == p.observed, "observation at t = {t} differs from the report");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparePoint {
    pub t: f64,
    pub observed: f64,
    pub classical: f64,
    pub fractional: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub kind: String,
    pub tool_version: String,
    pub classical: FitReport,
    pub fractional: FitReport,
    pub efficiency_gain: f64,
    pub points: Vec<ComparePoint>,
}

impl CompareReport {
    pub fn new(classical: FitReport, mut fractional: FitReport) -> Result<Self> {
        let gain = efficiency_gain(classical.sse, fractional.sse)?;
        fractional.efficiency_gain = Some(gain);
        let points = classical
            .points
            .iter()
            .zip(&fractional.points)
            .map(|(c, f)| ComparePoint {
                t: c.t,
                observed: c.observed,
                classical: c.predicted,
                fractional: f.predicted,
            })
            .collect();
        Ok(CompareReport {
            kind: "compare-report".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            classical,
            fractional,
            efficiency_gain: gain,
            points,
        })
    }

    pub fn verify(&self) -> Result<()> {
        self.classical.verify().context("classical fit")?;
        self.fractional.verify().context("fractional fit")?;
        let gain = efficiency_gain(self.classical.sse, self.fractional.sse)?;
        ensure!(
            (gain - self.efficiency_gain).abs() <= PREDICTION_TOL,
            "efficiency gain is {gain}, report says {}",
            self.efficiency_gain
        );
        for ((p, c), f) in self.points.iter().zip(&self.classical.points).zip(&self.fractional.points) {
            ensure!(
                p.classical == c.predicted && p.fractional == f.predicted && p.observed == c.observed,
                "side-by-side row at t = {} disagrees with the fits",
                p.t
            );
        }
        Ok(())
    }
}

/// A report read back from disk.
pub enum AnyReport {
    Fit(FitReport),
    Compare(CompareReport),
}

impl AnyReport {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).context("report is not valid JSON")?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some("fit-report") => Ok(AnyReport::Fit(serde_json::from_value(value)?)),
            Some("compare-report") => Ok(AnyReport::Compare(serde_json::from_value(value)?)),
            Some(other) => bail!("unknown report kind `{other}`"),
            None => bail!("report has no `kind` field"),
        }
    }
}
