//! Time-series ingestion and the dataset registry.
//!
//! Files are UTF-8 CSV with a mandatory `t,value` header, one observation per
//! line, decimal point, no thousands separators. Only the blood alcohol series
//! ships with the crate; the other registry entries are slots that read a
//! user-supplied file from the data directory (`$FRACFIT_DATA_DIR`, falling
//! back to the crate's `data/` directory).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const BAL_CSV: &str = include_str!("../data/bal.csv");
const MANIFEST: &str = include_str!("../data/manifest.json");

/// Observations (t, y), strictly increasing in t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub t_unit: String,
    pub y_unit: String,
    points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(
        name: impl Into<String>,
        t_unit: impl Into<String>,
        y_unit: impl Into<String>,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(format!(
                "a series needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, &(t, y)) in points.iter().enumerate() {
            if !t.is_finite() || !y.is_finite() {
                return Err(Error::Validation(format!("point {i} ({t}, {y}) is not finite")));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::Validation(format!(
                "t must be strictly increasing: t = {} follows t = {} at point {}",
                points[i + 1].0,
                points[i].0,
                i + 1
            )));
        }
        Ok(TimeSeries {
            name: name.into(),
            t_unit: t_unit.into(),
            y_unit: y_unit.into(),
            points,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Copy with arbitrary rows, bypassing the ordering check.
    #[cfg(test)]
    pub(crate) fn with_points_unchecked(&self, points: Vec<(f64, f64)>) -> Self {
        TimeSeries {
            points,
            ..self.clone()
        }
    }

    /// Canonical CSV text. Numbers use the shortest representation that
    /// parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, y) in &self.points {
            out.push_str(&format!("{t},{y}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical CSV text.
    pub fn sha256(&self) -> String {
        sha256_hex(self.to_csv().as_bytes())
    }

    /// Parses CSV text; `name` labels the result.
    pub fn parse_csv(name: &str, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
        if header.len() != 2 || &header[0] != "t" || &header[1] != "value" {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `t,value`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut points = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{}` is not a number", &record[i]),
                })
            };
            let (t, y) = (field(0)?, field(1)?);
            if !t.is_finite() || !y.is_finite() {
                return Err(Error::Validation(format!("line {line}: values must be finite, got ({t}, {y})")));
            }
            points.push((t, y));
        }
        TimeSeries::new(name, "unspecified", "unspecified", points)
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads a CSV file; the series is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    TimeSeries::parse_csv(name, &text)
}

/// Registry entry from the data manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub file: String,
    pub t_unit: String,
    pub y_unit: String,
    pub bundled: bool,
    pub source: String,
    pub sha256: Option<String>,
    pub expected_points: usize,
}

impl DatasetInfo {
    /// Where an external dataset is looked up.
    pub fn path(&self) -> PathBuf {
        data_dir().join(&self.file)
    }

    /// Whether the series can be loaded without further user action.
    pub fn available(&self) -> bool {
        self.bundled || self.path().is_file()
    }
}

fn manifest() -> &'static [DatasetInfo] {
    static ENTRIES: OnceLock<Vec<DatasetInfo>> = OnceLock::new();
    ENTRIES.get_or_init(|| serde_json::from_str(MANIFEST).expect("bundled manifest is valid JSON"))
}

fn data_dir() -> PathBuf {
    std::env::var_os("FRACFIT_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

pub fn list_datasets() -> Vec<DatasetInfo> {
    manifest().to_vec()
}

/// Dataset by registry name: `bal`, `population-un` or `tape`.
pub fn bundled_dataset(name: &str) -> Result<TimeSeries> {
    let info = manifest()
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownDataset(name.to_string()))?;
    let mut series = if info.bundled {
        TimeSeries::parse_csv(name, BAL_CSV)?
    } else {
        let path = info.path();
        if !path.is_file() {
            return Err(Error::MissingExternalData {
                name: name.to_string(),
                path,
            });
        }
        let mut s = load_csv(&path)?;
        s.name = name.to_string();
        s
    };
    if series.len() != info.expected_points {
        return Err(Error::Validation(format!(
            "dataset {name} should have {} points, found {}",
            info.expected_points,
            series.len()
        )));
    }
    series.t_unit = info.t_unit.clone();
    series.y_unit = info.y_unit.clone();
    Ok(series)
}
