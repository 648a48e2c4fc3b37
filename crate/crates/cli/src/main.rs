//! `fracfit` command-line tool: fit, evaluate and compare growth/decay models.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fracfit::{
    bundled_dataset, caputo_of_identity, list_datasets, lm_fit, load_csv, multistart_fit, LmOptions, ModelSpec,
    TimeSeries,
};

use report::{AnyReport, CompareReport, DatasetRef, FitReport};

#[derive(Parser)]
#[command(name = "fracfit", version, about = "Fit classical and fractional-order models to time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a dataset.
    Fit {
        model: String,
        /// `bundled:<name>` or a CSV file with a `t,value` header.
        data: String,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Evaluate a model on a uniform grid and print `t,value` CSV.
    Eval {
        /// A model name or `caputo-of-t`.
        model: String,
        /// Comma-separated parameter values in model order.
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        /// Time range `start:end`.
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long, default_value_t = 45)]
        series_order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a classical and a fractional model to the same data.
    Compare {
        classical: String,
        fractional: String,
        data: String,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Recompute a saved report and check it is self-consistent.
    Verify { report: PathBuf },
    /// Dataset registry.
    Datasets {
        #[command(subcommand)]
        action: DatasetsAction,
    },
}

#[derive(Subcommand)]
enum DatasetsAction {
    /// Show registered datasets and whether they can be loaded.
    List,
}

#[derive(Args, Clone)]
struct FitOpts {
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 45)]
    series_order: usize,
    /// Override a parameter box, `name:lower:upper`. Repeatable.
    #[arg(long = "bounds", allow_hyphen_values = true)]
    bounds: Vec<String>,
    /// Single run from the model's default start instead of multistart.
    #[arg(long)]
    from_default: bool,
    /// Levenberg-Marquardt iteration budget per start.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Fit { model, data, opts } => {
            let report = fit(&model, &data, &opts)?;
            print_fit(&report);
            if let Some(path) = &opts.out {
                write_json(path, &report)?;
            }
            Ok(exit_for(report.solver.converged))
        }
        Command::Compare {
            classical,
            fractional,
            data,
            opts,
        } => {
            let c = fit(&classical, &data, &opts)?;
            let f = fit(&fractional, &data, &opts)?;
            let converged = c.solver.converged && f.solver.converged;
            let report = CompareReport::new(c, f)?;
            print_fit(&report.classical);
            println!();
            print_fit(&report.fractional);
            println!();
            println!("{:>10} {:>12} {:>12} {:>12}", "t", "observed", "classical", "fractional");
            for p in &report.points {
                println!("{:>10} {:>12.4} {:>12.4} {:>12.4}", p.t, p.observed, p.classical, p.fractional);
            }
            println!("efficiency gain: {:.4}", report.efficiency_gain);
            if let Some(path) = &opts.out {
                write_json(path, &report)?;
            }
            Ok(exit_for(converged))
        }
        Command::Eval {
            model,
            params,
            range,
            n,
            series_order,
            out,
        } => {
            let csv = eval(&model, &params, &range, n, series_order)?;
            match out {
                Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { report } => {
            let text = fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            match AnyReport::parse(&text)? {
                AnyReport::Fit(r) => {
                    r.verify()?;
                    check_source(&r)?;
                }
                AnyReport::Compare(r) => {
                    r.verify()?;
                    check_source(&r.classical)?;
                    check_source(&r.fractional)?;
                }
            }
            println!("{}: ok", report.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Datasets {
            action: DatasetsAction::List,
        } => {
            for d in list_datasets() {
                let status = if d.bundled {
                    "bundled".to_string()
                } else if d.available() {
                    format!("external, found at {}", d.path().display())
                } else {
                    format!("external, missing (expected at {})", d.path().display())
                };
                println!(
                    "{:<14} {:>3} points  t: {:<8} y: {:<10} {status}",
                    d.name, d.expected_points, d.t_unit, d.y_unit
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn load_data(source: &str) -> Result<TimeSeries> {
    match source.strip_prefix("bundled:") {
        Some(name) => Ok(bundled_dataset(name)?),
        None => load_csv(source).with_context(|| format!("loading {source}")),
    }
}

/// Re-reads the dataset a report was built from, when it is still reachable.
fn check_source(report: &FitReport) -> Result<()> {
    let source = &report.dataset.source;
    let data = if source.starts_with("bundled:") {
        load_data(source)
    } else if std::path::Path::new(source).is_file() {
        load_csv(source).map_err(Into::into)
    } else {
        return Ok(());
    };
    match data {
        Ok(d) => report.verify_dataset(&d),
        Err(e) if source.starts_with("bundled:") => {
            eprintln!("note: skipping dataset check: {e:#}");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn model_spec(name: &str, series_order: usize) -> Result<ModelSpec> {
    let spec = ModelSpec::by_name(name)?;
    let series = spec.series.with_double_series_order(series_order);
    series.validate()?;
    Ok(spec.with_series(series))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().with_context(|| format!("{what}: `{s}` is not a number"))
}

fn fit(model: &str, data: &str, opts: &FitOpts) -> Result<FitReport> {
    let mut spec = model_spec(model, opts.series_order)?;
    for b in &opts.bounds {
        let parts: Vec<&str> = b.split(':').collect();
        let [name, lo, hi] = parts[..] else {
            bail!("--bounds expects name:lower:upper, got `{b}`");
        };
        spec.set_bounds(name, parse_f64(lo, "lower bound")?, parse_f64(hi, "upper bound")?)?;
    }
    let series = load_data(data)?;
    let lm = LmOptions {
        max_iter: opts.max_iter,
        ..LmOptions::default()
    };
    let (result, starts) = if opts.from_default {
        (lm_fit(&spec, &spec.default_start(), &series, &lm)?, 0)
    } else {
        (multistart_fit(&spec, &series, opts.starts, opts.seed, &lm)?, opts.starts)
    };
    FitReport::new(&spec, DatasetRef::new(data, &series), &series, &result, starts, opts.seed)
}

fn eval(model: &str, params: &str, range: &str, n: usize, series_order: usize) -> Result<String> {
    let values: Vec<f64> = params
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(s, "parameter"))
        .collect::<Result<_>>()?;
    let (a, b) = range.split_once(':').context("--range expects start:end")?;
    let (a, b) = (parse_f64(a, "range start")?, parse_f64(b, "range end")?);
    if !(a.is_finite() && b.is_finite() && a <= b) {
        bail!("range must satisfy start <= end, got {a}:{b}");
    }
    if n < 2 && a != b {
        bail!("--n must be at least 2 for a non-empty range");
    }
    let ts: Vec<f64> = (0..n.max(1))
        .map(|i| if n <= 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let ys = if model == "caputo-of-t" {
        let [alpha] = values[..] else {
            bail!("caputo-of-t takes one parameter (alpha), got {}", values.len());
        };
        ts.iter().map(|&t| caputo_of_identity(alpha, t)).collect::<fracfit::Result<Vec<_>>>()?
    } else {
        model_spec(model, series_order)?.evaluate_many(&ts, &values)?
    };
    let mut out = String::from("t,value\n");
    for (t, y) in ts.iter().zip(ys) {
        out.push_str(&format!("{t},{y}\n"));
    }
    Ok(out)
}

fn print_fit(r: &FitReport) {
    println!("model:   {}", r.model);
    println!("data:    {} ({} points, sha256 {})", r.dataset.source, r.points.len(), &r.dataset.sha256[..12]);
    for p in &r.params {
        let tag = if p.fixed { "  (fixed)" } else { "" };
        println!("  {:<6} = {:<16.8} [{}, {}]{tag}", p.name, p.value, p.lower, p.upper);
    }
    if let Some(a) = r.derived_a {
        println!("  a      = {a:.8} (2p/b)");
    }
    println!("SSE:     {:.6}", r.sse);
    let start = if r.solver.starts == 0 {
        "default start".to_string()
    } else {
        format!("best of {} starts (#{}), seed {}", r.solver.starts, r.solver.start_index, r.solver.seed)
    };
    println!(
        "solver:  {:?} after {} iterations, {start}{}",
        r.solver.termination,
        r.solver.iterations,
        if r.solver.converged { "" } else { "  NOT CONVERGED" }
    );
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
