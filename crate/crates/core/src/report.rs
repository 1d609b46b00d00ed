//! Run manifests and JSON/CSV emission.
//!
//! A JSON report wraps its result in a [`RunManifest`] that carries the full
//! configuration. CSV tables repeat the configuration columns on every row, so
//! either format is enough to re-run an experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::bounds::{fmt_ext, BoundReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::svd;
use crate::montecarlo::{estimate_all, ExperimentConfig, McOptions, RatioReport, Statistic};
use crate::randgen::Seed;
use crate::verify::SuiteOutcome;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

/// Seed and description of a failed check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub seed: Seed,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<T> {
    pub command: String,
    pub config: serde_json::Value,
    pub artifact_version: String,
    pub seed_root: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outcome: Outcome,
    pub reproducers: Vec<Reproducer>,
    pub result: T,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

/// The part of a manifest known before the run starts.
#[derive(Clone, Debug)]
pub struct RunClock {
    command: String,
    config: serde_json::Value,
    seed_root: u64,
    started_unix_ms: u128,
}

impl RunClock {
    pub fn start(command: &str, config: &impl Serialize, seed_root: u64) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed_root,
            started_unix_ms: now_ms(),
        })
    }

    pub fn finish<T>(
        self,
        outcome: Outcome,
        reproducers: Vec<Reproducer>,
        result: T,
    ) -> RunManifest<T> {
        RunManifest {
            command: self.command,
            config: self.config,
            artifact_version: ARTIFACT_VERSION.to_string(),
            seed_root: self.seed_root,
            started_unix_ms: self.started_unix_ms,
            finished_unix_ms: now_ms(),
            outcome,
            reproducers,
            result,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(invalid(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

/// A header row and string cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers
                .into_iter()
                .map(|h| h.as_ref().to_string())
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(w);
        out.write_record(&self.headers)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    table.write_to(std::fs::File::create(path)?)
}

const CONFIG_COLUMNS: [&str; 8] = [
    "M",
    "r",
    "C",
    "dist",
    "reps",
    "seed",
    "experiment",
    "normalization",
];

fn config_cells(c: &ExperimentConfig) -> Vec<String> {
    let norm = serde_json::to_value(c.normalization)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    vec![
        c.m.to_string(),
        c.r.to_string(),
        c.c.to_string(),
        c.dist.to_string(),
        c.reps.to_string(),
        c.seed.to_string(),
        c.experiment.to_string(),
        norm,
    ]
}

fn with_config<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    CONFIG_COLUMNS.iter().chain(extra).copied().collect()
}

/// Monte Carlo estimates for one configuration next to its bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub config: ExperimentConfig,
    pub estimates: BTreeMap<String, crate::montecarlo::MCEstimate>,
    pub bounds: BoundReport,
}

pub fn simulate(
    config: &ExperimentConfig,
    statistics: &[Statistic],
    opts: &McOptions,
) -> Result<SimulateReport> {
    config.validate()?;
    let estimates = estimate_all(config, statistics, opts)?;
    let spectrum = svd(&config.c.build(config.m)?)?.spectrum;
    let bounds = BoundReport::from_moments(
        &spectrum,
        config.m,
        config.r,
        config.noise_moments(),
        config.dist.is_gaussian(),
        None,
    )?;
    Ok(SimulateReport {
        config: config.clone(),
        estimates: statistics
            .iter()
            .map(|s| s.name().to_string())
            .zip(estimates)
            .collect(),
        bounds,
    })
}

impl SimulateReport {
    /// One row per statistic.
    pub fn table(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(with_config(&[
            "statistic",
            "mean",
            "stderr",
            "n",
            "min",
            "max",
            "excess_bound",
            "gaussian_bound",
            "latala_rhs",
        ]));
        for (name, est) in &self.estimates {
            let mut row = config_cells(&self.config);
            row.extend([
                name.clone(),
                est.mean.to_string(),
                est.stderr.to_string(),
                est.n.to_string(),
                est.min.to_string(),
                est.max.to_string(),
                fmt_ext(self.bounds.excess_bound),
                self.bounds.gaussian_bound.map(fmt_ext).unwrap_or_default(),
                self.bounds.latala_rhs.to_string(),
            ]);
            t.push(row)?;
        }
        Ok(t)
    }
}

pub fn ratio_table(report: &RatioReport) -> Result<CsvTable> {
    let mut t = CsvTable::new(with_config(&[
        "mean_z_sup",
        "stderr",
        "excess_bound",
        "ratio",
    ]));
    for row in &report.rows {
        let mut cells = config_cells(&row.config);
        cells.extend([
            row.estimate.mean.to_string(),
            row.estimate.stderr.to_string(),
            fmt_ext(row.excess_bound),
            row.ratio.to_string(),
        ]);
        t.push(cells)?;
    }
    Ok(t)
}

/// One summary row per suite followed by one row per violation.
pub fn verify_table(outcomes: &[SuiteOutcome]) -> Result<CsvTable> {
    let mut t = CsvTable::new([
        "suite",
        "checks",
        "violations",
        "trial",
        "seed",
        "lhs",
        "rhs",
        "detail",
    ]);
    for o in outcomes {
        t.push(vec![
            o.suite.to_string(),
            o.checks.to_string(),
            o.violations.len().to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
        for v in &o.violations {
            t.push(vec![
                o.suite.to_string(),
                String::new(),
                String::new(),
                v.trial.to_string(),
                v.seed.to_string(),
                v.lhs.to_string(),
                fmt_ext(v.rhs),
                v.detail.clone(),
            ])?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            m: 4,
            r: 1,
            c: "diag:2,1,0,0".parse().unwrap(),
            dist: "gaussian:1".parse().unwrap(),
            reps: 20,
            seed: 1,
            experiment: 0,
            normalization: Default::default(),
        }
    }

    #[test]
    fn simulate_report_carries_reference_bound() {
        let rep = simulate(&cfg(), &Statistic::ALL, &McOptions::default()).unwrap();
        assert!((rep.bounds.excess_bound - 10.928).abs() < 1e-3);
        assert_eq!(rep.estimates.len(), Statistic::ALL.len());
        assert_eq!(rep.table().unwrap().rows.len(), Statistic::ALL.len());
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let rep = simulate(&cfg(), &[Statistic::ZSup], &McOptions::default()).unwrap();
        let man = RunClock::start("simulate", &cfg(), 1).unwrap().finish(
            Outcome::Pass,
            vec![],
            rep.clone(),
        );
        let text = serde_json::to_string(&man).unwrap();
        let back: RunManifest<SimulateReport> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, man);
        let again: ExperimentConfig = serde_json::from_value(back.config).unwrap();
        let rerun = simulate(&again, &[Statistic::ZSup], &McOptions::default()).unwrap();
        assert_eq!(rerun, rep);
    }

    #[test]
    fn csv_quotes_and_counts() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]).unwrap();
        assert!(t.push(vec!["1".into()]).is_err());
        assert_eq!(t.to_csv_string().unwrap(), "a,b\r\n1,\"x,y\"\r\n");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
