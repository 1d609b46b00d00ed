//! Command-line front end: experiments, sweeps and verification suites with
//! JSON or CSV reports.
//!
//! Exit status: 0 when every check passes, 1 on a violation or numerical
//! failure, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rankproj::linalg::io::read_matrix;
use rankproj::linalg::{svd, DenseMatrix};
use rankproj::localization::{
    deformed_top_singular_value, empirical_rank_select, extreme_surrogates,
    noise_top_singular_value, rank_select, singular_interval, slln_trajectories, RankOutcome,
    RankSelectionConfig, SingularInterval, URule,
};
use rankproj::montecarlo::{
    calibration_grid, ratio_report, with_workers, CSpec, ExperimentConfig, McOptions, Statistic,
};
use rankproj::randgen::{EntryDistribution, Normalization, Seed};
use rankproj::report::{
    ratio_table, simulate, verify_table, write_csv, write_json, CsvTable, Format, Outcome,
    Reproducer, RunClock, RunManifest,
};
use rankproj::verify::{run_suite, Suite, VerifyConfig};
use rankproj::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "rankproj",
    version,
    about = "Empirical rank-r projections of deformed random matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Report file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimates for one configuration, next to its bounds.
    Simulate {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long = "C")]
        c: CSpec,
        #[arg(long)]
        dist: EntryDistribution,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        experiment: u64,
        #[arg(long, default_value = "none")]
        normalization: Normalization,
        /// Statistics to estimate; all when absent.
        #[arg(long, value_delimiter = ',')]
        stats: Vec<Statistic>,
        #[command(flatten)]
        output: Output,
    },
    /// Pathwise verification suites.
    Verify {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        dist: EntryDistribution,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed signal; trials cycle through standard shapes when absent.
        #[arg(long = "C")]
        c: Option<CSpec>,
        /// Suites to run; all when absent.
        #[arg(long = "suite", value_delimiter = ',')]
        suites: Vec<Suite>,
        #[command(flatten)]
        output: Output,
    },
    /// Ratio of the Monte Carlo mean of sup Z to the expected-excess bound over the calibration grid.
    Sweep {
        #[arg(long = "M", value_delimiter = ',', default_values_t = [16usize, 32, 64, 128])]
        m: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Top singular value of a rank-one signal plus normalized noise against its asymptotic window.
    Localize {
        #[arg(long = "M", value_delimiter = ',')]
        m: Vec<usize>,
        /// Signal strength λ₁ of C = λ₁·e₁e₁ᵀ.
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
        #[arg(long, default_value = "gaussian:1")]
        dist: EntryDistribution,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed distance outside the window.
        #[arg(long, default_value_t = 0.2)]
        slack: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest rank reaching accuracy α on a matrix file.
    RankSelect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Noise standard deviation; the matrix is treated as noiseless when absent.
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Trajectories of ũᵀE_M E_Mᵀũ along nested noise draws.
    Slln {
        /// Largest size.
        #[arg(long = "M")]
        m: usize,
        /// Sizes to report; powers of two up to M when absent.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
        /// `ones`, `finite:k` or `file:path`.
        #[arg(long, default_value = "ones")]
        u: String,
        #[arg(long, default_value = "gaussian:1")]
        dist: EntryDistribution,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

/// Parses `args` (without the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("rankproj")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => match outcome {
            Outcome::Pass => EXIT_PASS,
            _ => EXIT_FAIL,
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Bad arguments and unreadable inputs are usage errors; everything else is a failure.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::OutOfHypothesis(_) | Error::Io(_) | Error::Csv(_) => {
            EXIT_USAGE
        }
        _ => EXIT_FAIL,
    }
}

fn emit<T: Serialize>(
    manifest: &RunManifest<T>,
    table: Option<CsvTable>,
    output: &Output,
) -> rankproj::Result<()> {
    match (output.format, table) {
        (Format::Csv, Some(t)) => match &output.out {
            Some(p) => write_csv(p, &t),
            None => t.write_to(std::io::stdout().lock()),
        },
        (Format::Csv, None) => Err(Error::InvalidInput("this report has no CSV form".into())),
        (Format::Json, _) => match &output.out {
            Some(p) => write_json(p, manifest),
            None => {
                let mut out = std::io::stdout().lock();
                serde_json::to_writer_pretty(&mut out, manifest)?;
                writeln!(out)?;
                Ok(())
            }
        },
    }
}

/// Writes a failing manifest for a pathwise violation; other errors propagate.
fn fail_with(clock: RunClock, e: Error, output: &Output) -> rankproj::Result<Outcome> {
    let (seed, detail) = match e {
        Error::PathwiseViolation { seed, detail, .. } => (seed, detail),
        other => return Err(other),
    };
    let mut table = CsvTable::new(["seed", "detail"]);
    table.push(vec![seed.to_string(), detail.clone()])?;
    let manifest = clock.finish(Outcome::Fail, vec![Reproducer { seed, detail }], None::<()>);
    emit(&manifest, Some(table), output)?;
    Ok(Outcome::Fail)
}

fn dispatch(command: Command) -> rankproj::Result<Outcome> {
    match command {
        Command::Simulate {
            m,
            r,
            c,
            dist,
            reps,
            seed,
            experiment,
            normalization,
            stats,
            output,
        } => {
            let config = ExperimentConfig {
                m,
                r,
                c,
                dist,
                reps,
                seed,
                experiment,
                normalization,
            };
            let stats = if stats.is_empty() {
                Statistic::ALL.to_vec()
            } else {
                stats
            };
            let clock = RunClock::start("simulate", &config, seed)?;
            let opts = McOptions {
                workers: output.workers,
                ..McOptions::default()
            };
            match simulate(&config, &stats, &opts) {
                Ok(report) => {
                    let table = report.table()?;
                    emit(
                        &clock.finish(Outcome::Pass, vec![], report),
                        Some(table),
                        &output,
                    )?;
                    Ok(Outcome::Pass)
                }
                Err(e) => fail_with(clock, e, &output),
            }
        }
        Command::Verify {
            m,
            r,
            dist,
            trials,
            seed,
            c,
            suites,
            output,
        } => {
            let config = VerifyConfig {
                m,
                r,
                dist,
                trials,
                seed,
                c,
            };
            let suites = if suites.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suites
            };
            let clock = RunClock::start("verify", &config, seed)?;
            let outcomes = suites
                .iter()
                .map(|&s| run_suite(&config, s, output.workers))
                .collect::<rankproj::Result<Vec<_>>>()?;
            let reproducers: Vec<Reproducer> = outcomes
                .iter()
                .flat_map(|o| o.violations.iter())
                .map(|v| Reproducer {
                    seed: v.seed,
                    detail: format!("{}: {} (lhs {}, rhs {})", v.suite, v.detail, v.lhs, v.rhs),
                })
                .collect();
            let outcome = if reproducers.is_empty() {
                Outcome::Pass
            } else {
                Outcome::Fail
            };
            let violations: usize = outcomes.iter().map(|o| o.violations.len()).sum();
            eprintln!("verify: {} suites, {violations} violations", outcomes.len());
            let table = verify_table(&outcomes)?;
            emit(
                &clock.finish(
                    outcome,
                    reproducers,
                    VerifyResult {
                        violations,
                        suites: outcomes,
                    },
                ),
                Some(table),
                &output,
            )?;
            Ok(outcome)
        }
        Command::Sweep {
            m,
            reps,
            seed,
            output,
        } => {
            let config = SweepConfig {
                m: m.clone(),
                reps,
                seed,
            };
            let clock = RunClock::start("sweep", &config, seed)?;
            let grid: Vec<ExperimentConfig> = m
                .iter()
                .flat_map(|&m| calibration_grid(m, reps, seed))
                .collect();
            let opts = McOptions {
                workers: output.workers,
                ..McOptions::default()
            };
            match ratio_report(&grid, &opts) {
                Ok(report) => {
                    let table = ratio_table(&report)?;
                    emit(
                        &clock.finish(Outcome::Pass, vec![], report),
                        Some(table),
                        &output,
                    )?;
                    Ok(Outcome::Pass)
                }
                Err(e) => fail_with(clock, e, &output),
            }
        }
        Command::Localize {
            m,
            lambda,
            dist,
            trials,
            seed,
            slack,
            output,
        } => {
            let config = LocalizeConfig {
                m,
                lambda,
                dist,
                trials,
                seed,
                slack,
            };
            let clock = RunClock::start("localize", &config, seed)?;
            let rows = with_workers(output.workers, || localize(&config))??;
            let reproducers: Vec<Reproducer> = rows
                .iter()
                .flat_map(|row| row.outside.iter().map(move |&(k, v)| (row, k, v)))
                .map(|(row, k, v)| Reproducer {
                    seed: Seed::new(seed, LOCALIZE_EXPERIMENT, (row.m as u64) << 32 | k),
                    detail: format!(
                        "M={}: λ₁ = {v} outside [{}, {}] ± {slack}",
                        row.m, row.interval.lower, row.interval.upper
                    ),
                })
                .collect();
            let outcome = if reproducers.is_empty() {
                Outcome::Pass
            } else {
                Outcome::Fail
            };
            let table = localize_table(&rows)?;
            emit(
                &clock.finish(outcome, reproducers, rows),
                Some(table),
                &output,
            )?;
            Ok(outcome)
        }
        Command::RankSelect {
            input,
            alpha,
            sigma,
            output,
        } => {
            let config = RankSelectConfig {
                input: input.clone(),
                alpha,
                sigma,
            };
            let clock = RunClock::start("rank-select", &config, 0)?;
            let x = read_matrix(&input)?;
            let result = rank_select_on(&x, alpha, sigma)?;
            let mut table = CsvTable::new(["input", "alpha", "sigma", "selected"]);
            table.push(vec![
                input.display().to_string(),
                alpha.to_string(),
                sigma.map(|s| s.to_string()).unwrap_or_default(),
                match result.selected {
                    RankOutcome::Rank(r) => r.to_string(),
                    RankOutcome::NoDetectableSignal => "none".into(),
                },
            ])?;
            emit(
                &clock.finish(Outcome::Pass, vec![], result),
                Some(table),
                &output,
            )?;
            Ok(Outcome::Pass)
        }
        Command::Slln {
            m,
            grid,
            u,
            dist,
            trials,
            seed,
            output,
        } => {
            let rule: URule = u.parse()?;
            let grid = if grid.is_empty() {
                std::iter::successors(Some(1usize), |g| g.checked_mul(2))
                    .take_while(|g| *g <= m)
                    .collect()
            } else {
                grid
            };
            let config = SllnConfig {
                m,
                grid,
                u,
                dist,
                trials,
                seed,
            };
            let clock = RunClock::start("slln", &config, seed)?;
            let runs = with_workers(output.workers, || slln(&config, &rule))??;
            let mut table = CsvTable::new(["u", "dist", "seed", "trial", "M", "z", "cross_term"]);
            for run in &runs {
                for p in &run.points {
                    table.push(vec![
                        config.u.clone(),
                        config.dist.to_string(),
                        seed.to_string(),
                        run.trial.to_string(),
                        p.m.to_string(),
                        p.z.to_string(),
                        p.cross_term.to_string(),
                    ])?;
                }
            }
            emit(
                &clock.finish(Outcome::Pass, vec![], runs),
                Some(table),
                &output,
            )?;
            Ok(Outcome::Pass)
        }
    }
}

#[derive(Serialize)]
struct VerifyResult {
    violations: usize,
    suites: Vec<rankproj::verify::SuiteOutcome>,
}

#[derive(Serialize)]
struct SweepConfig {
    #[serde(rename = "M")]
    m: Vec<usize>,
    reps: usize,
    seed: u64,
}

#[derive(Serialize)]
struct LocalizeConfig {
    #[serde(rename = "M")]
    m: Vec<usize>,
    lambda: f64,
    dist: EntryDistribution,
    trials: usize,
    seed: u64,
    slack: f64,
}

const LOCALIZE_EXPERIMENT: u64 = 500;

#[derive(Serialize)]
struct LocalizeRow {
    #[serde(rename = "M")]
    m: usize,
    interval: SingularInterval,
    top_singular_values: Vec<f64>,
    noise_top_singular_values: Vec<f64>,
    /// Empirical stand-ins for the liminf and limsup: min and max over seeds.
    surrogate_low: f64,
    surrogate_high: f64,
    /// `(trial, value)` for values outside the window by more than the slack.
    outside: Vec<(u64, f64)>,
}

fn localize(cfg: &LocalizeConfig) -> rankproj::Result<Vec<LocalizeRow>> {
    use rayon::prelude::*;
    if cfg.m.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidInput(
            "need at least one size and one trial".into(),
        ));
    }
    let sigma = cfg.dist.variance().sqrt();
    let interval = singular_interval(cfg.lambda, 0.0, sigma)?;
    cfg.m
        .iter()
        .map(|&m| {
            let mut diag = vec![0.0; m];
            diag[0] = cfg.lambda;
            let c = DenseMatrix::from_diagonal(&diag)?;
            let seed = |k: u64| Seed::new(cfg.seed, LOCALIZE_EXPERIMENT, (m as u64) << 32 | k);
            let pairs = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|k| {
                    Ok((
                        deformed_top_singular_value(&c, &cfg.dist, seed(k))?,
                        noise_top_singular_value(
                            &cfg.dist,
                            m,
                            seed(k).with_experiment(LOCALIZE_EXPERIMENT + 1),
                        )?,
                    ))
                })
                .collect::<rankproj::Result<Vec<_>>>()?;
            let (tops, noise): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (lo, hi) = extreme_surrogates(&tops).expect("at least one trial");
            let outside = tops
                .iter()
                .enumerate()
                .filter(|(_, v)| !interval.contains(**v, cfg.slack))
                .map(|(k, v)| (k as u64, *v))
                .collect();
            Ok(LocalizeRow {
                m,
                interval,
                top_singular_values: tops,
                noise_top_singular_values: noise,
                surrogate_low: lo,
                surrogate_high: hi,
                outside,
            })
        })
        .collect()
}

fn localize_table(rows: &[LocalizeRow]) -> rankproj::Result<CsvTable> {
    let mut t = CsvTable::new([
        "M",
        "trial",
        "top_singular_value",
        "noise_top_singular_value",
        "lower",
        "upper",
        "inside",
    ]);
    for row in rows {
        for (k, (v, n)) in row
            .top_singular_values
            .iter()
            .zip(&row.noise_top_singular_values)
            .enumerate()
        {
            t.push(vec![
                row.m.to_string(),
                k.to_string(),
                v.to_string(),
                n.to_string(),
                row.interval.lower.to_string(),
                row.interval.upper.to_string(),
                (!row.outside.iter().any(|(j, _)| *j == k as u64)).to_string(),
            ])?;
        }
    }
    Ok(t)
}

#[derive(Serialize)]
struct RankSelectConfig {
    input: PathBuf,
    alpha: f64,
    sigma: Option<f64>,
}

#[derive(Serialize)]
struct RankSelectResult {
    spectrum: Vec<f64>,
    selected: RankOutcome,
}

fn rank_select_on(
    x: &DenseMatrix,
    alpha: f64,
    sigma: Option<f64>,
) -> rankproj::Result<RankSelectResult> {
    let spectrum = svd(x)?.spectrum;
    let selected = match sigma {
        Some(s) => empirical_rank_select(x, &RankSelectionConfig::new(alpha, s * s)?)?,
        None => RankOutcome::Rank(rank_select(
            &spectrum,
            &RankSelectionConfig::new(alpha, 0.0)?,
        )?),
    };
    Ok(RankSelectResult {
        spectrum: spectrum.values().to_vec(),
        selected,
    })
}

#[derive(Serialize)]
struct SllnConfig {
    #[serde(rename = "M")]
    m: usize,
    grid: Vec<usize>,
    u: String,
    dist: EntryDistribution,
    trials: usize,
    seed: u64,
}

const SLLN_EXPERIMENT: u64 = 600;

#[derive(Serialize)]
struct SllnPoint {
    #[serde(rename = "M")]
    m: usize,
    z: f64,
    cross_term: f64,
}

#[derive(Serialize)]
struct SllnRun {
    trial: u64,
    seed: Seed,
    points: Vec<SllnPoint>,
}

fn slln(cfg: &SllnConfig, rule: &URule) -> rankproj::Result<Vec<SllnRun>> {
    use rayon::prelude::*;
    if cfg.trials == 0 || cfg.grid.iter().any(|g| *g == 0 || *g > cfg.m) {
        return Err(Error::InvalidInput(
            "grid sizes must lie in 1..=M and trials must be positive".into(),
        ));
    }
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| {
            let seed = Seed::new(cfg.seed, SLLN_EXPERIMENT, k);
            let t =
                slln_trajectories(std::slice::from_ref(rule), &cfg.dist, cfg.m, seed)?.remove(0);
            Ok(SllnRun {
                trial: k,
                seed,
                points: cfg
                    .grid
                    .iter()
                    .map(|&m| SllnPoint {
                        m,
                        z: t.at(m),
                        cross_term: t.cross_at(m),
                    })
                    .collect(),
            })
        })
        .collect()
}

/// Reads a JSON report written by [`run`].
pub fn read_report(path: &Path) -> rankproj::Result<serde_json::Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
