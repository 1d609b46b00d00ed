//! Seeded Monte Carlo estimation of expectations of the projection-excess
//! suprema and of the noise spectral norm.
//!
//! Replication `k` of a configuration draws its noise from the stream
//! `(root, experiment, k)`, so results do not depend on how replications are
//! scheduled. Per-replication values are collected in index order and summed
//! with compensated summation, which makes every estimate bitwise identical
//! for any number of workers.
//!
//! Configurations that share the noise law, size, seed and replication count
//! also share the noise draws (common random numbers). [`estimate_grid`]
//! exploits this: the Gram spectra of one draw are computed once per signal
//! and reused for every rank.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{expected_excess_bound, pathwise_bound};
use crate::error::{invalid, Error, Result};
use crate::linalg::{io::read_matrix, spectral_norm, svd, DenseMatrix};
use crate::randgen::{sample_matrix, EntryDistribution, Normalization, Seed};
use crate::zprocess::{NoiseGram, SignalModel, SupValues};

/// Relative slack on the per-draw bound `sup Z¹ ≤ Y`.
pub const PATHWISE_REL_TOL: f64 = 1e-8;
/// Slack on `sup Z ≤ sup Z¹ + sup Z²`, relative to `1 + energy scale`.
pub const SUBADDITIVITY_REL_TOL: f64 = 1e-9;

/// A signal amplitude, either absolute or a multiple of `√M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitude {
    pub value: f64,
    pub times_sqrt_m: bool,
}

impl Amplitude {
    pub fn at(&self, m: usize) -> f64 {
        if self.times_sqrt_m {
            self.value * (m as f64).sqrt()
        } else {
            self.value
        }
    }
}

impl FromStr for Amplitude {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, times_sqrt_m) = match s.strip_suffix("sqrtM") {
            Some(head) => (head.trim_end_matches('*'), true),
            None => (s, false),
        };
        let value = if num.is_empty() && times_sqrt_m {
            1.0
        } else {
            num.parse::<f64>()
                .map_err(|_| invalid(format!("bad amplitude {s:?}")))?
        };
        if !value.is_finite() || value < 0.0 {
            return Err(invalid(format!(
                "amplitude must be finite and nonnegative, got {s:?}"
            )));
        }
        Ok(Self {
            value,
            times_sqrt_m,
        })
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.times_sqrt_m {
            write!(f, "{}sqrtM", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// Deterministic signal matrix `C`, described independently of `M` where possible.
///
/// | label                             | matrix                                   |
/// |-----------------------------------|------------------------------------------|
/// | `zero`                            | `0`                                      |
/// | `diag:2,1,0,0`                    | diagonal, zero-padded to `M`             |
/// | `rank1:lambda=3`                  | `λ·e₁e₁ᵀ`                                |
/// | `equal:2sqrtM`                    | `t·Id`                                   |
/// | `ladder-linear:3sqrtM`            | `diag(t·(M − i + 1)/M)`, `i = 1..M`      |
/// | `ladder-geometric:4sqrtM:0.7`     | `diag(t·q^{i−1})`                        |
/// | `file:path`                       | read from CSV or raw file, must be `M×M` |
///
/// Amplitudes accept a `sqrtM` suffix meaning "times `√M`".
#[derive(Clone, Debug, PartialEq)]
pub enum CSpec {
    Zero,
    Diag(Vec<f64>),
    Rank1(Amplitude),
    Equal(Amplitude),
    LinearLadder(Amplitude),
    GeometricLadder(Amplitude, f64),
    File(PathBuf),
}

impl CSpec {
    pub fn build(&self, m: usize) -> Result<DenseMatrix> {
        if m == 0 {
            return Err(invalid("M must be at least 1"));
        }
        let diag = |f: &dyn Fn(usize) -> f64| {
            DenseMatrix::from_diagonal(&(0..m).map(f).collect::<Vec<_>>())
        };
        match self {
            Self::Zero => Ok(DenseMatrix::zeros(m, m)),
            Self::Diag(values) => {
                if values.len() > m {
                    return Err(invalid(format!(
                        "diagonal has {} entries but M = {m}",
                        values.len()
                    )));
                }
                diag(&|i| values.get(i).copied().unwrap_or(0.0))
            }
            Self::Rank1(a) => {
                let l = a.at(m);
                diag(&|i| if i == 0 { l } else { 0.0 })
            }
            Self::Equal(a) => {
                let t = a.at(m);
                diag(&|_| t)
            }
            Self::LinearLadder(a) => {
                let t = a.at(m);
                diag(&|i| t * (m - i) as f64 / m as f64)
            }
            Self::GeometricLadder(a, q) => {
                let t = a.at(m);
                diag(&|i| t * q.powi(i as i32))
            }
            Self::File(path) => {
                let c = read_matrix(path)?;
                if c.rows() != m || c.cols() != m {
                    return Err(invalid(format!(
                        "{} holds a {}×{} matrix, expected {m}×{m}",
                        path.display(),
                        c.rows(),
                        c.cols()
                    )));
                }
                Ok(c)
            }
        }
    }
}

impl FromStr for CSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number {t:?} in signal label {s:?}")))
        };
        match kind {
            "zero" if rest.is_empty() => Ok(Self::Zero),
            "diag" => {
                let values = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("diagonal entries must be finite"));
                }
                Ok(Self::Diag(values))
            }
            "rank1" => {
                let v = rest.strip_prefix("lambda=").unwrap_or(rest);
                Ok(Self::Rank1(v.parse()?))
            }
            "equal" => Ok(Self::Equal(rest.parse()?)),
            "ladder-linear" => Ok(Self::LinearLadder(rest.parse()?)),
            "ladder-geometric" => {
                let (a, q) = rest.split_once(':').ok_or_else(|| {
                    invalid("ladder-geometric needs top:ratio, e.g. ladder-geometric:4sqrtM:0.7")
                })?;
                let q = num(q)?;
                if !(q > 0.0 && q <= 1.0) {
                    return Err(invalid(format!(
                        "geometric ratio must lie in (0, 1], got {q}"
                    )));
                }
                Ok(Self::GeometricLadder(a.parse()?, q))
            }
            "file" if !rest.is_empty() => Ok(Self::File(PathBuf::from(rest))),
            _ => Err(invalid(format!("unknown C-spec {s:?}"))),
        }
    }
}

impl fmt::Display for CSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Diag(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "diag:{}", parts.join(","))
            }
            Self::Rank1(a) => write!(f, "rank1:lambda={a}"),
            Self::Equal(a) => write!(f, "equal:{a}"),
            Self::LinearLadder(a) => write!(f, "ladder-linear:{a}"),
            Self::GeometricLadder(a, q) => write!(f, "ladder-geometric:{a}:{q}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for CSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// One Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub r: usize,
    #[serde(rename = "C")]
    pub c: CSpec,
    pub dist: EntryDistribution,
    pub reps: usize,
    /// Root seed.
    pub seed: u64,
    #[serde(default)]
    pub experiment: u64,
    #[serde(default)]
    pub normalization: Normalization,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r >= self.m {
            return Err(invalid(format!(
                "rank {} must satisfy 1 ≤ r < M = {}",
                self.r, self.m
            )));
        }
        if self.reps < 2 {
            return Err(invalid(format!(
                "need at least 2 replications, got {}",
                self.reps
            )));
        }
        Ok(())
    }

    pub fn replication_seed(&self, k: u64) -> Seed {
        Seed::new(self.seed, self.experiment, k)
    }

    /// Variance and fourth moment of the entries actually added to `C`,
    /// after normalization.
    pub fn noise_moments(&self) -> (f64, f64) {
        let (v, m4) = (self.dist.variance(), self.dist.fourth_moment());
        match self.normalization {
            Normalization::None => (v, m4),
            Normalization::InvSqrtM => {
                let mf = self.m as f64;
                (v / mf, m4 / (mf * mf))
            }
        }
    }

    fn noise_key(&self) -> (usize, String, u64, u64, Normalization, usize) {
        (
            self.m,
            self.dist.to_string(),
            self.seed,
            self.experiment,
            self.normalization,
            self.reps,
        )
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M={} r={} C={} dist={} reps={} seed={} experiment={}",
            self.m, self.r, self.c, self.dist, self.reps, self.seed, self.experiment
        )?;
        if self.normalization == Normalization::InvSqrtM {
            write!(f, " normalization=inv-sqrt-M")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `sup Z`.
    ZSup,
    /// `sup Z¹`.
    Z1Sup,
    /// `sup Z²`.
    Z2Sup,
    /// `σ₁(E)`.
    Sigma1,
    /// `σ₁(E)²`.
    Sigma1Sq,
    /// `‖π_r X‖²_{S2} − σ²·r·M`.
    UnbiasedEnergy,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Self::ZSup,
        Self::Z1Sup,
        Self::Z2Sup,
        Self::Sigma1,
        Self::Sigma1Sq,
        Self::UnbiasedEnergy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ZSup => "z_sup",
            Self::Z1Sup => "z1_sup",
            Self::Z2Sup => "z2_sup",
            Self::Sigma1 => "sigma1",
            Self::Sigma1Sq => "sigma1_sq",
            Self::UnbiasedEnergy => "unbiased_energy",
        }
    }

    fn needs_suprema(&self) -> bool {
        matches!(self, Self::ZSup | Self::Z1Sup | Self::Z2Sup)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown statistic {s:?}")))
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

impl MCEstimate {
    /// Aggregates samples in the given order with compensated summation.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(invalid("an estimate needs at least 2 samples"));
        }
        let mean = compensated_sum(samples.iter().copied()) / n as f64;
        let ss = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
        let var = ss / (n - 1) as f64;
        Ok(Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Neumaier's compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Execution options; none of them affect the numbers produced.
#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Check `sup Z¹ ≤ Y` and `sup Z ≤ sup Z¹ + sup Z²` on every replication
    /// that computes the suprema.
    pub pathwise_checks: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            workers: None,
            pathwise_checks: true,
        }
    }
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(invalid("worker count must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn estimate(
    config: &ExperimentConfig,
    statistic: Statistic,
    opts: &McOptions,
) -> Result<MCEstimate> {
    Ok(estimate_all(config, &[statistic], opts)?.remove(0))
}

/// Several statistics of one configuration from the same draws.
pub fn estimate_all(
    config: &ExperimentConfig,
    statistics: &[Statistic],
    opts: &McOptions,
) -> Result<Vec<MCEstimate>> {
    Ok(estimate_grid(std::slice::from_ref(config), statistics, opts)?.remove(0))
}

struct Member {
    index: usize,
    model: SignalModel,
    config: ExperimentConfig,
}

struct SignalGroup {
    members: Vec<Member>,
}

struct NoiseGroup {
    m: usize,
    dist: EntryDistribution,
    seed: Seed,
    normalization: Normalization,
    reps: usize,
    signals: Vec<SignalGroup>,
}

/// Estimates `statistics` for every configuration; the result is indexed like
/// `configs`, then like `statistics`.
pub fn estimate_grid(
    configs: &[ExperimentConfig],
    statistics: &[Statistic],
    opts: &McOptions,
) -> Result<Vec<Vec<MCEstimate>>> {
    if statistics.is_empty() {
        return Err(invalid("no statistic requested"));
    }
    for c in configs {
        c.validate()?;
    }
    let groups = group_configs(configs)?;
    let mut out: Vec<Option<Vec<MCEstimate>>> = vec![None; configs.len()];
    for group in &groups {
        let per_rep = with_workers(opts.workers, || {
            (0..group.reps as u64)
                .into_par_iter()
                .map(|k| run_replication(group, k, statistics, opts))
                .collect::<Vec<_>>()
        })?;
        let mut samples: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        for rep in per_rep {
            for (index, values) in rep? {
                samples
                    .entry(index)
                    .or_insert_with(|| vec![Vec::with_capacity(group.reps); statistics.len()])
                    .iter_mut()
                    .zip(values)
                    .for_each(|(col, v)| col.push(v));
            }
        }
        for (index, cols) in samples {
            out[index] = Some(
                cols.iter()
                    .map(|c| MCEstimate::from_samples(c))
                    .collect::<Result<_>>()?,
            );
        }
    }
    Ok(out
        .into_iter()
        .map(|o| o.expect("every config belongs to a group"))
        .collect())
}

fn group_configs(configs: &[ExperimentConfig]) -> Result<Vec<NoiseGroup>> {
    let mut groups: Vec<NoiseGroup> = Vec::new();
    let mut keys = Vec::new();
    let mut by_noise: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, c) in configs.iter().enumerate() {
        let key = c.noise_key();
        if !by_noise.contains_key(&key) {
            keys.push(key.clone());
        }
        by_noise.entry(key).or_default().push(i);
    }
    for key in keys {
        let idx = &by_noise[&key];
        let first = &configs[idx[0]];
        let mut by_signal: Vec<(String, Vec<usize>)> = Vec::new();
        for &i in idx {
            let name = configs[i].c.to_string();
            match by_signal.iter_mut().find(|(n, _)| *n == name) {
                Some((_, v)) => v.push(i),
                None => by_signal.push((name, vec![i])),
            }
        }
        let mut signals = Vec::new();
        for (_, members) in by_signal {
            let c = configs[members[0]].c.build(first.m)?;
            let ranks: Vec<usize> = members.iter().map(|&i| configs[i].r).collect();
            let models = SignalModel::family(c, &ranks)?;
            signals.push(SignalGroup {
                members: members
                    .iter()
                    .zip(models)
                    .map(|(&index, model)| Member {
                        index,
                        model,
                        config: configs[index].clone(),
                    })
                    .collect(),
            });
        }
        groups.push(NoiseGroup {
            m: first.m,
            dist: first.dist,
            seed: Seed::new(first.seed, first.experiment, 0),
            normalization: first.normalization,
            reps: first.reps,
            signals,
        });
    }
    Ok(groups)
}

fn run_replication(
    group: &NoiseGroup,
    k: u64,
    statistics: &[Statistic],
    opts: &McOptions,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let seed = group.seed.with_replication(k);
    let wrap = |e: Error| match e {
        Error::PathwiseViolation { .. } => e,
        other => Error::ReplicationFailure {
            index: k,
            seed,
            source: Box::new(other),
        },
    };
    let e = sample_matrix(&group.dist, group.m, seed, group.normalization).map_err(wrap)?;
    let need_sup = statistics.iter().any(Statistic::needs_suprema);
    let noise = need_sup.then(|| NoiseGram::new(&e));
    let need_sigma = statistics
        .iter()
        .any(|s| matches!(s, Statistic::Sigma1 | Statistic::Sigma1Sq));
    let sigma1 = match (&noise, need_sigma) {
        (Some(n), _) => n.sigma1(),
        (None, true) => spectral_norm(e.as_nalgebra()),
        (None, false) => f64::NAN,
    };

    let mut out = Vec::new();
    for signal in &group.signals {
        let draw = match &noise {
            Some(n) => Some(signal.members[0].model.draw(&e, n).map_err(wrap)?),
            None => None,
        };
        for member in &signal.members {
            let sv = match &draw {
                Some(d) => Some(member.model.sup_values_from(d).map_err(wrap)?),
                None => None,
            };
            if let (Some(sv), true) = (&sv, opts.pathwise_checks) {
                check_pathwise(member, sv, k, seed)?;
            }
            let values = statistics
                .iter()
                .map(|s| match s {
                    Statistic::ZSup => Ok(sv.expect("suprema computed").z),
                    Statistic::Z1Sup => Ok(sv.expect("suprema computed").z1),
                    Statistic::Z2Sup => Ok(sv.expect("suprema computed").z2),
                    Statistic::Sigma1 => Ok(sigma1),
                    Statistic::Sigma1Sq => Ok(sigma1 * sigma1),
                    Statistic::UnbiasedEnergy => {
                        let (v, _) = member.config.noise_moments();
                        member.model.unbiased_energy(&e, v)
                    }
                })
                .collect::<Result<Vec<f64>>>()
                .map_err(wrap)?;
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(wrap(Error::NumericalFailure(format!(
                    "non-finite statistic {bad} for {}",
                    member.config
                ))));
            }
            out.push((member.index, values));
        }
    }
    Ok(out)
}

fn check_pathwise(member: &Member, sv: &SupValues, k: u64, seed: Seed) -> Result<()> {
    let cfg = &member.config;
    let y = pathwise_bound(member.model.spectrum(), cfg.m, cfg.r, sv.sigma1)?.y;
    if sv.z1 > y * (1.0 + PATHWISE_REL_TOL) {
        return Err(Error::PathwiseViolation {
            index: k,
            seed,
            detail: format!("sup Z¹ = {} exceeds Y = {y} ({cfg})", sv.z1),
        });
    }
    let slack = SUBADDITIVITY_REL_TOL * (1.0 + sv.energy_scale);
    if sv.z > sv.z1 + sv.z2 + slack {
        return Err(Error::PathwiseViolation {
            index: k,
            seed,
            detail: format!(
                "sup Z = {} exceeds sup Z¹ + sup Z² = {} ({cfg})",
                sv.z,
                sv.z1 + sv.z2
            ),
        });
    }
    Ok(())
}

/// One row of a calibration table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub config: ExperimentConfig,
    /// Monte Carlo estimate of `E sup Z`.
    pub estimate: MCEstimate,
    /// The expected-excess bound with constant 1.
    #[serde(with = "crate::bounds::ext_real")]
    pub excess_bound: f64,
    /// `estimate.mean / excess_bound`.
    pub ratio: f64,
}

/// Empirical constant of the expected-excess bound over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    /// Sorted by `M`, then `r`; ties keep grid order.
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
}

impl RatioReport {
    /// Largest ratio among rows with the given `M`.
    pub fn max_ratio_at(&self, m: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|row| row.config.m == m)
            .map(|row| row.ratio)
            .reduce(f64::max)
    }
}

pub fn ratio_report(grid: &[ExperimentConfig], opts: &McOptions) -> Result<RatioReport> {
    if grid.is_empty() {
        return Err(invalid("empty configuration grid"));
    }
    let estimates = estimate_grid(grid, &[Statistic::ZSup], opts)?;
    let mut spectra: Vec<(usize, String, crate::linalg::SingularSpectrum)> = Vec::new();
    let mut rows = Vec::with_capacity(grid.len());
    for (config, est) in grid.iter().zip(estimates) {
        let name = config.c.to_string();
        let spectrum = match spectra
            .iter()
            .find(|(m, n, _)| *m == config.m && *n == name)
        {
            Some((_, _, s)) => s.clone(),
            None => {
                let s = svd(&config.c.build(config.m)?)?.spectrum;
                spectra.push((config.m, name, s.clone()));
                s
            }
        };
        let (v, m4) = config.noise_moments();
        let bound = expected_excess_bound(&spectrum, config.m, config.r, v, m4)?.value;
        let estimate = est[0];
        rows.push(RatioRow {
            config: config.clone(),
            estimate,
            excess_bound: bound,
            ratio: estimate.mean / bound,
        });
    }
    rows.sort_by_key(|row| (row.config.m, row.config.r));
    let max_ratio = rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioReport { rows, max_ratio })
}

/// Signal shapes shared by the calibration grid and the verification suites.
pub const SIGNAL_SHAPES: [&str; 5] = [
    "zero",
    "ladder-linear:3sqrtM",
    "ladder-geometric:4sqrtM:0.7",
    "equal:2sqrtM",
    "rank1:lambda=4sqrtM",
];

/// The calibration grid: five signal shapes, four ranks and the five catalog
/// laws at size `m`.
///
/// Signals: zero; a linear ladder from `3√M`; a geometric ladder `4√M·0.7^{i−1}`;
/// the constant spectrum `2√M`; a rank-one spike `4√M`. Ranks: `1, ⌊M/4⌋, ⌊M/2⌋, M − 1`
/// (deduplicated).
pub fn calibration_grid(m: usize, reps: usize, seed: u64) -> Vec<ExperimentConfig> {
    let mut ranks = vec![1, m / 4, m / 2, m - 1];
    ranks.retain(|&r| r >= 1 && r < m);
    ranks.dedup();
    let mut grid = Vec::new();
    for dist in EntryDistribution::catalog() {
        for c in SIGNAL_SHAPES {
            for &r in &ranks {
                grid.push(ExperimentConfig {
                    m,
                    r,
                    c: c.parse().expect("static C-spec"),
                    dist,
                    reps,
                    seed,
                    experiment: 0,
                    normalization: Normalization::None,
                });
            }
        }
    }
    grid
}
