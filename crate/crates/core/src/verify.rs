//! Pathwise verification suites.
//!
//! Every check compares a left side with a right side plus a tolerance. A suite
//! runs one check family over `trials` seeded draws and reports each violation
//! with the seed that reproduces it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    drift_bound, pathwise_bound, rank_sandwich, trace_bound_rhs, TraceEqualityInstance,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{proj_diff_norms, projection_trace_form, DenseMatrix, OrthoProjection};
use crate::montecarlo::{with_workers, CSpec, PATHWISE_REL_TOL, SIGNAL_SHAPES};
use crate::randgen::{sample_matrix, sample_projection, EntryDistribution, Normalization, Seed};
use crate::zprocess::SignalModel;

/// Relative tolerance for identities such as `Z = Z¹ + Z²`.
pub const IDENTITY_REL_TOL: f64 = 1e-9;
/// Relative tolerance for the trace-bound equality instance.
pub const EQUALITY_REL_TOL: f64 = 1e-10;

/// `lhs ≤ rhs + tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.rhs == f64::INFINITY || self.lhs <= self.rhs + self.tol
    }
}

/// `sup Z¹ ≤ Y·(1 + 1e-8)` for one draw of the noise.
pub fn pathwise_check(model: &SignalModel, e: &DenseMatrix) -> Result<Check> {
    let sv = model.sup_values(e)?;
    let y = pathwise_bound(model.spectrum(), model.m(), model.r(), sv.sigma1)?.y;
    Ok(Check {
        lhs: sv.z1,
        rhs: y,
        tol: PATHWISE_REL_TOL * y,
    })
}

/// `tr(Aᵀ(P2 − P1)B) ≤ √(2r_M)‖A‖_{S∞}‖B‖_{S∞}‖P1 − P2‖_{S2}`.
pub fn trace_bound_check(
    a: &DenseMatrix,
    b: &DenseMatrix,
    p1: &OrthoProjection,
    p2: &OrthoProjection,
) -> Result<Check> {
    let lhs = projection_trace_form(a, p2, p1, b)?;
    let rhs = trace_bound_rhs(a, b, p1, p2)?;
    Ok(Check {
        lhs,
        rhs,
        tol: IDENTITY_REL_TOL * (1.0 + lhs.abs() + rhs),
    })
}

/// Drift of `‖P̃C‖²` below its maximum: the gap bound always, the tail bound
/// only when its gate is open.
pub fn drift_checks(model: &SignalModel, p: &OrthoProjection) -> Result<(Check, Option<Check>)> {
    let c = model.c();
    let lhs = p.energy(c) - model.pi_r().energy(c);
    let dist = proj_diff_norms(p, model.pi_r())?.s2;
    let bound = drift_bound(model.spectrum(), model.r(), dist)?;
    let tol = IDENTITY_REL_TOL * (1.0 + c.frobenius_sq());
    let gap = Check {
        lhs,
        rhs: bound.gap,
        tol,
    };
    let tail = bound.tail_applies.then_some(Check {
        lhs,
        rhs: bound.tail,
        tol,
    });
    Ok((gap, tail))
}

/// `|Z − (Z¹ + Z²)|` at `p`, against a tolerance relative to the energies involved.
pub fn decomposition_check(
    model: &SignalModel,
    e: &DenseMatrix,
    p: &OrthoProjection,
) -> Result<Check> {
    let d = model.z_at(e, p)?;
    let scale = model
        .observe(e)?
        .frobenius_sq()
        .max(model.c().frobenius_sq());
    Ok(Check {
        lhs: d.split_error(),
        rhs: 0.0,
        tol: IDENTITY_REL_TOL * (1.0 + scale),
    })
}

/// `r(M−r) ≤ r_M·M ≤ 2r(M−r)`.
pub fn sandwich_holds(m: usize, r: usize) -> bool {
    let (lo, mid, hi) = rank_sandwich(m, r);
    lo <= mid && mid <= hi
}

/// `|LHS − RHS| ≤ 1e-10·RHS` on the equality instance.
pub fn equality_check(m: usize, r: usize, alpha: f64, mu: f64, nu: f64) -> Result<Check> {
    let inst = TraceEqualityInstance::new(m, r, alpha, mu, nu)?;
    let (lhs, rhs) = (inst.lhs()?, inst.rhs()?);
    Ok(Check {
        lhs: (lhs - rhs).abs(),
        rhs: 0.0,
        tol: EQUALITY_REL_TOL * rhs.abs().max(f64::MIN_POSITIVE),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `sup Z¹ ≤ Y`.
    Pathwise,
    /// The trace-form bound and its equality instance.
    TraceBound,
    /// The two drift bounds at Haar-sampled projections.
    Drift,
    /// `Z = Z¹ + Z²` at sampled projections and at the maximizers.
    Decomposition,
    /// The rank sandwich for every `1 ≤ r < M' ≤ M`.
    Sandwich,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Self::Pathwise,
        Self::TraceBound,
        Self::Drift,
        Self::Decomposition,
        Self::Sandwich,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pathwise => "pathwise",
            Self::TraceBound => "trace-bound",
            Self::Drift => "drift",
            Self::Decomposition => "decomposition",
            Self::Sandwich => "sandwich",
        }
    }

    fn experiment(&self) -> u64 {
        match self {
            Self::Pathwise => 101,
            Self::TraceBound => 102,
            Self::Drift => 103,
            Self::Decomposition => 104,
            Self::Sandwich => 105,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub r: usize,
    pub dist: EntryDistribution,
    pub trials: usize,
    pub seed: u64,
    /// Fixed signal; when absent each trial cycles through the standard shapes
    /// and a Gaussian matrix.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CSpec>,
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r >= self.m {
            return Err(invalid(format!(
                "rank {} must satisfy 1 ≤ r < M = {}",
                self.r, self.m
            )));
        }
        if self.trials == 0 {
            return Err(invalid("need at least one trial"));
        }
        Ok(())
    }

    /// Seed of trial `k` in `suite`.
    pub fn trial_seed(&self, suite: Suite, k: u64) -> Seed {
        Seed::new(self.seed, suite.experiment(), k)
    }

    /// Signal used by trial `k`.
    pub fn trial_signal(&self, suite: Suite, k: u64) -> Result<DenseMatrix> {
        if let Some(c) = &self.c {
            return c.build(self.m);
        }
        let slot = (k % (SIGNAL_SHAPES.len() as u64 + 1)) as usize;
        match SIGNAL_SHAPES.get(slot) {
            Some(shape) => shape.parse::<CSpec>()?.build(self.m),
            None => sample_matrix(
                &EntryDistribution::gaussian(1.0)?,
                self.m,
                self.trial_seed(suite, k)
                    .with_experiment(suite.experiment() + 1000),
                Normalization::None,
            ),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub suite: Suite,
    pub trial: u64,
    pub seed: Seed,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

type Labelled = (Check, String);

fn run_trial(cfg: &VerifyConfig, suite: Suite, k: u64) -> Result<Vec<Labelled>> {
    let seed = cfg.trial_seed(suite, k);
    let sub = |n: u64| seed.with_experiment(suite.experiment() + 100 * n);
    let noise = || sample_matrix(&cfg.dist, cfg.m, seed, Normalization::None);
    let model = || SignalModel::new(cfg.trial_signal(suite, k)?, cfg.r);
    let mut out = Vec::new();
    match suite {
        Suite::Pathwise => {
            out.push((pathwise_check(&model()?, &noise()?)?, "sup Z¹ ≤ Y".into()));
        }
        Suite::TraceBound => {
            let a = sample_matrix(&cfg.dist, cfg.m, sub(1), Normalization::None)?;
            let b = sample_matrix(&cfg.dist, cfg.m, sub(2), Normalization::None)?;
            let p1 = sample_projection(cfg.m, cfg.r, sub(3))?;
            let p2 = sample_projection(cfg.m, cfg.r, sub(4))?;
            out.push((trace_bound_check(&a, &b, &p1, &p2)?, "trace bound".into()));
            if k == 0 && 2 * cfg.r <= cfg.m {
                out.push((
                    equality_check(cfg.m, cfg.r, 0.5, 1.0, 1.0)?,
                    "equality instance".into(),
                ));
            }
        }
        Suite::Drift => {
            let model = model()?;
            let p = sample_projection(cfg.m, cfg.r, sub(1))?;
            let (gap, tail) = drift_checks(&model, &p)?;
            out.push((gap, "gap drift bound".into()));
            if let Some(tail) = tail {
                out.push((tail, "tail drift bound".into()));
            }
        }
        Suite::Decomposition => {
            let model = model()?;
            let e = noise()?;
            let haar = sample_projection(cfg.m, cfg.r, sub(1))?;
            let maximizers = [model.z_sup(&e)?, model.z1_sup(&e)?, model.z2_sup(&e)?];
            let mut points = vec![("Haar", &haar), ("π_r", model.pi_r())];
            points.extend(
                ["argmax Z", "argmax Z¹", "argmax Z²"]
                    .into_iter()
                    .zip(maximizers.iter().map(|s| &s.maximizer)),
            );
            for (name, p) in points {
                out.push((
                    decomposition_check(&model, &e, p)?,
                    format!("Z = Z¹ + Z² at {name}"),
                ));
            }
        }
        Suite::Sandwich => {
            if k == 0 {
                for m in 2..=cfg.m {
                    for r in 1..m {
                        let (lo, mid, hi) = rank_sandwich(m, r);
                        let ok = sandwich_holds(m, r);
                        out.push((
                            Check {
                                lhs: if ok { 0.0 } else { 1.0 },
                                rhs: 0.0,
                                tol: 0.0,
                            },
                            format!("M={m} r={r}: {lo} ≤ {mid} ≤ {hi}"),
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs one suite. Numerical errors abort; failed checks are collected.
pub fn run_suite(cfg: &VerifyConfig, suite: Suite, workers: Option<usize>) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let per_trial: Vec<Result<Vec<Labelled>>> = with_workers(workers, || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|k| run_trial(cfg, suite, k))
            .collect()
    })?;
    let mut checks = 0;
    let mut violations = Vec::new();
    for (k, res) in per_trial.into_iter().enumerate() {
        let k = k as u64;
        let seed = cfg.trial_seed(suite, k);
        let labelled = res.map_err(|e| Error::ReplicationFailure {
            index: k,
            seed,
            source: Box::new(e),
        })?;
        checks += labelled.len();
        for (check, detail) in labelled {
            if !check.holds() {
                violations.push(Violation {
                    suite,
                    trial: k,
                    seed,
                    lhs: check.lhs,
                    rhs: check.rhs,
                    detail,
                });
            }
        }
    }
    Ok(SuiteOutcome {
        suite,
        checks,
        violations,
    })
}

pub fn run_all(cfg: &VerifyConfig, workers: Option<usize>) -> Result<Vec<SuiteOutcome>> {
    Suite::ALL
        .iter()
        .map(|&s| run_suite(cfg, s, workers))
        .collect()
}
