//! Large-`M` behaviour of the normalized model `E_M = M^{-1/2}(E_ij)_{i,j≤M}`:
//! localization of `λ₁(C_M + E_M)`, the quadratic form `ũᵀE_M E_Mᵀũ`, and
//! accuracy-driven rank selection.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, svd, DenseMatrix, SingularSpectrum};
use crate::randgen::{for_each_entry, sample_matrix, EntryDistribution, Normalization, Seed};

/// Parameters `(β, β′, c)` of the tail condition on a sequence `(uᵢ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceCondition {
    pub beta: f64,
    pub beta_prime: f64,
    pub c: f64,
}

impl SequenceCondition {
    pub fn new(beta: f64, beta_prime: f64, c: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 1.0) {
            return Err(invalid(format!("β must exceed 1, got {beta}")));
        }
        if !(beta_prime.is_finite() && beta_prime > 0.0) {
            return Err(invalid(format!("β′ must be positive, got {beta_prime}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("c must be positive, got {c}")));
        }
        Ok(Self {
            beta,
            beta_prime,
            c,
        })
    }
}

/// Asymptotic window for `λ₁(C_M + E_M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SingularInterval {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

/// `[√(λ₁² + σ²), √(λ₁² + 4σ² + 16σ²λ₁²/(λ₁² − λ₂²))]`.
///
/// ```
/// use rankproj::localization::singular_interval;
///
/// let iv = singular_interval(2.0, 0.0, 1.0).unwrap();
/// assert!((iv.lower - 5f64.sqrt()).abs() < 1e-15);
/// assert!((iv.upper - 24f64.sqrt()).abs() < 1e-15);
/// ```
pub fn singular_interval(lambda1: f64, lambda2: f64, sigma: f64) -> Result<SingularInterval> {
    if !(lambda2 >= 0.0 && lambda1 > lambda2 && lambda1.is_finite()) {
        return Err(invalid(format!(
            "need λ₁ > λ₂ ≥ 0, got λ₁ = {lambda1}, λ₂ = {lambda2}"
        )));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!(
            "σ must be finite and nonnegative, got {sigma}"
        )));
    }
    let (l1s, s2) = (lambda1 * lambda1, sigma * sigma);
    Ok(SingularInterval {
        lower: (l1s + s2).sqrt(),
        upper: (l1s + 4.0 * s2 + 16.0 * s2 * l1s / (l1s - lambda2 * lambda2)).sqrt(),
    })
}

/// `B = max(1, ⌊(M^{1/β} − 1)^β⌋)`.
///
/// The floor is taken with a relative guard of `1e-9`, so that exact integer
/// values such as `(27^{1/3} − 1)³ = 8` are not lost to rounding.
pub fn tail_index_b(m: usize, beta: f64) -> Result<usize> {
    if m == 0 {
        return Err(invalid("M must be at least 1"));
    }
    if !(beta.is_finite() && beta > 1.0) {
        return Err(invalid(format!("β must exceed 1, got {beta}")));
    }
    let raw = ((m as f64).powf(1.0 / beta) - 1.0).max(0.0).powf(beta);
    let b = (raw + 1e-9 * raw.max(1.0)).floor() as usize;
    Ok(b.clamp(1, m))
}

/// Tail condition evaluated at one prefix length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailVerdict {
    pub m: usize,
    pub b: usize,
    /// `Σ_{i=B}^M uᵢ² / Σ_{i=1}^M uᵢ²`.
    pub ratio: f64,
    /// `c·M^{−β′}`.
    pub threshold: f64,
    pub holds: bool,
}

/// Evaluates `Σ_{i=B}^M uᵢ² / Σ_{i=1}^M uᵢ² ≤ c·M^{−β′}` for every `M ≤ u.len()`.
pub fn check_tail_condition(u: &[f64], cond: &SequenceCondition) -> Result<Vec<TailVerdict>> {
    if u.iter().any(|x| !x.is_finite()) {
        return Err(invalid("sequence has non-finite entries"));
    }
    let mut prefix = Vec::with_capacity(u.len() + 1);
    prefix.push(0.0);
    for x in u {
        prefix.push(prefix.last().unwrap() + x * x);
    }
    (1..=u.len())
        .map(|m| {
            let total = prefix[m];
            if total == 0.0 {
                return Err(invalid(format!(
                    "sequence prefix of length {m} is identically zero"
                )));
            }
            let b = tail_index_b(m, cond.beta)?;
            let ratio = (prefix[m] - prefix[b - 1]) / total;
            let threshold = cond.c * (m as f64).powf(-cond.beta_prime);
            Ok(TailVerdict {
                m,
                b,
                ratio,
                threshold,
                holds: ratio <= threshold,
            })
        })
        .collect()
}

/// How the vector `u` is chosen at each size.
#[derive(Clone, Debug, PartialEq)]
pub enum URule {
    /// `uᵢ = 1`.
    Ones,
    /// `uᵢ = 1` for `i ≤ k`, else 0.
    Finite(usize),
    /// An explicit sequence, long enough for every size requested.
    Custom(Vec<f64>),
}

impl URule {
    pub fn prefix(&self, m: usize) -> Result<Vec<f64>> {
        let u = match self {
            Self::Ones => vec![1.0; m],
            Self::Finite(k) => (0..m).map(|i| if i < *k { 1.0 } else { 0.0 }).collect(),
            Self::Custom(v) => {
                if v.len() < m {
                    return Err(invalid(format!(
                        "custom sequence has {} entries, {m} needed",
                        v.len()
                    )));
                }
                v[..m].to_vec()
            }
        };
        if u.iter().all(|x| *x == 0.0) {
            return Err(invalid(format!(
                "u is identically zero on the first {m} entries"
            )));
        }
        Ok(u)
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            Self::Ones => 1.0,
            Self::Finite(k) => {
                if i < *k {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Custom(v) => v[i],
        }
    }
}

/// `ones`, `finite:k`, or `file:path` (numbers separated by commas or whitespace).
impl FromStr for URule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ones" {
            return Ok(Self::Ones);
        }
        if let Some(k) = s.strip_prefix("finite:") {
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad support size in {s:?}")))?;
            if k == 0 {
                return Err(invalid("finite support must contain at least one index"));
            }
            return Ok(Self::Finite(k));
        }
        if let Some(path) = s.strip_prefix("file:") {
            let text = std::fs::read_to_string(PathBuf::from(path))?;
            let v = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| invalid(format!("cannot parse {t:?} in {path}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self::Custom(v));
        }
        Err(invalid(format!("unknown u-rule {s:?}")))
    }
}

impl fmt::Display for URule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ones => write!(f, "ones"),
            Self::Finite(k) => write!(f, "finite:{k}"),
            Self::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

/// `ũᵀ·E·Eᵀ·ũ` with `ũ = u/‖u‖`; `e_norm` is the already normalized matrix.
pub fn covariance_quadratic_form(u: &[f64], e_norm: &DenseMatrix) -> Result<f64> {
    let m = e_norm.rows();
    if u.len() != m {
        return Err(invalid(format!(
            "u has {} entries, matrix has {m} rows",
            u.len()
        )));
    }
    let norm_sq: f64 = u.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return Err(invalid("u must not be zero"));
    }
    let ut = nalgebra::DVector::from_iterator(m, u.iter().map(|x| x / norm_sq.sqrt()));
    Ok(e_norm.as_nalgebra().tr_mul(&ut).norm_squared())
}

/// `ũᵀ·E·ṽ` with `ũ = u/‖u‖`, `ṽ = v/‖v‖`: the cross term between a rank-one
/// signal `λ·ũṽᵀ` and the normalized noise.
pub fn cross_term(u: &[f64], v: &[f64], e_norm: &DenseMatrix) -> Result<f64> {
    let m = e_norm.rows();
    if u.len() != m || v.len() != m {
        return Err(invalid("u and v must have one entry per row"));
    }
    let unit = |x: &[f64]| {
        let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n == 0.0 {
            Err(invalid("u and v must not be zero"))
        } else {
            Ok(nalgebra::DVector::from_iterator(m, x.iter().map(|a| a / n)))
        }
    };
    let (ut, vt) = (unit(u)?, unit(v)?);
    Ok(ut.dot(&(e_norm.as_nalgebra() * vt)))
}

/// `Z_M = ũ_Mᵀ E_M E_Mᵀ ũ_M` and the cross term `ũ_Mᵀ E_M ũ_M` for every
/// `M = 1..=m_max` of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub rule: URule,
    /// `z[M − 1] = Z_M`.
    pub z: Vec<f64>,
    /// `cross[M − 1] = ũ_Mᵀ E_M ũ_M`.
    pub cross: Vec<f64>,
}

impl Trajectory {
    pub fn at(&self, m: usize) -> f64 {
        self.z[m - 1]
    }

    pub fn cross_at(&self, m: usize) -> f64 {
        self.cross[m - 1]
    }

    /// `max |Z_M − target|` over `lo < M ≤ hi`.
    pub fn window_max_deviation(&self, lo: usize, hi: usize, target: f64) -> f64 {
        self.z[lo..hi]
            .iter()
            .map(|z| (z - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Trajectories for several `u` rules along one nested realization.
///
/// Entries arrive in shell order, so the matrix at size `M` is exactly the
/// leading block of every larger one. The running column sums
/// `w_j = Σ_{i≤M} uᵢ E_ij` give `Z_M = Σ_j w_j² / (M·‖u‖²)` and
/// `ũᵀE_Mũ = Σ_j u_j w_j / (√M·‖u‖²)` in `O(M)` per size.
pub fn slln_trajectories(
    rules: &[URule],
    dist: &EntryDistribution,
    m_max: usize,
    seed: Seed,
) -> Result<Vec<Trajectory>> {
    if m_max == 0 {
        return Err(invalid("M must be at least 1"));
    }
    let us: Vec<Vec<f64>> = rules
        .iter()
        .map(|r| {
            r.prefix(m_max)?;
            Ok((0..m_max).map(|i| r.value(i)).collect())
        })
        .collect::<Result<_>>()?;
    let mut w = vec![vec![0.0; m_max]; rules.len()];
    let mut norm_sq = vec![0.0; rules.len()];
    let mut out: Vec<Trajectory> = rules
        .iter()
        .map(|r| Trajectory {
            rule: r.clone(),
            z: Vec::with_capacity(m_max),
            cross: Vec::with_capacity(m_max),
        })
        .collect();

    let mut shell = 0usize;
    let finish_shell =
        |s: usize, w: &Vec<Vec<f64>>, norm_sq: &mut Vec<f64>, out: &mut Vec<Trajectory>| {
            let m = s + 1;
            for (k, u) in us.iter().enumerate() {
                norm_sq[k] += u[s] * u[s];
                let (ss, cross) = if norm_sq[k] > 0.0 {
                    let ss: f64 = w[k][..m].iter().map(|x| x * x).sum();
                    let c: f64 = w[k][..m].iter().zip(&u[..m]).map(|(a, b)| a * b).sum();
                    (
                        ss / (m as f64 * norm_sq[k]),
                        c / ((m as f64).sqrt() * norm_sq[k]),
                    )
                } else {
                    (f64::NAN, f64::NAN)
                };
                out[k].z.push(ss);
                out[k].cross.push(cross);
            }
        };
    let mut pending = 2 * shell + 1;
    for_each_entry(dist, m_max, seed, |i, j, x| {
        for (k, u) in us.iter().enumerate() {
            w[k][j] += u[i] * x;
        }
        pending -= 1;
        if pending == 0 {
            finish_shell(shell, &w, &mut norm_sq, &mut out);
            shell += 1;
            pending = 2 * shell + 1;
        }
    });
    Ok(out)
}

/// `(M, Z_M)` at the grid points of one realization.
pub fn slln_trajectory(
    rule: &URule,
    dist: &EntryDistribution,
    grid: &[usize],
    seed: Seed,
) -> Result<Vec<(usize, f64)>> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("M-grid must be positive and strictly increasing"));
    }
    let m_max = *grid.last().unwrap();
    let t = slln_trajectories(std::slice::from_ref(rule), dist, m_max, seed)?.remove(0);
    grid.iter()
        .map(|&m| {
            let z = t.at(m);
            if z.is_nan() {
                Err(invalid(format!(
                    "u is identically zero on the first {m} entries"
                )))
            } else {
                Ok((m, z))
            }
        })
        .collect()
}

/// `σ₁` of one normalized noise draw.
pub fn noise_top_singular_value(dist: &EntryDistribution, m: usize, seed: Seed) -> Result<f64> {
    let e = sample_matrix(dist, m, seed, Normalization::InvSqrtM)?;
    Ok(spectral_norm(e.as_nalgebra()))
}

/// `λ₁(C + E_M)` for one normalized noise draw.
pub fn deformed_top_singular_value(
    c: &DenseMatrix,
    dist: &EntryDistribution,
    seed: Seed,
) -> Result<f64> {
    let e = sample_matrix(dist, c.rows(), seed, Normalization::InvSqrtM)?;
    Ok(spectral_norm(c.checked_add(&e)?.as_nalgebra()))
}

/// Empirical stand-ins for `liminf` and `limsup`: the minimum and maximum of
/// the observations at the largest sizes.
pub fn extreme_surrogates(values: &[f64]) -> Option<(f64, f64)> {
    let lo = values.iter().copied().reduce(f64::min)?;
    let hi = values.iter().copied().reduce(f64::max)?;
    Some((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankSelectionConfig {
    /// Target accuracy `α ∈ (0, 1]`.
    pub alpha: f64,
    /// Known noise variance, used by [`empirical_rank_select`].
    pub sigma_sq: f64,
}

impl RankSelectionConfig {
    pub fn new(alpha: f64, sigma_sq: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
        }
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(invalid(format!(
                "σ² must be finite and nonnegative, got {sigma_sq}"
            )));
        }
        Ok(Self { alpha, sigma_sq })
    }
}

/// Relative slack when comparing an energy ratio with `α`.
const ALPHA_REL_TOL: f64 = 1e-12;

/// Smallest `r` whose cumulative energies reach the fraction `α` of the last one.
fn smallest_reaching(energies: &[f64], alpha: f64) -> usize {
    let total = *energies.last().expect("non-empty");
    energies
        .iter()
        .position(|e| *e >= alpha * total * (1.0 - ALPHA_REL_TOL))
        .map_or(energies.len(), |k| k + 1)
}

/// Smallest `r` with `Σ_{i≤r} λᵢ² ≥ α·Σ λᵢ²`.
///
/// ```
/// use rankproj::linalg::SingularSpectrum;
/// use rankproj::localization::{rank_select, RankSelectionConfig};
///
/// let s = SingularSpectrum::new(vec![4.0, 3.0, 0.0]).unwrap();
/// let pick = |alpha| rank_select(&s, &RankSelectionConfig::new(alpha, 0.0).unwrap()).unwrap();
/// assert_eq!(pick(0.64), 1);
/// assert_eq!(pick(0.65), 2);
/// assert_eq!(pick(1.0), 2);
/// ```
pub fn rank_select(spectrum: &SingularSpectrum, cfg: &RankSelectionConfig) -> Result<usize> {
    if spectrum.is_zero() {
        return Err(invalid("rank selection needs a nonzero spectrum"));
    }
    let energies: Vec<f64> = (1..=spectrum.len())
        .map(|r| spectrum.top_energy(r))
        .collect();
    Ok(smallest_reaching(&energies, cfg.alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOutcome {
    Rank(usize),
    /// Every bias-corrected energy is zero.
    NoDetectableSignal,
}

/// Rank selection on an observed `X` with noise variance `σ²` known.
///
/// The energies are the bias-corrected `ê_r = max(0, Σ_{i≤r} λᵢ(X)² − σ²rM)`.
/// They increase exactly while `λ_r(X)² > σ²M`; the largest such `r` is the
/// cap, and the selected rank is the smallest `r` with `ê_r ≥ α·ê_cap`.
pub fn empirical_rank_select(x: &DenseMatrix, cfg: &RankSelectionConfig) -> Result<RankOutcome> {
    let spectrum = svd(x)?.spectrum;
    let m = x.rows() as f64;
    let corrected: Vec<f64> = (1..=spectrum.len())
        .map(|r| (spectrum.top_energy(r) - cfg.sigma_sq * r as f64 * m).max(0.0))
        .collect();
    let mut cap = 0;
    while cap < corrected.len() && corrected[cap] > if cap == 0 { 0.0 } else { corrected[cap - 1] }
    {
        cap += 1;
    }
    if cap == 0 {
        return Ok(RankOutcome::NoDetectableSignal);
    }
    Ok(RankOutcome::Rank(smallest_reaching(
        &corrected[..cap],
        cfg.alpha,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_reference_values() {
        let iv = singular_interval(1.0, 0.0, 0.0).unwrap();
        assert_eq!((iv.lower, iv.upper), (1.0, 1.0));
        let iv = singular_interval(8.0, 0.0, 1.0).unwrap();
        assert!((iv.upper - 84f64.sqrt()).abs() < 1e-14);
        assert!(iv.upper < 8.0 + 2.0);
        let iv = singular_interval(2.0, 0.0, 1.0).unwrap();
        assert!(iv.upper > 2.0 + 2.0);
        assert!(singular_interval(1.0, 1.0, 1.0).is_err());
        assert!(singular_interval(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn tail_index_values() {
        assert_eq!(tail_index_b(16, 2.0).unwrap(), 9);
        assert_eq!(tail_index_b(1, 3.0).unwrap(), 1);
        assert_eq!(tail_index_b(1_000_000, 2.0).unwrap(), 998_001);
        assert_eq!(tail_index_b(27, 3.0).unwrap(), 8);
        assert!(tail_index_b(10, 1.0).is_err());
    }

    #[test]
    fn tail_condition_cases() {
        let cond = SequenceCondition::new(2.0, 0.5, 3.0).unwrap();
        let mut finite = vec![0.0; 400];
        finite[0] = 1.0;
        finite[1] = 1.0;
        let v = check_tail_condition(&finite, &cond).unwrap();
        assert!(v
            .iter()
            .filter(|t| t.b > 2)
            .all(|t| t.holds && t.ratio == 0.0));

        let ones = vec![1.0; 2000];
        assert!(check_tail_condition(&ones, &cond)
            .unwrap()
            .iter()
            .all(|t| t.holds));

        let exploding: Vec<f64> = (1..=200).map(|i| 2f64.powi(i)).collect();
        let v = check_tail_condition(&exploding, &cond).unwrap();
        assert!(v.last().unwrap().ratio > 0.99 && !v.last().unwrap().holds);

        assert!(check_tail_condition(&[0.0, 1.0], &cond).is_err());
    }

    #[test]
    fn quadratic_form_hand_computation() {
        let e = DenseMatrix::from_row_major(2, 2, vec![1.0; 4])
            .unwrap()
            .scaled(0.5f64.sqrt())
            .unwrap();
        assert!((covariance_quadratic_form(&[1.0, 0.0], &e).unwrap() - 1.0).abs() < 1e-15);
        assert!(covariance_quadratic_form(&[0.0, 0.0], &e).is_err());
    }

    #[test]
    fn streaming_matches_dense() {
        let dist = EntryDistribution::gaussian(1.0).unwrap();
        let seed = Seed::new(3, 1, 0);
        let rules = [
            URule::Ones,
            URule::Finite(2),
            URule::Custom((1..=20).map(|i| 1.0 / i as f64).collect()),
        ];
        let traj = slln_trajectories(&rules, &dist, 20, seed).unwrap();
        for m in [1, 2, 7, 20] {
            let e = sample_matrix(&dist, m, seed, Normalization::InvSqrtM).unwrap();
            for (rule, t) in rules.iter().zip(&traj) {
                let u = rule.prefix(m).unwrap();
                let dense = covariance_quadratic_form(&u, &e).unwrap();
                assert!(
                    (t.at(m) - dense).abs() < 1e-12 * dense.max(1.0),
                    "{rule} M={m}"
                );
                let cross = cross_term(&u, &u, &e).unwrap();
                assert!((t.cross_at(m) - cross).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_support_is_mean_of_squares() {
        let dist = EntryDistribution::rademacher(1.0).unwrap();
        let t = slln_trajectory(&URule::Finite(1), &dist, &[5, 50], Seed::root(1)).unwrap();
        assert!(t.iter().all(|(_, z)| (z - 1.0).abs() < 1e-12));
        assert!(slln_trajectory(&URule::Ones, &dist, &[5, 5], Seed::root(1)).is_err());
    }

    #[test]
    fn quadratic_form_invariant_under_sign_and_scale() {
        let dist = EntryDistribution::uniform(1.0).unwrap();
        let e = sample_matrix(&dist, 6, Seed::root(2), Normalization::InvSqrtM).unwrap();
        let u = vec![0.3, -1.0, 2.0, 0.0, 0.5, 1.5];
        let base = covariance_quadratic_form(&u, &e).unwrap();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let scaled: Vec<f64> = u.iter().map(|x| 4.0 * x).collect();
        assert_eq!(covariance_quadratic_form(&neg, &e).unwrap(), base);
        assert_eq!(covariance_quadratic_form(&scaled, &e).unwrap(), base);
    }

    #[test]
    fn u_rule_parsing() {
        assert_eq!("ones".parse::<URule>().unwrap(), URule::Ones);
        assert_eq!("finite:3".parse::<URule>().unwrap(), URule::Finite(3));
        assert!("finite:0".parse::<URule>().is_err());
        assert!("twos".parse::<URule>().is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.txt");
        std::fs::write(&path, "1, 2\n3").unwrap();
        let rule: URule = format!("file:{}", path.display()).parse().unwrap();
        assert_eq!(rule.prefix(3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(rule.prefix(4).is_err());
    }

    #[test]
    fn rank_select_rejects_zero() {
        let s = SingularSpectrum::new(vec![0.0, 0.0]).unwrap();
        let cfg = RankSelectionConfig::new(0.5, 0.0).unwrap();
        assert!(rank_select(&s, &cfg).is_err());
        assert!(RankSelectionConfig::new(0.0, 0.0).is_err());
        assert!(RankSelectionConfig::new(1.1, 0.0).is_err());
    }

    #[test]
    fn noiseless_empirical_selection_matches_oracle() {
        let c = DenseMatrix::from_diagonal(&[4.0, 3.0, 1.0, 0.0]).unwrap();
        let spectrum = svd(&c).unwrap().spectrum;
        for alpha in [0.3, 0.64, 0.65, 0.9, 0.97, 1.0] {
            let cfg = RankSelectionConfig::new(alpha, 0.0).unwrap();
            assert_eq!(
                empirical_rank_select(&c, &cfg).unwrap(),
                RankOutcome::Rank(rank_select(&spectrum, &cfg).unwrap())
            );
        }
    }

    #[test]
    fn pure_noise_below_threshold_is_undetectable() {
        let x = DenseMatrix::from_diagonal(&[0.5, 0.1, 0.1]).unwrap();
        let cfg = RankSelectionConfig::new(0.9, 1.0).unwrap();
        assert_eq!(
            empirical_rank_select(&x, &cfg).unwrap(),
            RankOutcome::NoDetectableSignal
        );
    }
}
