//! Closed-form bounds on the projection-excess process.
//!
//! Everything here is a deterministic function of the singular values
//! `λ₁ ≥ λ₂ ≥ …` of the signal, the size `M`, the rank `r` and moments of the
//! noise. Quantities that can be infinite (a vanishing spectral gap or a
//! vanishing `λ_r`) are IEEE `+∞`; `f64::min` then ignores them naturally.
//!
//! Notation used throughout:
//!
//! * `r_M = min(r, M − r)`, the largest possible rank of `P̃ − π_r` halved;
//! * `Δ_r = Σ_{i=r+1}^{2r} λᵢ²`, with `λᵢ = 0` past the end of the spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    proj_diff_norms, schatten, DenseMatrix, OrthoProjection, Schatten, SingularSpectrum,
};
use crate::randgen::EntryDistribution;

/// Relative slack granted to `m₄ ≥ σ⁴` so that exactly-Jensen laws (Rademacher)
/// survive rounding.
const JENSEN_SLACK: f64 = 1e-12;

pub fn r_m(m: usize, r: usize) -> usize {
    r.min(m.saturating_sub(r))
}

fn check_rank_below(m: usize, r: usize) -> Result<()> {
    if r == 0 || r >= m {
        return Err(invalid(format!("rank {r} must satisfy 1 ≤ r < M = {m}")));
    }
    Ok(())
}

fn check_moments(sigma_sq: f64, m4: f64) -> Result<()> {
    if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
        return Err(invalid(format!(
            "variance must be positive, got {sigma_sq}"
        )));
    }
    if !m4.is_finite() || m4 < sigma_sq * sigma_sq * (1.0 - JENSEN_SLACK) {
        return Err(invalid(format!(
            "fourth moment {m4} is below the squared variance {}",
            sigma_sq * sigma_sq
        )));
    }
    Ok(())
}

/// `x/y`, or `+∞` when `y = 0`.
fn ratio_or_inf(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else {
        f64::INFINITY
    }
}

/// Per-draw bound on `sup Z¹` given the largest noise singular value `σ₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathwiseBound {
    /// `4·r_M·λ₁·σ₁`.
    pub i_prime: f64,
    /// `4·r_M·λ₁²σ₁²/(λ_r² − λ_{r+1}²)`.
    pub ii_prime: f64,
    /// `max(4·√(r_M·Δ_r)·(λ₁/λ_r)·σ₁, 8·r_M·(λ₁²/λ_r²)·σ₁²)`.
    pub iii_prime: f64,
    pub y: f64,
}

/// `Y = min(I′, II′, III′)`, an upper bound on `sup Z¹` for every draw of the
/// noise with largest singular value `sigma1`.
pub fn pathwise_bound(
    spectrum: &SingularSpectrum,
    m: usize,
    r: usize,
    sigma1: f64,
) -> Result<PathwiseBound> {
    check_rank_below(m, r)?;
    if !(sigma1.is_finite() && sigma1 >= 0.0) {
        return Err(invalid(format!(
            "σ₁ must be finite and nonnegative, got {sigma1}"
        )));
    }
    let rm = r_m(m, r) as f64;
    let l1 = spectrum.lambda(1);
    let lr = spectrum.lambda(r);
    let gap = lr * lr - spectrum.lambda(r + 1).powi(2);
    let delta = spectrum.tail_energy(r);

    let i_prime = 4.0 * rm * l1 * sigma1;
    let ii_prime = ratio_or_inf(4.0 * rm * l1 * l1 * sigma1 * sigma1, gap);
    let iii_prime = if lr > 0.0 {
        let q = l1 / lr;
        (4.0 * (rm * delta).sqrt() * q * sigma1).max(8.0 * rm * q * q * sigma1 * sigma1)
    } else {
        f64::INFINITY
    };
    Ok(PathwiseBound {
        i_prime,
        ii_prime,
        iii_prime,
        y: i_prime.min(ii_prime).min(iii_prime),
    })
}

/// Bound on `E sup Z` for any centered i.i.d. noise with variance `σ²` and
/// fourth moment `m₄`, up to a universal constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessBound {
    /// `σ² + √m₄ + (λ₁/√M)(σ + m₄^{1/4})`.
    pub i: f64,
    /// `λ₁²/(λ_r² − λ_{r+1}²)·(σ² + √m₄)`.
    pub ii: f64,
    /// `λ₁²/λ_r²·(σ² + √m₄) + √(λ₁²Δ_r / (r(M−r)λ_r²))·(σ + m₄^{1/4})`.
    pub iii: f64,
    /// `r(M−r)·min(I, II, III)`.
    pub value: f64,
}

/// Evaluates the expected-excess bound with constant 1.
///
/// ```
/// use rankproj::bounds::expected_excess_bound;
/// use rankproj::linalg::SingularSpectrum;
///
/// let s = SingularSpectrum::new(vec![2.0, 1.0, 0.0, 0.0]).unwrap();
/// let b = expected_excess_bound(&s, 4, 1, 1.0, 3.0).unwrap();
/// assert!((b.ii - 4.0 / 3.0 * (1.0 + 3f64.sqrt())).abs() < 1e-12);
/// assert!((b.value - 3.0 * b.ii).abs() < 1e-12);
/// ```
pub fn expected_excess_bound(
    spectrum: &SingularSpectrum,
    m: usize,
    r: usize,
    sigma_sq: f64,
    m4: f64,
) -> Result<ExcessBound> {
    check_rank_below(m, r)?;
    check_moments(sigma_sq, m4)?;
    let second = sigma_sq + m4.sqrt();
    let first = sigma_sq.sqrt() + m4.sqrt().sqrt();
    let l1 = spectrum.lambda(1);
    let lr = spectrum.lambda(r);
    let gap = lr * lr - spectrum.lambda(r + 1).powi(2);
    let delta = spectrum.tail_energy(r);
    let mf = m as f64;
    let rf = r as f64;

    let i = second + l1 / mf.sqrt() * first;
    let ii = ratio_or_inf(l1 * l1, gap) * second;
    let iii = if lr > 0.0 {
        let q2 = (l1 / lr).powi(2);
        q2 * second + (q2 * delta / (rf * (mf - rf))).sqrt() * first
    } else {
        f64::INFINITY
    };
    let value = rf * (mf - rf) * i.min(ii).min(iii);
    Ok(ExcessBound { i, ii, iii, value })
}

/// Scalars of the Gaussian bound: with `s = λ₁/(σ√M)`,
/// `a = 1 + s`, `b = λ₁²/λ_r²`, `c = λ₁²/(λ_r² − λ_{r+1}²)`, `d = √(Δ_r/(r·λ_r²))·s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GaussianTerms {
    pub fn new(spectrum: &SingularSpectrum, m: usize, r: usize, sigma: f64) -> Result<Self> {
        if r == 0 || 2 * r > m {
            return Err(Error::OutOfHypothesis(format!(
                "the Gaussian bound needs 1 ≤ r ≤ M/2, got r = {r}, M = {m}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("σ must be positive, got {sigma}")));
        }
        let lr = spectrum.lambda(r);
        if lr <= 0.0 {
            return Err(Error::OutOfHypothesis(format!(
                "the Gaussian bound needs rank(C) ≥ r, but λ_{r} = 0"
            )));
        }
        let l1 = spectrum.lambda(1);
        let s = l1 / (sigma * (m as f64).sqrt());
        let gap = lr * lr - spectrum.lambda(r + 1).powi(2);
        Ok(Self {
            a: 1.0 + s,
            b: (l1 / lr).powi(2),
            c: ratio_or_inf(l1 * l1, gap),
            d: (spectrum.tail_energy(r) / (r as f64 * lr * lr)).sqrt() * s,
        })
    }

    /// `min(b, a) + min(d, c)`.
    pub fn two_min_sum(&self) -> f64 {
        self.b.min(self.a) + self.d.min(self.c)
    }

    /// `min(a, c, b + d)`, the Gaussian specialization of the excess bound's
    /// three-way minimum in units of `σ²·r·M`.
    pub fn three_way_min(&self) -> f64 {
        self.a.min(self.c).min(self.b + self.d)
    }
}

/// Bound on `E sup Z` for Gaussian noise:
/// `σ²rM·[min(λ₁²/λ_r², 1 + λ₁/(σ√M)) + min(√(Δ_r/(rλ_r²))·λ₁/(σ√M), λ₁²/(λ_r² − λ_{r+1}²))]`.
///
/// Defined only for `r ≤ M/2` and `λ_r > 0`; other inputs are refused with
/// [`Error::OutOfHypothesis`].
pub fn gaussian_bound(spectrum: &SingularSpectrum, m: usize, r: usize, sigma: f64) -> Result<f64> {
    let t = GaussianTerms::new(spectrum, m, r, sigma)?;
    Ok(sigma * sigma * (r * m) as f64 * t.two_min_sum())
}

/// The comparison between the Gaussian bound and the three-way minimum, as a
/// chain of six quantities that must be nondecreasing:
///
/// ```text
/// min(b,a) + min(d,c)
///   ≤ min(a + d, b + c, b + d)
///   ≤ 2·min(a, c, b + d)
///   ≤ 2·min(a, b + c, b + d)
///   = 2·min(a, b + min(c, d))
///   ≤ 2·(min(b,a) + min(d,c))
/// ```
///
/// It follows that the two-min sum and the three-way minimum agree within a
/// factor of 2 in both directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinEquivalence {
    pub terms: GaussianTerms,
    pub chain: [f64; 6],
}

impl MinEquivalence {
    pub fn new(spectrum: &SingularSpectrum, m: usize, r: usize, sigma: f64) -> Result<Self> {
        let t = GaussianTerms::new(spectrum, m, r, sigma)?;
        let (a, b, c, d) = (t.a, t.b, t.c, t.d);
        let chain = [
            t.two_min_sum(),
            (a + d).min(b + c).min(b + d),
            2.0 * t.three_way_min(),
            2.0 * a.min(b + c).min(b + d),
            2.0 * a.min(b + c.min(d)),
            2.0 * t.two_min_sum(),
        ];
        Ok(Self { terms: t, chain })
    }

    /// Index of the first link that fails, comparing with relative slack `tol`.
    pub fn first_broken_link(&self, tol: f64) -> Option<usize> {
        let c = &self.chain;
        (0..5).find(|&k| {
            let (lo, hi) = (c[k], c[k + 1]);
            if k == 3 {
                (lo - hi).abs() > tol * lo.abs().max(hi.abs())
            } else {
                lo > hi * (1.0 + tol)
            }
        })
    }

    pub fn gaussian_sum(&self) -> f64 {
        self.chain[0]
    }

    pub fn three_way_min(&self) -> f64 {
        self.chain[2] / 2.0
    }
}

/// `M·(σ² + √m₄)`, the constant-1 bound on `E σ₁(E)²`.
pub fn latala_bound(m: usize, sigma_sq: f64, m4: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("M must be at least 1"));
    }
    check_moments(sigma_sq, m4)?;
    Ok(m as f64 * (sigma_sq + m4.sqrt()))
}

/// `√(2r_M)·‖A‖_{S∞}·‖B‖_{S∞}·‖P1 − P2‖_{S2}`, an upper bound on
/// `tr(Aᵀ(P2 − P1)B)` for any pair of rank-r projections.
pub fn trace_bound_rhs(
    a: &DenseMatrix,
    b: &DenseMatrix,
    p1: &OrthoProjection,
    p2: &OrthoProjection,
) -> Result<f64> {
    let m = p1.dim();
    if [a, b].iter().any(|x| x.rows() != m || x.cols() != m) {
        return Err(invalid("trace_bound_rhs: matrices must be M×M"));
    }
    let d = proj_diff_norms(p1, p2)?;
    let rm = r_m(m, p1.rank()) as f64;
    Ok((2.0 * rm).sqrt() * schatten(a, Schatten::Inf) * schatten(b, Schatten::Inf) * d.s2)
}

/// A configuration on which the trace bound holds with equality.
///
/// `P1` projects onto `e₁, …, e_r`; `P2` onto `√(1−α²)·eᵢ + α·e_{r+i}`;
/// `A = μ·Id`; `B = ν(P1 − P2)`. Then `‖P1 − P2‖_{S2} = α√(2r)`,
/// `‖P1 − P2‖_{S∞} = α` and `tr(Aᵀ(P1 − P2)B) = 2rμνα²`, which equals the bound.
#[derive(Clone, Debug)]
pub struct TraceEqualityInstance {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub p1: OrthoProjection,
    pub p2: OrthoProjection,
}

impl TraceEqualityInstance {
    pub fn new(m: usize, r: usize, alpha: f64, mu: f64, nu: f64) -> Result<Self> {
        if r == 0 || 2 * r > m {
            return Err(invalid(format!(
                "the equality instance needs 1 ≤ r and 2r ≤ M, got r = {r}, M = {m}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("α must lie in [0, 1], got {alpha}")));
        }
        if !(mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite()) {
            return Err(invalid("μ and ν must be positive"));
        }
        let p1 = OrthoProjection::coordinate(m, r)?;
        let co = (1.0 - alpha * alpha).sqrt();
        let basis = nalgebra::DMatrix::from_fn(m, r, |i, j| {
            if i == j {
                co
            } else if i == r + j {
                alpha
            } else {
                0.0
            }
        });
        let p2 = OrthoProjection::from_basis(basis)?;
        let diff = p1.to_dense().checked_sub(&p2.to_dense())?;
        Ok(Self {
            a: DenseMatrix::identity(m).scaled(mu)?,
            b: diff.scaled(nu)?,
            p1,
            p2,
        })
    }

    /// `tr(Aᵀ(P1 − P2)B)`.
    pub fn lhs(&self) -> Result<f64> {
        crate::linalg::projection_trace_form(&self.a, &self.p1, &self.p2, &self.b)
    }

    pub fn rhs(&self) -> Result<f64> {
        trace_bound_rhs(&self.a, &self.b, &self.p1, &self.p2)
    }
}

/// Upper bounds on the drift `‖P̃C‖²_{S2} − ‖π_r C‖²_{S2}` in terms of
/// `δ = ‖P̃ − π_r‖_{S2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftBound {
    /// `−½(λ_r² − λ_{r+1}²)·δ²`, valid for every `P̃`.
    pub gap: f64,
    /// `−½λ_r²·δ² + Δ_r`, valid whenever [`Self::tail_applies`].
    pub tail: f64,
    /// `δ ≥ √(2Δ_r)/λ_r`; always false when `λ_r = 0`, and `tail` is then `+∞`.
    pub tail_applies: bool,
}

pub fn drift_bound(spectrum: &SingularSpectrum, r: usize, dist_s2: f64) -> Result<DriftBound> {
    if r == 0 {
        return Err(invalid("rank must be at least 1"));
    }
    if !(dist_s2.is_finite() && dist_s2 >= 0.0) {
        return Err(invalid(format!(
            "distance must be finite and nonnegative, got {dist_s2}"
        )));
    }
    let lr = spectrum.lambda(r);
    let delta = spectrum.tail_energy(r);
    let d2 = dist_s2 * dist_s2;
    let gap = -0.5 * (lr * lr - spectrum.lambda(r + 1).powi(2)) * d2;
    if lr == 0.0 {
        return Ok(DriftBound {
            gap,
            tail: f64::INFINITY,
            tail_applies: false,
        });
    }
    Ok(DriftBound {
        gap,
        tail: -0.5 * lr * lr * d2 + delta,
        tail_applies: dist_s2 >= (2.0 * delta).sqrt() / lr,
    })
}

/// `(r(M−r), r_M·M, 2r(M−r))`; the three are nondecreasing for every `1 ≤ r < M`.
pub fn rank_sandwich(m: usize, r: usize) -> (usize, usize, usize) {
    let inner = r * (m - r);
    (inner, r_m(m, r) * m, 2 * inner)
}

/// Every bound for one configuration.
///
/// The pathwise fields need a value of `σ₁`; they are `None` when none was
/// supplied. `gaussian_bound` is present only for Gaussian noise inside its
/// hypotheses. Infinite values serialize as the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(with = "ext_real")]
    pub i: f64,
    #[serde(with = "ext_real")]
    pub ii: f64,
    #[serde(with = "ext_real")]
    pub iii: f64,
    #[serde(with = "opt_ext_real")]
    pub i_prime: Option<f64>,
    #[serde(with = "opt_ext_real")]
    pub ii_prime: Option<f64>,
    #[serde(with = "opt_ext_real")]
    pub iii_prime: Option<f64>,
    #[serde(with = "opt_ext_real")]
    pub y: Option<f64>,
    #[serde(with = "ext_real")]
    pub excess_bound: f64,
    #[serde(with = "opt_ext_real")]
    pub gaussian_bound: Option<f64>,
    pub latala_rhs: f64,
    pub r_m: usize,
    pub delta_r: f64,
}

impl BoundReport {
    pub fn new(
        spectrum: &SingularSpectrum,
        m: usize,
        r: usize,
        dist: &EntryDistribution,
        sigma1: Option<f64>,
    ) -> Result<Self> {
        Self::from_moments(
            spectrum,
            m,
            r,
            (dist.variance(), dist.fourth_moment()),
            dist.is_gaussian(),
            sigma1,
        )
    }

    /// As [`Self::new`], from the variance and fourth moment of the entries.
    pub fn from_moments(
        spectrum: &SingularSpectrum,
        m: usize,
        r: usize,
        (sigma_sq, m4): (f64, f64),
        gaussian: bool,
        sigma1: Option<f64>,
    ) -> Result<Self> {
        let ex = expected_excess_bound(spectrum, m, r, sigma_sq, m4)?;
        let path = sigma1
            .map(|s| pathwise_bound(spectrum, m, r, s))
            .transpose()?;
        let gaussian = if gaussian {
            match gaussian_bound(spectrum, m, r, sigma_sq.sqrt()) {
                Ok(v) => Some(v),
                Err(Error::OutOfHypothesis(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(Self {
            i: ex.i,
            ii: ex.ii,
            iii: ex.iii,
            i_prime: path.map(|p| p.i_prime),
            ii_prime: path.map(|p| p.ii_prime),
            iii_prime: path.map(|p| p.iii_prime),
            y: path.map(|p| p.y),
            excess_bound: ex.value,
            gaussian_bound: gaussian,
            latala_rhs: latala_bound(m, sigma_sq, m4)?,
            r_m: r_m(m, r),
            delta_r: spectrum.tail_energy(r),
        })
    }
}

/// Formats an extended real: `inf`, `-inf`, or the shortest round-trip decimal.
pub fn fmt_ext(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

/// Inverse of [`fmt_ext`].
pub fn parse_ext(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Serde adapter writing `±∞` as `"inf"`/`"-inf"` and finite values as numbers.
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(&super::fmt_ext(*v))
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => super::parse_ext(&s)
                .ok_or_else(|| de::Error::custom(format!("not an extended real: {s:?}"))),
        }
    }
}

/// [`ext_real`] for optional fields; `None` is `null`.
pub mod opt_ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::ext_real::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::ext_real")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
