//! Seeded generation of i.i.d.-entry noise matrices and Haar-uniform projections.
//!
//! Every draw is a pure function of a [`Seed`]: a root plus the stream labels
//! `(experiment, replication)`. The three numbers are packed injectively into
//! a ChaCha8 key, so distinct labels never share a stream and replications can
//! run on any worker in any order.
//!
//! Matrix entries are drawn in *shell order*: shell `s` holds row `s` up to the
//! diagonal followed by column `s` above it. The leading `m × m` block of a
//! larger draw is therefore exactly the `m × m` draw with the same seed, which
//! emulates one infinite array `(E_ij)` observed at growing sizes.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{DenseMatrix, OrthoProjection};

/// Root seed plus stream labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub experiment: u64,
    pub replication: u64,
}

impl Seed {
    pub fn new(root: u64, experiment: u64, replication: u64) -> Self {
        Self {
            root,
            experiment,
            replication,
        }
    }

    pub fn root(root: u64) -> Self {
        Self::new(root, 0, 0)
    }

    pub fn with_replication(self, replication: u64) -> Self {
        Self {
            replication,
            ..self
        }
    }

    pub fn with_experiment(self, experiment: u64) -> Self {
        Self { experiment, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.root.to_le_bytes());
        key[8..16].copy_from_slice(&self.experiment.to_le_bytes());
        key[16..24].copy_from_slice(&self.replication.to_le_bytes());
        key[24..32].copy_from_slice(b"rankproj");
        ChaCha8Rng::from_seed(key)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.root, self.experiment, self.replication)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistKind {
    Gaussian,
    Rademacher,
    /// Uniform on `[−scale, scale]`.
    UniformSymmetric,
    /// `scale·(Exp(1) − 1)`.
    CenteredExponential,
    /// Student-t with `dof > 4` degrees of freedom, rescaled to variance `scale²`.
    StudentT {
        dof: f64,
    },
}

/// Law of a single noise entry. The mean is zero by construction and the
/// variance and fourth moment are known in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntryDistribution {
    kind: DistKind,
    scale: f64,
}

impl EntryDistribution {
    pub fn new(kind: DistKind, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        if let DistKind::StudentT { dof } = kind {
            if !(dof.is_finite() && dof > 4.0) {
                return Err(invalid(format!(
                    "student-t needs more than 4 degrees of freedom for a finite fourth moment, got {dof}"
                )));
            }
        }
        Ok(Self { kind, scale })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(DistKind::Gaussian, sigma)
    }

    pub fn rademacher(scale: f64) -> Result<Self> {
        Self::new(DistKind::Rademacher, scale)
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        Self::new(DistKind::UniformSymmetric, half_width)
    }

    pub fn centered_exponential(scale: f64) -> Result<Self> {
        Self::new(DistKind::CenteredExponential, scale)
    }

    pub fn student_t(dof: f64, scale: f64) -> Result<Self> {
        Self::new(DistKind::StudentT { dof }, scale)
    }

    /// One unit-scale representative of every kind (student-t with 5 degrees of freedom).
    pub fn catalog() -> Vec<Self> {
        vec![
            Self::gaussian(1.0).unwrap(),
            Self::rademacher(1.0).unwrap(),
            Self::uniform(1.0).unwrap(),
            Self::centered_exponential(1.0).unwrap(),
            Self::student_t(5.0, 1.0).unwrap(),
        ]
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_gaussian(&self) -> bool {
        self.kind == DistKind::Gaussian
    }

    /// `σ² = E X²`.
    pub fn variance(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            DistKind::UniformSymmetric => s2 / 3.0,
            _ => s2,
        }
    }

    /// `m₄ = E X⁴`.
    pub fn fourth_moment(&self) -> f64 {
        let s4 = (self.scale * self.scale).powi(2);
        match self.kind {
            DistKind::Gaussian => 3.0 * s4,
            DistKind::Rademacher => s4,
            DistKind::UniformSymmetric => s4 / 5.0,
            DistKind::CenteredExponential => 9.0 * s4,
            DistKind::StudentT { dof } => 3.0 * (dof - 2.0) / (dof - 4.0) * s4,
        }
    }

    pub fn sampler(&self) -> EntrySampler {
        let inner = match self.kind {
            DistKind::StudentT { dof } => SamplerKind::StudentT {
                t: StudentT::new(dof).expect("dof validated"),
                unit: ((dof - 2.0) / dof).sqrt(),
            },
            DistKind::Gaussian => SamplerKind::Gaussian,
            DistKind::Rademacher => SamplerKind::Rademacher,
            DistKind::UniformSymmetric => SamplerKind::Uniform,
            DistKind::CenteredExponential => SamplerKind::Exponential,
        };
        EntrySampler {
            inner,
            scale: self.scale,
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DistKind::Gaussian => write!(f, "gaussian:{}", self.scale),
            DistKind::Rademacher => write!(f, "rademacher:{}", self.scale),
            DistKind::UniformSymmetric => write!(f, "uniform-symmetric:{}", self.scale),
            DistKind::CenteredExponential => write!(f, "centered-exponential:{}", self.scale),
            DistKind::StudentT { dof } => write!(f, "student-t:{dof}:{}", self.scale),
        }
    }
}

/// Parses `kind:params`, e.g. `gaussian:1.0`, `student-t:5:1.0`, `rademacher:0.5`.
/// A missing scale defaults to 1.
impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad number {p:?} in distribution {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let arity = |max: usize| {
            if nums.len() > max {
                Err(invalid(format!(
                    "too many parameters in distribution {s:?}"
                )))
            } else {
                Ok(())
            }
        };
        let scale_at = |i: usize| nums.get(i).copied().unwrap_or(1.0);
        match kind.as_str() {
            "gaussian" | "normal" => arity(1).and_then(|_| Self::gaussian(scale_at(0))),
            "rademacher" => arity(1).and_then(|_| Self::rademacher(scale_at(0))),
            "uniform" | "uniform-symmetric" => arity(1).and_then(|_| Self::uniform(scale_at(0))),
            "exponential" | "centered-exponential" => {
                arity(1).and_then(|_| Self::centered_exponential(scale_at(0)))
            }
            "student-t" | "t" => {
                arity(2)?;
                let dof = *nums.first().ok_or_else(|| {
                    invalid("student-t needs degrees of freedom, e.g. student-t:5:1.0")
                })?;
                Self::student_t(dof, scale_at(1))
            }
            _ => Err(invalid(format!("unknown distribution {s:?}"))),
        }
    }
}

impl Serialize for EntryDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntryDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Prepared sampler for one [`EntryDistribution`].
#[derive(Clone, Copy, Debug)]
pub struct EntrySampler {
    inner: SamplerKind,
    scale: f64,
}

#[derive(Clone, Copy, Debug)]
enum SamplerKind {
    Gaussian,
    Rademacher,
    Uniform,
    Exponential,
    StudentT { t: StudentT<f64>, unit: f64 },
}

impl Distribution<f64> for EntrySampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match &self.inner {
            SamplerKind::Gaussian => StandardNormal.sample(rng),
            SamplerKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SamplerKind::Uniform => 2.0 * rng.random::<f64>() - 1.0,
            SamplerKind::Exponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            SamplerKind::StudentT { t, unit } => t.sample(rng) * unit,
        };
        self.scale * x
    }
}

/// Entry scaling applied after drawing.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    /// Divide every entry by `√M`.
    InvSqrtM,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "inv-sqrt-m" | "inv-sqrt-M" => Ok(Self::InvSqrtM),
            _ => Err(invalid(format!("unknown normalization {s:?}"))),
        }
    }
}

/// Visits the `m × m` entries in shell order, drawing each from `dist`.
pub fn for_each_entry(
    dist: &EntryDistribution,
    m: usize,
    seed: Seed,
    mut f: impl FnMut(usize, usize, f64),
) {
    let sampler = dist.sampler();
    let mut rng = seed.rng();
    for s in 0..m {
        for j in 0..=s {
            f(s, j, sampler.sample(&mut rng));
        }
        for i in 0..s {
            f(i, s, sampler.sample(&mut rng));
        }
    }
}

/// `m × m` matrix of i.i.d. entries; the draw is a function of `(dist, m, seed)`.
pub fn sample_matrix(
    dist: &EntryDistribution,
    m: usize,
    seed: Seed,
    normalization: Normalization,
) -> Result<DenseMatrix> {
    if m == 0 {
        return Err(invalid("matrix size must be at least 1"));
    }
    let factor = match normalization {
        Normalization::None => 1.0,
        Normalization::InvSqrtM => 1.0 / (m as f64).sqrt(),
    };
    let mut a = DMatrix::zeros(m, m);
    for_each_entry(dist, m, seed, |i, j, x| a[(i, j)] = x * factor);
    Ok(DenseMatrix::from_nalgebra_unchecked(a))
}

/// Haar-uniform rank-r projection: QR of an `m × r` standard Gaussian matrix
/// with the signs of `R`'s diagonal folded into `Q`.
pub fn sample_projection(m: usize, r: usize, seed: Seed) -> Result<OrthoProjection> {
    if r == 0 || r > m {
        return Err(invalid(format!("rank {r} must lie in 1..={m}")));
    }
    let mut rng = seed.rng();
    let g = DMatrix::from_fn(m, r, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let rd = qr.r();
    for k in 0..r {
        if rd[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    OrthoProjection::from_basis(q)
}
