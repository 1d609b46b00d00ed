//! The projection-excess process
//!
//! ```text
//! Z(P̃) = ‖P̃X‖²_{S2} − ‖π_r X‖²_{S2},   X = C + E,
//! ```
//!
//! where `π_r` is the best rank-r projection of the signal `C`, together with
//! its split `Z = Z¹ + Z²` into a signal part and a pure-noise part:
//!
//! ```text
//! Z¹(P̃) = ‖P̃C‖² − ‖π_r C‖² + 2·tr(Eᵀ(P̃ − π_r)C)
//! Z²(P̃) = ‖P̃E‖² − ‖π_r E‖²
//! ```
//!
//! All three suprema over rank-r projections are exact spectral quantities.
//! `Z` and `Z²` are maximized by the best rank-r projections of `X` and `E`.
//! `Z¹(P̃) = tr(P̃S) − tr(π_r S)` with `S = CCᵀ + CEᵀ + ECᵀ`, so its supremum is
//! the sum of the `r` largest eigenvalues of `S` minus `tr(π_r S)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg::{
    spectrum_and_top_projection, spectrum_and_top_projections, sym_top_r,
    symmetric_eigenvalues_desc, DenseMatrix, OrthoProjection, SingularSpectrum,
};

/// `Z`, `Z¹`, `Z²` at one projection.
#[derive(Clone, Copy, Debug)]
pub struct ZDecomposition<'p> {
    pub z: f64,
    pub z1: f64,
    pub z2: f64,
    pub at: &'p OrthoProjection,
}

impl ZDecomposition<'_> {
    /// `|z − (z1 + z2)|`.
    pub fn split_error(&self) -> f64 {
        (self.z - (self.z1 + self.z2)).abs()
    }
}

/// A supremum over rank-r projections and a projection attaining it.
#[derive(Clone, Debug)]
pub struct SupResult {
    pub value: f64,
    pub maximizer: OrthoProjection,
}

/// The three suprema without their maximizers, plus `σ₁(E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupValues {
    pub z: f64,
    pub z1: f64,
    pub z2: f64,
    pub sigma1: f64,
    /// Largest magnitude among the energies subtracted to form the suprema;
    /// rounding errors in `z`, `z1`, `z2` are proportional to it.
    pub energy_scale: f64,
}

/// Eigenvalues of `EEᵀ` for one noise draw, shared by every signal and rank.
#[derive(Clone, Debug)]
pub struct NoiseGram {
    eigenvalues: Vec<f64>,
}

impl NoiseGram {
    pub fn new(e: &DenseMatrix) -> Self {
        let e = e.as_nalgebra();
        Self {
            eigenvalues: symmetric_eigenvalues_desc(&(e * e.transpose())),
        }
    }

    /// `σ₁(E)`.
    pub fn sigma1(&self) -> f64 {
        self.eigenvalues[0].max(0.0).sqrt()
    }

    /// `Σ_{i≤r} σᵢ(E)²`.
    pub fn top_energy(&self, r: usize) -> f64 {
        self.eigenvalues[..r].iter().sum()
    }
}

/// Gram matrices and their eigenvalues for one signal and one noise draw,
/// shared by every rank of that signal.
#[derive(Clone, Debug)]
pub struct DrawSpectra<'a> {
    c: Arc<DenseMatrix>,
    e: &'a DenseMatrix,
    noise: &'a NoiseGram,
    x: DMatrix<f64>,
    s: DMatrix<f64>,
    ev_x: Vec<f64>,
    ev_s: Vec<f64>,
}

/// A signal matrix `C` with its rank-r oracle projection `π_r` computed once.
///
/// The model is read-only after construction and can be shared between
/// workers evaluating many noise draws.
#[derive(Clone, Debug)]
pub struct SignalModel {
    c: Arc<DenseMatrix>,
    r: usize,
    pi_r: OrthoProjection,
    spectrum: SingularSpectrum,
}

impl SignalModel {
    pub fn new(c: DenseMatrix, r: usize) -> Result<Self> {
        Ok(Self::family(c, &[r])?.pop().expect("one rank requested"))
    }

    /// One model per rank, all sharing `C` and a single decomposition of it.
    pub fn family(c: DenseMatrix, ranks: &[usize]) -> Result<Vec<Self>> {
        if !c.is_square() {
            return Err(invalid(format!(
                "signal must be square, got {}×{}",
                c.rows(),
                c.cols()
            )));
        }
        let (spectrum, projections) = spectrum_and_top_projections(&c, ranks)?;
        let c = Arc::new(c);
        Ok(ranks
            .iter()
            .zip(projections)
            .map(|(&r, pi_r)| Self {
                c: Arc::clone(&c),
                r,
                pi_r,
                spectrum: spectrum.clone(),
            })
            .collect())
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn m(&self) -> usize {
        self.c.rows()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The oracle projection `π_r`.
    pub fn pi_r(&self) -> &OrthoProjection {
        &self.pi_r
    }

    /// Singular values of `C`.
    pub fn spectrum(&self) -> &SingularSpectrum {
        &self.spectrum
    }

    fn check_noise(&self, e: &DenseMatrix) -> Result<()> {
        if e.rows() != self.m() || e.cols() != self.m() {
            return Err(invalid(format!(
                "noise is {}×{} but the signal is {m}×{m}",
                e.rows(),
                e.cols(),
                m = self.m()
            )));
        }
        Ok(())
    }

    fn check_projection(&self, p: &OrthoProjection) -> Result<()> {
        if p.dim() != self.m() || p.rank() != self.r {
            return Err(invalid(format!(
                "projection has dim {} rank {}, expected dim {} rank {}",
                p.dim(),
                p.rank(),
                self.m(),
                self.r
            )));
        }
        Ok(())
    }

    pub fn observe(&self, e: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_noise(e)?;
        self.c.checked_add(e)
    }

    pub fn z_at<'p>(&self, e: &DenseMatrix, p: &'p OrthoProjection) -> Result<ZDecomposition<'p>> {
        self.check_noise(e)?;
        self.check_projection(p)?;
        let (c, e) = (self.c.as_nalgebra(), e.as_nalgebra());
        let x = c + e;
        let pc = p.coordinates(c);
        let pe = p.coordinates(e);
        let qc = self.pi_r.coordinates(c);
        let qe = self.pi_r.coordinates(e);
        let z = p.coordinates(&x).norm_squared() - self.pi_r.coordinates(&x).norm_squared();
        let z1 = pc.norm_squared() - qc.norm_squared() + 2.0 * (pe.dot(&pc) - qe.dot(&qc));
        let z2 = pe.norm_squared() - qe.norm_squared();
        Ok(ZDecomposition { z, z1, z2, at: p })
    }

    /// `sup Z`, attained at the best rank-r projection of `X`.
    pub fn z_sup(&self, e: &DenseMatrix) -> Result<SupResult> {
        let x = self.observe(e)?;
        let (spectrum, maximizer) = spectrum_and_top_projection(&x, self.r)?;
        Ok(SupResult {
            value: spectrum.top_energy(self.r) - self.pi_r.energy(&x),
            maximizer,
        })
    }

    /// `sup Z¹` via the top-r eigenspace of `S = CCᵀ + CEᵀ + ECᵀ`.
    pub fn z1_sup(&self, e: &DenseMatrix) -> Result<SupResult> {
        self.check_noise(e)?;
        let s = self.cross_gram(e.as_nalgebra());
        let top = sym_top_r(&DenseMatrix::from_nalgebra_unchecked(s.clone()), self.r)?;
        Ok(SupResult {
            value: top.value - self.pi_r.trace_with(&s),
            maximizer: top.projection,
        })
    }

    /// `sup Z²`, attained at the best rank-r projection of `E`.
    pub fn z2_sup(&self, e: &DenseMatrix) -> Result<SupResult> {
        self.check_noise(e)?;
        let (spectrum, maximizer) = spectrum_and_top_projection(e, self.r)?;
        Ok(SupResult {
            value: spectrum.top_energy(self.r) - self.pi_r.energy(e),
            maximizer,
        })
    }

    /// All three suprema and `σ₁(E)` from eigenvalues only.
    ///
    /// Uses the Gram matrices `XXᵀ`, `S` and `EEᵀ`; no singular vectors are
    /// formed, which makes this the fast path for Monte Carlo loops.
    pub fn sup_values(&self, e: &DenseMatrix) -> Result<SupValues> {
        let noise = NoiseGram::new(e);
        let draw = self.draw(e, &noise)?;
        self.sup_values_from(&draw)
    }

    /// The rank-independent part of [`Self::sup_values`] for one draw.
    pub fn draw<'a>(&self, e: &'a DenseMatrix, noise: &'a NoiseGram) -> Result<DrawSpectra<'a>> {
        self.check_noise(e)?;
        let x = self.c.as_nalgebra() + e.as_nalgebra();
        let s = self.cross_gram(e.as_nalgebra());
        let ev_x = symmetric_eigenvalues_desc(&(&x * x.transpose()));
        let ev_s = symmetric_eigenvalues_desc(&s);
        Ok(DrawSpectra {
            c: Arc::clone(&self.c),
            e,
            noise,
            x,
            s,
            ev_x,
            ev_s,
        })
    }

    /// Suprema at this model's rank from spectra computed by any model of the
    /// same [`Self::family`].
    pub fn sup_values_from(&self, d: &DrawSpectra<'_>) -> Result<SupValues> {
        if !Arc::ptr_eq(&self.c, &d.c) {
            return Err(invalid("draw spectra belong to a different signal"));
        }
        let r = self.r;
        let top_x: f64 = d.ev_x[..r].iter().sum();
        let top_s: f64 = d.ev_s[..r].iter().sum();
        let top_e = d.noise.top_energy(r);
        let z = top_x - self.pi_r.coordinates(&d.x).norm_squared();
        let z1 = top_s - self.pi_r.trace_with(&d.s);
        let z2 = top_e - self.pi_r.coordinates(d.e.as_nalgebra()).norm_squared();
        Ok(SupValues {
            z,
            z1,
            z2,
            sigma1: d.noise.sigma1(),
            energy_scale: top_x.abs().max(top_s.abs()).max(top_e.abs()),
        })
    }

    /// `‖π_r X‖²_{S2} − σ²·r·M`, an unbiased estimate of `‖π_r C‖²_{S2}`.
    pub fn unbiased_energy(&self, e: &DenseMatrix, sigma_sq: f64) -> Result<f64> {
        let x = self.observe(e)?;
        Ok(self.pi_r.energy(&x) - sigma_sq * (self.r * self.m()) as f64)
    }

    /// `CCᵀ + CEᵀ + ECᵀ`, symmetrized exactly.
    fn cross_gram(&self, e: &DMatrix<f64>) -> DMatrix<f64> {
        let c = self.c.as_nalgebra();
        let g = c * e.transpose();
        let s = c * c.transpose() + &g + g.transpose();
        (&s + s.transpose()) * 0.5
    }
}

pub fn z_at<'p>(
    c: &DenseMatrix,
    e: &DenseMatrix,
    p: &'p OrthoProjection,
    r: usize,
) -> Result<ZDecomposition<'p>> {
    SignalModel::new(c.clone(), r)?.z_at(e, p)
}

pub fn z_sup(c: &DenseMatrix, e: &DenseMatrix, r: usize) -> Result<SupResult> {
    SignalModel::new(c.clone(), r)?.z_sup(e)
}

pub fn z1_sup(c: &DenseMatrix, e: &DenseMatrix, r: usize) -> Result<SupResult> {
    SignalModel::new(c.clone(), r)?.z1_sup(e)
}

pub fn z2_sup(c: &DenseMatrix, e: &DenseMatrix, r: usize) -> Result<SupResult> {
    SignalModel::new(c.clone(), r)?.z2_sup(e)
}
