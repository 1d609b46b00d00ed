//! Dense linear algebra for square real matrices: spectral decompositions,
//! Schatten norms, best rank-r projections and the geometry of projection
//! differences.
//!
//! Projections are always stored as an `M × r` orthonormal basis. The dense
//! `M × M` matrix is only materialized on request ([`OrthoProjection::to_dense`]).

mod decomp;
pub mod io;
mod lanczos;
mod norms;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

pub use decomp::{
    best_rank_r_projection, spectrum_and_top_projection, spectrum_and_top_projections, svd,
    svd_iteration_cap, sym_top_r, symmetric_eigenvalues_desc, top_eigenvalue_sum, Svd,
    TopEigenspace,
};
pub use lanczos::{top_singular_value, LANCZOS_MAX_STEPS};
pub use norms::{
    proj_diff_norms, projection_trace_form, schatten, spectral_norm, trace_form, ProjDiffNorms,
    Schatten,
};

/// Absolute tolerance on `BᵀB = I` for projection bases.
pub const TAU_ORTH: f64 = 1e-9;
/// Relative tolerance on `‖A − UΣVᵀ‖_{S2}`.
pub const TAU_RECON: f64 = 1e-10;
/// Relative (to the spectral norm) tolerance on asymmetry of a "symmetric" input.
pub const TAU_SYM_REL: f64 = 1e-9;

/// A real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from `rows · cols` entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!(
                "matrix must be non-empty, got {rows}×{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}×{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(invalid("matrix must be non-empty"));
        }
        if let Some((idx, v)) = m.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (i, j) = (idx % m.nrows(), idx / m.nrows());
            return Err(invalid(format!("non-finite entry {v} at ({i}, {j})")));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix whose entries are finite by construction.
    pub(crate) fn from_nalgebra_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.iter().all(|v| v.is_finite()));
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix must be non-empty");
        Self(DMatrix::identity(n, n))
    }

    /// Square diagonal matrix with the given diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("diagonal must be non-empty"));
        }
        let n = diag.len();
        Self::from_nalgebra(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { diag[i] } else { 0.0 },
        ))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Squared Hilbert–Schmidt norm, `Σ aᵢⱼ²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        Self::from_nalgebra(&self.0 + &other.0)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "subtract")?;
        Self::from_nalgebra(&self.0 - &other.0)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(invalid(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Self::from_nalgebra(&self.0 * &other.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_nalgebra(&self.0 * factor)
    }

    fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.0.shape() != other.0.shape() {
            return Err(invalid(format!(
                "cannot {what} {}×{} and {}×{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }
}

/// Singular values `λ₁ ≥ … ≥ λ_M ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    /// Validates a nonincreasing, nonnegative, finite list.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("spectrum must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("spectrum entries must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("spectrum must be nonincreasing"));
        }
        Ok(Self(values))
    }

    /// Sorts arbitrary nonnegative values into a spectrum.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `λᵢ` with 1-based `i`; indices past the end read as zero.
    pub fn lambda(&self, i: usize) -> f64 {
        assert!(i >= 1, "spectrum indices are 1-based");
        self.0.get(i - 1).copied().unwrap_or(0.0)
    }

    /// `Σ_{i≤r} λᵢ²`.
    pub fn top_energy(&self, r: usize) -> f64 {
        self.0.iter().take(r).map(|v| v * v).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// `Δ_r = Σ_{i=r+1}^{2r} λᵢ²`, zero-padded past the end of the spectrum.
    pub fn tail_energy(&self, r: usize) -> f64 {
        (r + 1..=2 * r).map(|i| self.lambda(i).powi(2)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

/// Orthogonal rank-r projection on `ℝ^M`, stored through an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoProjection {
    basis: DMatrix<f64>,
}

impl OrthoProjection {
    /// Wraps an `M × r` basis, checking `BᵀB = I_r` within [`TAU_ORTH`].
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        let (m, r) = basis.shape();
        if r == 0 || r > m {
            return Err(invalid(format!("projection rank {r} must lie in 1..={m}")));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(invalid("projection basis has non-finite entries"));
        }
        let p = Self { basis };
        let defect = p.orthonormality_defect();
        if defect > TAU_ORTH {
            return Err(invalid(format!(
                "basis is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(p)
    }

    pub(crate) fn from_basis_unchecked(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    /// Projection onto the first `r` standard basis vectors.
    pub fn coordinate(m: usize, r: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(invalid(format!("projection rank {r} must lie in 1..={m}")));
        }
        Ok(Self {
            basis: DMatrix::from_fn(m, r, |i, j| if i == j { 1.0 } else { 0.0 }),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `‖BᵀB − I_r‖_{S2}`.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rank();
        (self.basis.transpose() * &self.basis - DMatrix::<f64>::identity(r, r)).norm()
    }

    /// Dense `P = BBᵀ`.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_nalgebra_unchecked(&self.basis * self.basis.transpose())
    }

    /// `BᵀA`, the coordinates of `PA` in the basis.
    pub fn coordinates(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        self.basis.tr_mul(a)
    }

    /// `‖PA‖²_{S2}`.
    pub fn energy(&self, a: &DenseMatrix) -> f64 {
        self.coordinates(a.as_nalgebra()).norm_squared()
    }

    /// `tr(P·S) = Σ_k b_kᵀ S b_k`.
    pub fn trace_with(&self, s: &DMatrix<f64>) -> f64 {
        let sb = s * &self.basis;
        self.basis.dot(&sb)
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() || self.rank() != other.rank() {
            return Err(invalid(format!(
                "projections differ in shape: dim {} rank {} vs dim {} rank {}",
                self.dim(),
                self.rank(),
                other.dim(),
                other.rank()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_matrix_rejects_bad_shapes_and_values() {
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_row_major(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_row_major(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a.get(0, 2), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn spectrum_validation_and_padding() {
        assert!(SingularSpectrum::new(vec![1.0, 2.0]).is_err());
        assert!(SingularSpectrum::new(vec![1.0, -0.5]).is_err());
        let s = SingularSpectrum::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(s.lambda(3), 0.0);
        // Δ₂ reaches past the end: λ₃² + λ₄² = 0.
        assert_eq!(s.tail_energy(2), 0.0);
        assert_eq!(s.tail_energy(1), 1.0);
        assert_eq!(s.top_energy(1), 4.0);
    }

    #[test]
    fn projection_basis_must_be_orthonormal() {
        let bad = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(OrthoProjection::from_basis(bad).is_err());
        let p = OrthoProjection::coordinate(3, 2).unwrap();
        let d = p.to_dense();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(2, 2), 0.0);
        assert!(OrthoProjection::coordinate(3, 4).is_err());
        assert!(OrthoProjection::coordinate(3, 0).is_err());
    }
}
