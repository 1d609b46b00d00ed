use nalgebra::DMatrix;

use super::{lanczos, DenseMatrix, OrthoProjection};
use crate::error::{invalid, Result};

/// Dense singular values are used up to this size; Lanczos above it.
const DENSE_NORM_MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schatten {
    /// Hilbert–Schmidt (Frobenius) norm.
    Two,
    /// Spectral norm, the largest singular value.
    Inf,
}

pub fn schatten(a: &DenseMatrix, p: Schatten) -> f64 {
    match p {
        Schatten::Two => a.as_nalgebra().norm(),
        Schatten::Inf => spectral_norm(a.as_nalgebra()),
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows().max(a.ncols()) <= DENSE_NORM_MAX_DIM {
        return a.singular_values().max();
    }
    lanczos::top_singular_value(a).unwrap_or_else(|_| a.singular_values().max())
}

/// `‖P1 − P2‖` in the Hilbert–Schmidt and spectral norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjDiffNorms {
    pub s2: f64,
    pub sinf: f64,
    /// `‖(Id − P2)·P1‖_{S2}`, which always equals `s2/√2`.
    pub cross: f64,
}

/// Norms of the difference of two rank-r projections.
///
/// Both are read off the principal angles between the ranges: the singular
/// values of `(Id − P2)·B1` are the sines `sin θᵢ`, `‖P1 − P2‖_{S2}² = 2 Σ sin²θᵢ`
/// and `‖P1 − P2‖_{S∞} = max sin θᵢ`. Working with the sines avoids the
/// cancellation in `1 − cos²θ` for nearby subspaces.
pub fn proj_diff_norms(p1: &OrthoProjection, p2: &OrthoProjection) -> Result<ProjDiffNorms> {
    p1.check_compatible(p2)?;
    let b1 = p1.basis();
    let b2 = p2.basis();
    let w = b1 - b2 * b2.tr_mul(b1);
    let cross = w.norm();
    let sinf = w.singular_values().max().min(1.0);
    Ok(ProjDiffNorms {
        s2: std::f64::consts::SQRT_2 * cross,
        sinf,
        cross,
    })
}

/// `tr(Aᵀ·D·B)`.
pub fn trace_form(a: &DenseMatrix, d: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let m = a.rows();
    let square = |x: &DenseMatrix| x.rows() == m && x.cols() == m;
    if !(square(a) && square(d) && square(b)) {
        return Err(invalid("trace_form expects three M×M matrices"));
    }
    let db = d.as_nalgebra() * b.as_nalgebra();
    Ok(a.as_nalgebra().dot(&db))
}

/// `tr(Aᵀ(P2 − P1)B)` evaluated through the projection bases.
pub fn projection_trace_form(
    a: &DenseMatrix,
    p2: &OrthoProjection,
    p1: &OrthoProjection,
    b: &DenseMatrix,
) -> Result<f64> {
    p1.check_compatible(p2)?;
    let m = p1.dim();
    if [a, b].iter().any(|x| x.rows() != m || x.cols() != m) {
        return Err(invalid("projection_trace_form: shape mismatch"));
    }
    let part = |p: &OrthoProjection| {
        p.coordinates(a.as_nalgebra())
            .dot(&p.coordinates(b.as_nalgebra()))
    };
    Ok(part(p2) - part(p1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn schatten_on_diagonal() {
        let a = diag(&[3.0, 4.0]);
        assert_eq!(schatten(&a, Schatten::Two), 5.0);
        assert_eq!(schatten(&a, Schatten::Inf), 4.0);
    }

    #[test]
    fn orthogonal_lines() {
        let p1 = OrthoProjection::coordinate(2, 1).unwrap();
        let p2 = OrthoProjection::from_basis(DMatrix::from_row_slice(2, 1, &[0.0, 1.0])).unwrap();
        let n = proj_diff_norms(&p1, &p2).unwrap();
        assert!((n.s2 - 2f64.sqrt()).abs() < 1e-15);
        assert!((n.sinf - 1.0).abs() < 1e-15);
        assert!((n.cross - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_projections() {
        let p = OrthoProjection::coordinate(4, 2).unwrap();
        let n = proj_diff_norms(&p, &p).unwrap();
        assert_eq!((n.s2, n.sinf), (0.0, 0.0));
    }

    #[test]
    fn mismatched_projections() {
        let p = OrthoProjection::coordinate(4, 2).unwrap();
        let q = OrthoProjection::coordinate(4, 1).unwrap();
        assert!(proj_diff_norms(&p, &q).is_err());
        let q = OrthoProjection::coordinate(5, 2).unwrap();
        assert!(proj_diff_norms(&p, &q).is_err());
    }

    #[test]
    fn trace_form_cases() {
        let id = DenseMatrix::identity(2);
        assert_eq!(trace_form(&id, &diag(&[1.0, -1.0]), &id).unwrap(), 0.0);
        let p = OrthoProjection::coordinate(5, 3).unwrap().to_dense();
        let id5 = DenseMatrix::identity(5);
        assert!((trace_form(&id5, &p, &id5).unwrap() - 3.0).abs() < 1e-15);
        assert!(trace_form(&id, &p, &id).is_err());
    }
}
