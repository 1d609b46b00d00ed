use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use super::{DenseMatrix, OrthoProjection, SingularSpectrum, TAU_SYM_REL};
use crate::error::{invalid, Error, Result};

/// Two values closer than this (relative to the largest magnitude) are a tie.
const TIE_REL: f64 = 1e-12;
/// Minimum residual norm for a candidate vector in the tie-break Gram–Schmidt.
const TIE_ACCEPT: f64 = 1e-6;

/// Total iteration budget handed to the bidiagonal QR sweep.
pub fn svd_iteration_cap(m: usize) -> usize {
    100 * m.max(10)
}

/// `A = U·diag(λ)·Vᵀ` with `λ` nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub spectrum: SingularSpectrum,
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

/// Singular value decomposition of a square matrix.
///
/// Columns are ordered by (value descending, original column index ascending).
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    if !a.is_square() {
        return Err(invalid(format!(
            "svd expects a square matrix, got {}×{}",
            a.rows(),
            a.cols()
        )));
    }
    let (values, u, v) = sorted_svd(a.as_nalgebra())?;
    Ok(Svd {
        spectrum: SingularSpectrum::new(values)?,
        left: DenseMatrix::from_nalgebra(u)?,
        right: DenseMatrix::from_nalgebra(v)?,
    })
}

fn sorted_svd(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let m = a.nrows();
    let raw = SVD::try_new_unordered(a.clone(), true, true, f64::EPSILON, svd_iteration_cap(m))
        .ok_or_else(|| {
            Error::NumericalFailure(format!(
                "svd did not converge within {} iterations",
                svd_iteration_cap(m)
            ))
        })?;
    let (u, v_t) = (raw.u.expect("u requested"), raw.v_t.expect("v requested"));
    let order = descending_order(raw.singular_values.as_slice());
    let values = order
        .iter()
        .map(|&k| raw.singular_values[k].max(0.0))
        .collect();
    let u = DMatrix::from_fn(m, m, |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(m, m, |i, j| v_t[(order[j], i)]);
    Ok((values, u, v))
}

/// Indices sorted by value descending, ties kept in index order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Orthogonal projection onto the top-`r` left singular subspace of `A`.
///
/// When `λ_r = λ_{r+1}` the tied singular subspace is split canonically: the
/// standard basis vectors `e₁, e₂, …` are projected onto it and orthonormalized
/// in index order until `r` directions are collected. The result therefore does
/// not depend on the basis the SVD happens to return inside a tie.
pub fn best_rank_r_projection(a: &DenseMatrix, r: usize) -> Result<OrthoProjection> {
    let m = a.rows();
    if !a.is_square() {
        return Err(invalid("best_rank_r_projection expects a square matrix"));
    }
    check_rank(r, m)?;
    Ok(spectrum_and_top_projection(a, r)?.1)
}

/// Spectrum of a square `A` together with its best rank-r projection, from one SVD.
pub fn spectrum_and_top_projection(
    a: &DenseMatrix,
    r: usize,
) -> Result<(SingularSpectrum, OrthoProjection)> {
    let (spectrum, mut ps) = spectrum_and_top_projections(a, &[r])?;
    Ok((spectrum, ps.pop().expect("one rank requested")))
}

/// Spectrum of a square `A` and its best rank-r projection for each requested `r`.
pub fn spectrum_and_top_projections(
    a: &DenseMatrix,
    ranks: &[usize],
) -> Result<(SingularSpectrum, Vec<OrthoProjection>)> {
    if !a.is_square() {
        return Err(invalid("expected a square matrix"));
    }
    for &r in ranks {
        check_rank(r, a.rows())?;
    }
    let (values, u, _) = sorted_svd(a.as_nalgebra())?;
    let projections = ranks
        .iter()
        .map(|&r| OrthoProjection::from_basis_unchecked(canonical_top_basis(&values, &u, r)))
        .collect();
    Ok((SingularSpectrum::new(values)?, projections))
}

/// Top-`r` eigenspace of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct TopEigenspace {
    /// Sum of the `r` largest eigenvalues, the maximum of `tr(P·S)` over rank-r `P`.
    pub value: f64,
    pub projection: OrthoProjection,
}

pub fn sym_top_r(s: &DenseMatrix, r: usize) -> Result<TopEigenspace> {
    if !s.is_square() {
        return Err(invalid("sym_top_r expects a square matrix"));
    }
    let m = s.rows();
    check_rank(r, m)?;
    let a = s.as_nalgebra();
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, svd_iteration_cap(m))
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
    let scale = eig.eigenvalues.amax();
    let asym = (a - a.transpose()).amax();
    if asym > TAU_SYM_REL * scale || (scale == 0.0 && asym > 0.0) {
        return Err(invalid(format!(
            "matrix is not symmetric: max |S - Sᵀ| = {asym:e}, spectral norm {scale:e}"
        )));
    }
    let order = descending_order(eig.eigenvalues.as_slice());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);
    let value = values[..r].iter().sum();
    Ok(TopEigenspace {
        value,
        projection: OrthoProjection::from_basis_unchecked(canonical_top_basis(
            &values, &vectors, r,
        )),
    })
}

/// Sum of the `r` largest eigenvalues of a symmetric matrix (lower triangle read).
pub fn top_eigenvalue_sum(s: &DMatrix<f64>, r: usize) -> f64 {
    symmetric_eigenvalues_desc(s).iter().take(r).sum()
}

/// Eigenvalues of a symmetric matrix in nonincreasing order, without eigenvectors.
pub fn symmetric_eigenvalues_desc(s: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn check_rank(r: usize, m: usize) -> Result<()> {
    if r == 0 || r > m {
        return Err(invalid(format!("rank {r} must lie in 1..={m}")));
    }
    Ok(())
}

/// First `r` columns of `vectors` (sorted by `values` descending), with the tie
/// cluster straddling position `r` resolved canonically.
fn canonical_top_basis(values: &[f64], vectors: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let m = vectors.nrows();
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let tol = TIE_REL * scale;
    let tied = |a: f64, b: f64| (a - b).abs() <= tol;
    if r == values.len() || !tied(values[r - 1], values[r]) {
        return vectors.columns(0, r).into_owned();
    }
    let lo = (0..r)
        .find(|&k| tied(values[k], values[r - 1]))
        .unwrap_or(r - 1);
    let hi = (r..values.len())
        .take_while(|&k| tied(values[k], values[r - 1]))
        .last()
        .map_or(r, |k| k + 1);
    let cluster = vectors.columns(lo, hi - lo);

    let mut basis = DMatrix::zeros(m, r);
    basis.columns_mut(0, lo).copy_from(&vectors.columns(0, lo));
    let mut filled = lo;
    for j in 0..m {
        if filled == r {
            break;
        }
        // Projection of e_j onto the cluster subspace: W·(row j of W)ᵀ.
        let mut x: DVector<f64> = cluster * cluster.row(j).transpose();
        for _ in 0..2 {
            for k in lo..filled {
                let c = basis.column(k).dot(&x);
                x.axpy(-c, &basis.column(k), 1.0);
            }
        }
        let norm = x.norm();
        if norm > TIE_ACCEPT {
            basis.set_column(filled, &(x / norm));
            filled += 1;
        }
    }
    debug_assert_eq!(filled, r, "tie cluster too small for the requested rank");
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn svd_of_diagonal() {
        let s = svd(&diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(s.spectrum.values(), &[3.0, 2.0, 1.0]);
        for i in 0..3 {
            assert!((s.left.get(i, i).abs() - 1.0).abs() < 1e-14);
            assert!((s.right.get(i, i).abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_of_zero_matrix() {
        let s = svd(&DenseMatrix::zeros(4, 4)).unwrap();
        assert_eq!(s.spectrum.values(), &[0.0; 4]);
    }

    #[test]
    fn svd_orders_unsorted_diagonal() {
        let s = svd(&diag(&[1.0, -5.0, 2.0])).unwrap();
        assert_eq!(s.spectrum.values(), &[5.0, 2.0, 1.0]);
        assert!((s.left.get(1, 0).abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_rejects_rectangular() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0; 6]).unwrap();
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn best_projection_diagonal() {
        let p = best_rank_r_projection(&diag(&[3.0, 2.0, 1.0]), 1).unwrap();
        assert!((p.basis()[(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((p.energy(&diag(&[3.0, 2.0, 1.0])) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn best_projection_zero_matrix_tie_break() {
        let p = best_rank_r_projection(&DenseMatrix::zeros(3, 3), 2).unwrap();
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((p.basis() - expected).amax() < 1e-15);
    }

    #[test]
    fn tie_break_inside_partial_cluster() {
        // λ = (4, 1, 1, 1): the rank-2 projection needs one direction out of the
        // tied cluster spanned by e₂, e₃, e₄ and picks e₂.
        let a = diag(&[1.0, 1.0, 4.0, 1.0]);
        let p = best_rank_r_projection(&a, 2).unwrap();
        let d = p.to_dense();
        assert!((d.get(2, 2) - 1.0).abs() < 1e-12);
        assert!((d.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(d.get(1, 1).abs() < 1e-12 && d.get(3, 3).abs() < 1e-12);
    }

    #[test]
    fn projection_rank_out_of_range() {
        assert!(best_rank_r_projection(&diag(&[1.0, 2.0]), 0).is_err());
        assert!(best_rank_r_projection(&diag(&[1.0, 2.0]), 3).is_err());
    }

    #[test]
    fn sym_top_r_diagonal() {
        let s = diag(&[5.0, 1.0, -2.0]);
        let top = sym_top_r(&s, 1).unwrap();
        assert_eq!(top.value, 5.0);
        assert!((top.projection.to_dense().get(0, 0) - 1.0).abs() < 1e-14);
        assert_eq!(sym_top_r(&s, 3).unwrap().value, 4.0);
    }

    #[test]
    fn sym_top_r_rejects_asymmetric() {
        let s = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_top_r(&s, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eigen_sum_matches_full_decomposition() {
        let s =
            DenseMatrix::from_row_major(3, 3, vec![2.0, 1.0, 0.5, 1.0, -1.0, 0.3, 0.5, 0.3, 0.7])
                .unwrap();
        for r in 1..=3 {
            let full = sym_top_r(&s, r).unwrap();
            let fast = top_eigenvalue_sum(s.as_nalgebra(), r);
            assert!((full.value - fast).abs() < 1e-12);
            let trace = full.projection.trace_with(s.as_nalgebra());
            assert!((trace - full.value).abs() < 1e-12);
        }
    }
}
