use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Upper bound on Golub–Kahan steps before giving up.
pub const LANCZOS_MAX_STEPS: usize = 400;

/// Stop once the Ritz residual `β_k·|x_k|` falls below this fraction of the estimate.
const RESIDUAL_REL: f64 = 1e-11;

/// Largest singular value by Golub–Kahan–Lanczos bidiagonalization with full
/// reorthogonalization.
///
/// Each step costs two matrix-vector products, so the top of the spectrum of a
/// 1024×1024 matrix is reached in a few dozen products instead of an `O(M³)`
/// decomposition. The start vector is drawn from a fixed-seed generator, making
/// the result a deterministic function of `a`.
pub fn top_singular_value(a: &DMatrix<f64>) -> Result<f64> {
    let (m, n) = a.shape();
    let max_steps = m.min(n).min(LANCZOS_MAX_STEPS);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    v /= v.norm();

    let mut us: Vec<DVector<f64>> = Vec::new();
    let mut vs: Vec<DVector<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut estimate = 0.0;

    for k in 0..max_steps {
        let mut u = a * &vs[k];
        if let Some(prev) = us.last() {
            u.axpy(-betas[k - 1], prev, 1.0);
        }
        reorthogonalize(&mut u, &us);
        let alpha = u.norm();
        if alpha <= f64::EPSILON * scale {
            // Krylov space exhausted: the bidiagonal holds the exact top value.
            alphas.push(0.0);
            return Ok(top_of_bidiagonal(&alphas, &betas).0);
        }
        u /= alpha;
        alphas.push(alpha);

        let mut w = a.tr_mul(&u);
        w.axpy(-alpha, &vs[k], 1.0);
        reorthogonalize(&mut w, &vs);
        let beta = w.norm();
        us.push(u);

        let (s, x_last) = top_of_bidiagonal(&alphas, &betas);
        estimate = s;
        if beta * x_last.abs() <= RESIDUAL_REL * s || beta <= f64::EPSILON * scale {
            return Ok(s);
        }
        if k + 1 == m.min(n) {
            return Ok(s);
        }
        betas.push(beta);
        vs.push(w / beta);
    }
    Err(Error::NumericalFailure(format!(
        "lanczos did not converge in {max_steps} steps (last estimate {estimate})"
    )))
}

fn reorthogonalize(x: &mut DVector<f64>, against: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in against {
            let c = q.dot(x);
            x.axpy(-c, q, 1.0);
        }
    }
}

/// Top singular value of the upper bidiagonal `B_k` and the last entry of its
/// left singular vector.
fn top_of_bidiagonal(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut b = DMatrix::zeros(k, k);
    for i in 0..k {
        b[(i, i)] = alphas[i];
        if i + 1 < k {
            b[(i, i + 1)] = betas[i];
        }
    }
    let svd = b.svd(true, false);
    let u = svd.u.expect("u requested");
    let (idx, s) = svd.singular_values.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, s)| if s > acc.1 { (i, s) } else { acc },
    );
    (s, u[(k - 1, idx)])
}
