//! Independent oracles: brute-force sums, sphere grids, sampled projections
//! and Monte Carlo moment checks.

use nalgebra::{DMatrix, DVector};
use rankproj::bounds::latala_bound;
use rankproj::linalg::{
    best_rank_r_projection, svd, sym_top_r, trace_form, DenseMatrix, OrthoProjection,
};
use rankproj::localization::{
    empirical_rank_select, slln_trajectory, RankOutcome, RankSelectionConfig, URule,
};
use rankproj::montecarlo::{estimate, ExperimentConfig, McOptions, Statistic};
use rankproj::randgen::{
    for_each_entry, sample_matrix, sample_projection, EntryDistribution, Normalization, Seed,
};
use rankproj::zprocess::SignalModel;

fn gaussian(m: usize, seed: Seed) -> DenseMatrix {
    sample_matrix(
        &EntryDistribution::gaussian(1.0).unwrap(),
        m,
        seed,
        Normalization::None,
    )
    .unwrap()
}

/// Fibonacci points on the upper unit hemisphere; `x` and `−x` give the same
/// rank-one projection, so a hemisphere covers every line.
fn hemisphere_grid(n: usize) -> Vec<DVector<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            DVector::from_vec(vec![rho * t.cos(), rho * t.sin(), z])
        })
        .collect()
}

fn quad(s: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(s * x))
}

/// `(λ_max − λ_min)·sin²θ`, with `θ` the angle from `v` to the nearest grid line:
/// no grid can miss the maximum of `xᵀSx` by more.
fn grid_resolution(s: &DMatrix<f64>, v: &DVector<f64>, grid: &[DVector<f64>]) -> f64 {
    let eig = s.clone().symmetric_eigen().eigenvalues;
    let spread = eig.max() - eig.min();
    let cos = grid
        .iter()
        .map(|g| g.dot(v).abs())
        .fold(0.0, f64::max)
        .min(1.0);
    spread * (1.0 - cos * cos)
}

#[test]
fn svd_reconstructs_random_matrix() {
    let a = gaussian(5, Seed::root(7));
    let d = svd(&a).unwrap();
    let sigma = DMatrix::from_diagonal(&DVector::from_row_slice(d.spectrum.values()));
    let back = d.left.as_nalgebra() * sigma * d.right.as_nalgebra().transpose();
    let err = (a.as_nalgebra() - back).norm();
    assert!(err <= 1e-10 * a.as_nalgebra().norm(), "err = {err:e}");
}

#[test]
fn best_projection_dominates_haar_samples() {
    let a = gaussian(4, Seed::root(11));
    let p = best_rank_r_projection(&a, 2).unwrap();
    let best = p.energy(&a);
    for k in 0..1000 {
        let q = sample_projection(4, 2, Seed::new(11, 1, k)).unwrap();
        assert!(q.energy(&a) <= best * (1.0 + 1e-12), "sample {k}");
    }
}

#[test]
fn trace_form_matches_triple_sum() {
    let (a, d, b) = (
        gaussian(5, Seed::new(3, 0, 0)),
        gaussian(5, Seed::new(3, 0, 1)),
        gaussian(5, Seed::new(3, 0, 2)),
    );
    let (an, dn, bn) = (a.as_nalgebra(), d.as_nalgebra(), b.as_nalgebra());
    let mut brute = 0.0;
    let mut scale = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                let t = an[(j, i)] * dn[(j, k)] * bn[(k, i)];
                brute += t;
                scale += t.abs();
            }
        }
    }
    let fast = trace_form(&a, &d, &b).unwrap();
    assert!((fast - brute).abs() <= 1e-12 * scale);
}

#[test]
fn top_eigenspace_matches_sphere_grid() {
    let grid = hemisphere_grid(10_000);
    let g = gaussian(3, Seed::root(5));
    let s = DenseMatrix::from_nalgebra(g.as_nalgebra() + g.as_nalgebra().transpose()).unwrap();
    let top = sym_top_r(&s, 1).unwrap();
    let grid_max = grid
        .iter()
        .map(|x| quad(s.as_nalgebra(), x))
        .fold(f64::NEG_INFINITY, f64::max);
    let v = top.projection.basis().column(0).into_owned();
    let res = grid_resolution(s.as_nalgebra(), &v, &grid);
    assert!(top.value >= grid_max - 1e-12);
    assert!(top.value - grid_max <= res + 1e-12);
}

#[test]
fn z_sup_matches_sphere_grid_within_resolution() {
    let grid = hemisphere_grid(10_000);
    for k in 0..20 {
        let c = gaussian(3, Seed::new(13, 1, k));
        let e = gaussian(3, Seed::new(13, 2, k));
        let model = SignalModel::new(c, 1).unwrap();
        let x = model.observe(&e).unwrap();
        let xxt = x.as_nalgebra() * x.as_nalgebra().transpose();
        let base = model.pi_r().energy(&x);
        let sup = model.z_sup(&e).unwrap();
        let grid_max = grid
            .iter()
            .map(|v| quad(&xxt, v) - base)
            .fold(f64::NEG_INFINITY, f64::max);
        let v = sup.maximizer.basis().column(0).into_owned();
        let res = grid_resolution(&xxt, &v, &grid);
        assert!(sup.value >= grid_max - 1e-12, "draw {k}");
        assert!(
            sup.value - grid_max <= res + 1e-12,
            "draw {k}: gap {} > {res}",
            sup.value - grid_max
        );
    }
}

#[test]
fn z_at_matches_trace_expansion() {
    let c = gaussian(4, Seed::new(17, 0, 0));
    let e = gaussian(4, Seed::new(17, 0, 1));
    let model = SignalModel::new(c.clone(), 2).unwrap();
    let p = sample_projection(4, 2, Seed::new(17, 0, 2)).unwrap();
    let x = c.checked_add(&e).unwrap();
    let tr = |q: &OrthoProjection| trace_form(&x, &q.to_dense(), &x).unwrap();
    let brute = tr(&p) - tr(model.pi_r());
    assert!((model.z_at(&e, &p).unwrap().z - brute).abs() <= 1e-10);
}

#[test]
fn suprema_dominate_haar_samples_and_are_attained() {
    for (r, seed) in [(1usize, 19u64), (2, 23)] {
        let c = gaussian(4, Seed::new(seed, 0, 0));
        let e = gaussian(4, Seed::new(seed, 0, 1));
        let model = SignalModel::new(c, r).unwrap();
        let sups = [
            model.z_sup(&e).unwrap(),
            model.z1_sup(&e).unwrap(),
            model.z2_sup(&e).unwrap(),
        ];
        assert!(sups[2].value >= 0.0);
        let pick = |d: &rankproj::zprocess::ZDecomposition<'_>, i: usize| [d.z, d.z1, d.z2][i];
        for (i, s) in sups.iter().enumerate() {
            let at = model.z_at(&e, &s.maximizer).unwrap();
            assert!(
                (pick(&at, i) - s.value).abs() <= 1e-9 * (1.0 + s.value.abs()),
                "component {i}"
            );
        }
        for k in 0..1000 {
            let p = sample_projection(4, r, Seed::new(seed, 1, k)).unwrap();
            let at = model.z_at(&e, &p).unwrap();
            for (i, s) in sups.iter().enumerate() {
                assert!(pick(&at, i) <= s.value + 1e-10, "component {i}, sample {k}");
            }
        }
    }
}

/// Pooled sample moments of each catalog law against their analytic values,
/// within five standard errors. Student t uses ten degrees of freedom here,
/// since the catalog's five leave the eighth moment, and so the standard error
/// of the fourth, infinite.
#[test]
fn catalog_moments_converge() {
    let mut laws = EntryDistribution::catalog();
    laws.retain(|d| !matches!(d.kind(), rankproj::randgen::DistKind::StudentT { .. }));
    laws.push(EntryDistribution::student_t(10.0, 1.0).unwrap());
    for d in laws {
        let mut xs = Vec::with_capacity(1_000_000);
        for_each_entry(&d, 1000, Seed::root(29), |_, _, x| xs.push(x));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let m4: Vec<f64> = xs.iter().map(|x| x.powi(4)).collect();
        let avg = |v: &[f64]| v.iter().sum::<f64>() / n;
        let se = |v: &[f64], mu: f64| {
            (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        };
        let (a2, a4) = (avg(&m2), avg(&m4));
        assert!(
            mean.abs() <= 5.0 * (d.variance() / n).sqrt(),
            "{d}: mean {mean}"
        );
        assert!(
            (a2 - d.variance()).abs() <= 5.0 * se(&m2, a2),
            "{d}: variance {a2}"
        );
        assert!(
            (a4 - d.fourth_moment()).abs() <= 5.0 * se(&m4, a4),
            "{d}: fourth moment {a4}"
        );
    }
}

#[test]
fn gaussian_pooled_moments() {
    let mut xs = Vec::new();
    for_each_entry(
        &EntryDistribution::gaussian(1.0).unwrap(),
        256,
        Seed::root(31),
        |_, _, x| xs.push(x),
    );
    xs.truncate(100_000);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    assert!(mean.abs() <= 4.0 / n.sqrt());
    assert!((m4 - 3.0).abs() <= 0.2);
}

#[test]
fn haar_mean_is_half_identity() {
    let mut acc = DMatrix::<f64>::zeros(2, 2);
    let n = 10_000;
    for k in 0..n {
        acc += sample_projection(2, 1, Seed::new(37, 0, k))
            .unwrap()
            .to_dense()
            .as_nalgebra();
    }
    acc /= n as f64;
    let dev = (acc - DMatrix::<f64>::identity(2, 2) * 0.5).abs().max();
    assert!(dev <= 0.05, "deviation {dev}");
}

#[test]
fn latala_calibration_at_moderate_size() {
    let cfg = ExperimentConfig {
        m: 256,
        r: 1,
        c: "zero".parse().unwrap(),
        dist: EntryDistribution::gaussian(1.0).unwrap(),
        reps: 100,
        seed: 41,
        experiment: 0,
        normalization: Normalization::None,
    };
    let est = estimate(&cfg, Statistic::Sigma1Sq, &McOptions::default()).unwrap();
    let rhs = latala_bound(256, 1.0, 3.0).unwrap();
    assert!(est.mean <= 2.0 * rhs);
    // E σ₁² ≈ 4σ²M up to a finite-size correction below the edge.
    assert!((est.mean / (4.0 * 256.0) - 1.0).abs() < 0.05);
}

#[test]
fn stderr_shrinks_like_inverse_root_n() {
    let mk = |reps| ExperimentConfig {
        m: 8,
        r: 2,
        c: "diag:3,2,1".parse().unwrap(),
        dist: EntryDistribution::gaussian(1.0).unwrap(),
        reps,
        seed: 43,
        experiment: 0,
        normalization: Normalization::None,
    };
    let small = estimate(&mk(250), Statistic::ZSup, &McOptions::default()).unwrap();
    let large = estimate(&mk(4000), Statistic::ZSup, &McOptions::default()).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn rademacher_quadratic_form_has_unit_limit() {
    let t = slln_trajectory(
        &URule::Ones,
        &EntryDistribution::rademacher(1.0).unwrap(),
        &[4096],
        Seed::root(47),
    )
    .unwrap();
    assert!((t[0].1 - 1.0).abs() <= 0.1, "{:?}", t);
}

fn selection_rate(sigma: f64, reps: u64) -> f64 {
    let c = DenseMatrix::from_diagonal(&{
        let mut d = vec![0.0; 32];
        d[0] = 5.0;
        d[1] = 4.0;
        d
    })
    .unwrap();
    let dist = EntryDistribution::gaussian(sigma).unwrap();
    let cfg = RankSelectionConfig::new(0.9, sigma * sigma).unwrap();
    let hits = (0..reps)
        .filter(|&k| {
            let e = sample_matrix(&dist, 32, Seed::new(53, 0, k), Normalization::None).unwrap();
            let x = c.checked_add(&e).unwrap();
            empirical_rank_select(&x, &cfg).unwrap() == RankOutcome::Rank(2)
        })
        .count();
    hits as f64 / reps as f64
}

#[test]
fn empirical_selection_recovers_rank_at_high_snr() {
    let rate = selection_rate(0.05, 100);
    assert!(rate >= 0.9, "rate {rate}");
}

/// At σ = 0.5 and M = 32 the bulk of the noise spectrum, whose squared edge is
/// near 4σ²M, lies above the σ²M threshold, and its excess energy outweighs
/// the signal. The cap then sits among the noise directions and the selected
/// rank is far above 2.
#[test]
#[ignore = "the bias-corrected energies keep noise directions above σ²M, so r = 2 is not selected at this noise level"]
fn empirical_selection_recovers_rank_at_unit_snr() {
    let rate = selection_rate(0.5, 100);
    assert!(rate >= 0.9, "rate {rate}");
}
