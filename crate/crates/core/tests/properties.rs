use proptest::prelude::*;

use rankproj::bounds::{
    drift_bound, latala_bound, pathwise_bound, rank_sandwich, trace_bound_rhs, MinEquivalence,
};
use rankproj::linalg::{
    proj_diff_norms, projection_trace_form, schatten, svd, DenseMatrix, Schatten, SingularSpectrum,
};
use rankproj::localization::{rank_select, singular_interval, tail_index_b, RankSelectionConfig};
use rankproj::montecarlo::CSpec;
use rankproj::randgen::{sample_matrix, sample_projection, EntryDistribution, Normalization, Seed};
use rankproj::zprocess::SignalModel;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=7).prop_flat_map(|m| (Just(m), 1..m))
}

fn law() -> impl Strategy<Value = EntryDistribution> {
    (0usize..5, 0.1f64..3.0).prop_map(|(k, s)| {
        let base = EntryDistribution::catalog()[k];
        EntryDistribution::new(base.kind(), s).unwrap()
    })
}

fn draw(dist: &EntryDistribution, m: usize, seed: u64, stream: u64) -> DenseMatrix {
    sample_matrix(dist, m, Seed::new(seed, stream, 0), Normalization::None).unwrap()
}

/// Random spectra with gaps, ties and zeros.
fn spectrum(len: usize) -> impl Strategy<Value = SingularSpectrum> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0, Just(1.0)], len)
        .prop_map(|v| SingularSpectrum::from_unsorted(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposition_is_exact((m, r) in dims(), dist in law(), seed in any::<u64>()) {
        let model = SignalModel::new(draw(&dist, m, seed, 0), r).unwrap();
        let e = draw(&dist, m, seed, 1);
        let p = sample_projection(m, r, Seed::new(seed, 2, 0)).unwrap();
        let d = model.z_at(&e, &p).unwrap();
        let scale = 1.0 + model.observe(&e).unwrap().frobenius_sq();
        prop_assert!(d.split_error() <= 1e-9 * scale);
    }

    #[test]
    fn suprema_order((m, r) in dims(), dist in law(), seed in any::<u64>()) {
        let model = SignalModel::new(draw(&dist, m, seed, 0), r).unwrap();
        let e = draw(&dist, m, seed, 1);
        let sv = model.sup_values(&e).unwrap();
        let tol = 1e-9 * (1.0 + sv.energy_scale);
        prop_assert!(sv.z >= -tol && sv.z2 >= -tol);
        prop_assert!(sv.z <= sv.z1 + sv.z2 + tol);
        let p = sample_projection(m, r, Seed::new(seed, 2, 0)).unwrap();
        let at = model.z_at(&e, &p).unwrap();
        prop_assert!(at.z <= sv.z + tol && at.z1 <= sv.z1 + tol && at.z2 <= sv.z2 + tol);
    }

    #[test]
    fn pathwise_bound_holds((m, r) in dims(), dist in law(), seed in any::<u64>(), signal in 0.0f64..5.0) {
        let c = draw(&dist, m, seed, 0).scaled(signal).unwrap();
        let model = SignalModel::new(c, r).unwrap();
        let e = draw(&dist, m, seed, 1);
        let sv = model.sup_values(&e).unwrap();
        let y = pathwise_bound(model.spectrum(), m, r, sv.sigma1).unwrap().y;
        prop_assert!(sv.z1 <= y * (1.0 + 1e-8), "z1 = {}, Y = {}", sv.z1, y);
    }

    #[test]
    fn trace_bound_holds((m, r) in dims(), seed in any::<u64>()) {
        let g = EntryDistribution::gaussian(1.0).unwrap();
        let (a, b) = (draw(&g, m, seed, 0), draw(&g, m, seed, 1));
        let p1 = sample_projection(m, r, Seed::new(seed, 2, 0)).unwrap();
        let p2 = sample_projection(m, r, Seed::new(seed, 3, 0)).unwrap();
        let lhs = projection_trace_form(&a, &p2, &p1, &b).unwrap();
        let rhs = trace_bound_rhs(&a, &b, &p1, &p2).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn drift_bounds_hold((m, r) in dims(), dist in law(), seed in any::<u64>()) {
        let model = SignalModel::new(draw(&dist, m, seed, 0), r).unwrap();
        let p = sample_projection(m, r, Seed::new(seed, 1, 0)).unwrap();
        let c = model.c();
        let lhs = p.energy(c) - model.pi_r().energy(c);
        let delta = proj_diff_norms(&p, model.pi_r()).unwrap().s2;
        let b = drift_bound(model.spectrum(), r, delta).unwrap();
        let tol = 1e-9 * (1.0 + c.frobenius_sq());
        prop_assert!(lhs <= b.gap + tol);
        if b.tail_applies {
            prop_assert!(lhs <= b.tail + tol);
        }
    }

    #[test]
    fn projection_distance_norms_are_ordered((m, r) in dims(), seed in any::<u64>()) {
        let p1 = sample_projection(m, r, Seed::new(seed, 0, 0)).unwrap();
        let p2 = sample_projection(m, r, Seed::new(seed, 1, 0)).unwrap();
        let d = proj_diff_norms(&p1, &p2).unwrap();
        prop_assert!(d.sinf <= d.s2 + 1e-12);
        prop_assert!(d.sinf <= 1.0 + 1e-12);
        prop_assert!((d.cross - d.s2 / 2f64.sqrt()).abs() <= 1e-10);
        let dense = p1.to_dense().checked_sub(&p2.to_dense()).unwrap();
        prop_assert!((schatten(&dense, Schatten::Two) - d.s2).abs() <= 1e-9);
    }

    #[test]
    fn spectrum_is_orthogonally_invariant(m in 2usize..7, seed in any::<u64>()) {
        let g = EntryDistribution::gaussian(1.0).unwrap();
        let a = draw(&g, m, seed, 0);
        let q = sample_projection(m, m, Seed::new(seed, 1, 0)).unwrap();
        let qa = DenseMatrix::from_nalgebra(q.basis() * a.as_nalgebra()).unwrap();
        let (s1, s2) = (svd(&a).unwrap().spectrum, svd(&qa).unwrap().spectrum);
        for (x, y) in s1.values().iter().zip(s2.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + s1.lambda(1)));
        }
    }

    #[test]
    fn min_equivalence_chain(s in spectrum(8), sigma in 0.05f64..5.0, r in 1usize..=4) {
        prop_assume!(s.lambda(r) > 0.0);
        let eq = MinEquivalence::new(&s, 8, r, sigma).unwrap();
        prop_assert_eq!(eq.first_broken_link(1e-12), None, "{:?}", eq.chain);
        let (t1, rr) = (eq.gaussian_sum(), eq.three_way_min());
        prop_assert!(rr <= t1 * (1.0 + 1e-12) && t1 <= 2.0 * rr * (1.0 + 1e-12));
    }

    #[test]
    fn latala_is_homogeneous(m in 1usize..500, v in 0.01f64..10.0, c in 0.1f64..10.0) {
        let m4 = 3.0 * v * v;
        let lhs = latala_bound(m, c * c * v, c.powi(4) * m4).unwrap();
        let rhs = c * c * latala_bound(m, v, m4).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn interval_brackets_signal(l1 in 0.1f64..20.0, frac in 0.0f64..0.99, sigma in 0.0f64..5.0) {
        let iv = singular_interval(l1, l1 * frac, sigma).unwrap();
        prop_assert!(l1 <= iv.lower * (1.0 + 1e-15));
        prop_assert!(iv.lower <= iv.upper);
    }

    #[test]
    fn tail_index_is_monotone(m in 1usize..100_000, beta in 1.1f64..5.0) {
        let (b0, b1) = (tail_index_b(m, beta).unwrap(), tail_index_b(m + 1, beta).unwrap());
        prop_assert!(1 <= b0 && b0 <= m);
        prop_assert!(b0 <= b1);
    }

    #[test]
    fn rank_select_is_monotone_in_alpha(s in spectrum(6), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        prop_assume!(!s.is_zero());
        let pick = |alpha: f64| rank_select(&s, &RankSelectionConfig::new(alpha, 0.0).unwrap()).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(pick(lo) <= pick(hi));
        let rank = s.values().iter().filter(|x| **x > 0.0).count();
        prop_assert!(pick(hi) <= rank);
    }

    #[test]
    fn labels_round_trip(dist in law(), ladder in 0.5f64..10.0, q in 0.05f64..1.0) {
        let text = dist.to_string();
        prop_assert_eq!(text.parse::<EntryDistribution>().unwrap(), dist);
        let spec: CSpec = format!("ladder-geometric:{ladder}:{q}").parse().unwrap();
        prop_assert_eq!(spec.to_string().parse::<CSpec>().unwrap(), spec);
    }

    #[test]
    fn draws_are_reproducible(m in 1usize..20, seed in any::<u64>(), dist in law()) {
        prop_assert_eq!(draw(&dist, m, seed, 0), draw(&dist, m, seed, 0));
    }
}

#[test]
fn rank_sandwich_is_exhaustively_ordered() {
    for m in 2..=128 {
        for r in 1..m {
            let (lo, mid, hi) = rank_sandwich(m, r);
            assert!(lo <= mid && mid <= hi, "M={m} r={r}");
        }
    }
}
