use ddest::channel::{generate_wssus, Pulse, TapSet};
use ddest::estimator::{interpolate, PilotObservation};
use ddest::metrics::{achievable_rate, cdf, training_overhead_for};
use ddest::modem::{build_frame, propagate, PilotPattern};
use ddest::transforms::{
    derotate_dd, isfft, phase_rotate_tf, rotate_dd, sfft, to_dd, DDMatrix, TFGrid, TFMatrix,
};
use ddest::{CMatrix, Complex64};
use proptest::prelude::*;
use rand::Rng;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMatrix::from_vec(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = CMatrix> {
    (1usize..10, 1usize..10).prop_flat_map(|(r, c)| matrix(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sfft_round_trip(a in sized_matrix()) {
        let (n, m) = a.shape();
        let back = isfft(&sfft(&a, n, m).unwrap(), n, m).unwrap();
        prop_assert!(back.rel_error(&a) < 1e-12);
    }

    #[test]
    fn sfft_is_linear(a in matrix(4, 6), b in matrix(4, 6), s in -2.0f64..2.0) {
        let lhs = sfft(&(&a.scale(s) + &b), 4, 6).unwrap();
        let rhs = &sfft(&a, 4, 6).unwrap().scale(s) + &sfft(&b, 4, 6).unwrap();
        prop_assert!(lhs.dist_sqr(&rhs).sqrt() < 1e-10);
    }

    #[test]
    fn rotation_is_invertible(a in matrix(8, 6), half in 1usize..4) {
        let g = TFGrid::from_spacing(50e3, 6, 8).unwrap();
        let h = DDMatrix::new(g, a.clone()).unwrap();
        let back = derotate_dd(&rotate_dd(&h, 2 * half).unwrap(), 2 * half).unwrap();
        prop_assert_eq!(back.values(), &a);
    }

    #[test]
    fn phase_rotation_is_dd_rotation(a in matrix(8, 6), half in 1usize..4) {
        let g = TFGrid::from_spacing(50e3, 8, 6).unwrap();
        let h = TFMatrix::new(g, a).unwrap();
        let lhs = to_dd(&phase_rotate_tf(&h, 2 * half));
        let rhs = rotate_dd(&to_dd(&h), 2 * half).unwrap();
        prop_assert!(lhs.values().rel_error(rhs.values()) < 1e-12);
    }

    #[test]
    fn interpolation_is_linear(a in matrix(4, 3), b in matrix(4, 3), s in -3.0f64..3.0) {
        let g = TFGrid::from_spacing(50e3, 16, 12).unwrap();
        let p = PilotPattern::new(&g, 4, 4).unwrap();
        let run = |x: CMatrix| interpolate(&PilotObservation::new(x, p, g, 0).unwrap()).unwrap().h.into_values();
        let lhs = run(&a.scale(s) + &b);
        let rhs = &run(a).scale(s) + &run(b);
        prop_assert!(lhs.dist_sqr(&rhs).sqrt() < 1e-10);
    }

    #[test]
    fn transmission_is_linear_in_symbols(seed in 0u64..1000, s in -2.0f64..2.0) {
        let g = TFGrid::from_spacing(200e3, 8, 8).unwrap();
        let pulse = Pulse::rectangular(g.symbol_duration());
        let p = PilotPattern::new(&g, 2, 2).unwrap();
        let ch = generate_wssus(1e-6, 18e3, 3, seed).unwrap();
        let taps = TapSet::default_for(8);
        let f1 = build_frame(&g, &p, seed).unwrap();
        let f2 = build_frame(&g, &p, seed + 1).unwrap();
        let mixed = f1.with_symbols(&f1.symbols().values().scale(s) + f2.symbols().values()).unwrap();
        let lhs = propagate(&mixed, &ch, &pulse, &taps);
        let rhs = &propagate(&f1, &ch, &pulse, &taps).scale(s) + &propagate(&f2, &ch, &pulse, &taps);
        prop_assert!(lhs.dist_sqr(&rhs).sqrt() < 1e-10);
    }

    #[test]
    fn rate_is_monotone(
        sig in 0.0f64..10.0, isci in 0.0f64..1.0, noise in 0.01f64..1.0, err in 0.0f64..1.0,
        ov in 0.0f64..0.9, d in 0.0f64..0.5,
    ) {
        let base = achievable_rate(sig, isci, noise, err, ov).unwrap().rate;
        prop_assert!(achievable_rate(sig, isci, noise, err, (ov + d).min(0.99)).unwrap().rate <= base + 1e-12);
        prop_assert!(achievable_rate(sig, isci + d, noise, err, ov).unwrap().rate <= base + 1e-12);
        prop_assert!(achievable_rate(sig, isci, noise + d, err, ov).unwrap().rate <= base + 1e-12);
        prop_assert!(achievable_rate(sig, isci, noise, err + d, ov).unwrap().rate <= base + 1e-12);
        let r = achievable_rate(sig, isci, noise, err, ov).unwrap();
        prop_assert!((r.rate - (1.0 - ov) * (1.0 + r.sinr).log2()).abs() < 1e-12);
    }

    #[test]
    fn cdf_ordinates_are_a_distribution(v in prop::collection::vec(-5i32..5, 1..60)) {
        let xs: Vec<f64> = v.iter().map(|&i| i as f64 * 0.5).collect();
        let c = cdf(&xs).unwrap();
        prop_assert!(c.values.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(c.ordinates.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.ordinates.iter().all(|&o| o > 0.0 && o <= 1.0));
        prop_assert_eq!(*c.ordinates.last().unwrap(), 1.0);
        for &x in &xs {
            let below = xs.iter().filter(|&&y| y <= x).count() as f64 / xs.len() as f64;
            prop_assert!((c.eval(x) - below).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_samples_have_small_ks_distance() {
    let mut rng = ddest::rng::stream_rng(17, 0);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let c = cdf(&xs).unwrap();
    let d = c.ks_distance(|x| x.clamp(0.0, 1.0));
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn overhead_gap_shrinks_with_bs() {
    // τ_D ν_D = 0.04 at BS = 10³ … 10⁶ with TF = 1
    let mut last = f64::INFINITY;
    for side in [32usize, 100, 317, 1000] {
        let g = TFGrid::from_spacing(200e3, side, side).unwrap();
        let o = training_overhead_for(&g, 1e-6, 40e3).unwrap();
        let gap = o.ratio - 0.04;
        assert!((gap - 4.0 / g.bs()).abs() < 1e-12);
        assert!(gap < last);
        assert!(o.exact_ratio >= o.ratio - 1e-12);
        last = gap;
    }
}
