use ddest::channel::{channel_matrix, generate_wssus, Pulse, TapIndex, TapSet};
use ddest::metrics::{ensemble_isci_power, isci_power, pairwise_sum, FrameAveraging};
use ddest::modem::{build_frame, propagate, transmit, PilotPattern};
use ddest::transforms::{periodic_window, window_w, TFGrid};
use ddest::Complex64;
use rand::Rng;

fn alias_sum(grid: &TFGrid, tau: f64, nu: f64, k: i64) -> Complex64 {
    let (t, f) = (grid.symbol_duration(), grid.subcarrier_spacing());
    let mut acc = Complex64::new(0.0, 0.0);
    for a in -k..=k {
        for b in -k..=k {
            acc += window_w(grid, tau - a as f64 * t, nu - b as f64 * f);
        }
    }
    acc / (grid.n() * grid.m()) as f64
}

#[test]
fn shifted_window_sum_converges_to_dirichlet_product() {
    let mut rng = ddest::rng::stream_rng(2024, 0);
    for (n, m) in [(4usize, 6usize), (5, 7), (8, 8)] {
        let g = TFGrid::from_spacing(100e3, n, m).unwrap();
        for _ in 0..4 {
            let tau = g.symbol_duration() * rng.random::<f64>();
            let nu = g.subcarrier_spacing() * (rng.random::<f64>() - 0.5);
            let want = periodic_window(&g, tau, nu);
            let errs: Vec<f64> = [10, 50, 200].iter().map(|&k| (alias_sum(&g, tau, nu, k) - want).norm() / want.norm()).collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
            assert!(errs[2] < 1e-2, "{errs:?}");
        }
    }
}

#[test]
fn single_realization_matches_received_interference() {
    // Exact expectation over data: zero-fill averaging reproduces the mean
    // interference power of transmitted QPSK frames for one channel.
    let g = TFGrid::from_spacing(200e3, 16, 32).unwrap();
    let pulse = Pulse::rectangular(g.symbol_duration());
    let pattern = PilotPattern::new(&g, 16, 32).unwrap();
    let ch = generate_wssus(1e-6, 18e3, 6, 3).unwrap();
    let taps = TapSet::default_for(g.m());
    let report = isci_power(&ch, &pulse, &g, &taps, FrameAveraging::ZeroFillEdges).unwrap();
    let desired = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
    let interference_only = TapSet::from_taps(taps.interference().collect());
    let powers: Vec<f64> = (0..300)
        .map(|seed| {
            let frame = build_frame(&g, &pattern, seed).unwrap();
            propagate(&frame, &ch, &pulse, &interference_only).norm_sqr()
        })
        .collect();
    let mc = pairwise_sum(&powers) / 300.0 / desired.values().norm_sqr();
    let rel = (mc - report.isci_power).abs() / report.isci_power;
    assert!(rel < 0.02, "mc {mc} closed form {} ({rel})", report.isci_power);
}

#[test]
fn ensemble_formula_matches_transmit_monte_carlo() {
    // Interior positions only: every tap in the truncation has its source
    // symbol inside the frame, so the stationary ensemble value applies.
    let g = TFGrid::from_spacing(200e3, 8, 112).unwrap();
    let pulse = Pulse::rectangular(g.symbol_duration());
    let pattern = PilotPattern::new(&g, 8, 112).unwrap();
    let taps = TapSet::truncated(2, 50);
    let want = ensemble_isci_power(1e-6, 18e3, &pulse, &g, &taps, 128).unwrap();
    let mut interference = Vec::new();
    let mut signal = Vec::new();
    for seed in 0..600u64 {
        let ch = generate_wssus(1e-6, 18e3, 20, seed).unwrap();
        let frame = build_frame(&g, &pattern, seed).unwrap();
        let rx = transmit(&frame, &ch, &pulse, &taps, 0.0, 0).unwrap();
        let h = channel_matrix(&ch, &pulse, &g, TapIndex::DESIRED);
        let x = frame.symbols().values();
        let (mut pi, mut ps) = (0.0, 0.0);
        for n in 2..g.n() {
            for m in 50..g.m() - 50 {
                pi += (rx.y.values()[(n, m)] - x[(n, m)] * h.values()[(n, m)]).norm_sqr();
                ps += h.values()[(n, m)].norm_sqr();
            }
        }
        interference.push(pi);
        signal.push(ps);
    }
    let mc = pairwise_sum(&interference) / pairwise_sum(&signal);
    let rel = (mc - want.isci_power).abs() / want.isci_power;
    assert!(rel < 0.02, "mc {mc} ensemble {} ({rel})", want.isci_power);
}

#[test]
fn stationary_realizations_average_to_ensemble() {
    let g = TFGrid::from_spacing(200e3, 32, 32).unwrap();
    let pulse = Pulse::rectangular(g.symbol_duration());
    let taps = TapSet::default_for(32);
    let want = ensemble_isci_power(0.5e-6, 10e3, &pulse, &g, &taps, 128).unwrap();
    let (mut num, mut den) = (Vec::new(), Vec::new());
    for seed in 0..400 {
        let ch = generate_wssus(0.5e-6, 10e3, 10, seed).unwrap();
        let r = isci_power(&ch, &pulse, &g, &taps, FrameAveraging::Stationary).unwrap();
        num.push(r.isci_power * r.desired_power);
        den.push(r.desired_power);
    }
    let mc = pairwise_sum(&num) / pairwise_sum(&den);
    assert!((mc - want.isci_power).abs() / want.isci_power < 0.02, "mc {mc} ensemble {}", want.isci_power);
}
