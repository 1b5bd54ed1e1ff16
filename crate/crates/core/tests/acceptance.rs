//! Acceptance suite: one test per shipping criterion. Each test prints a
//! single PASS line with the measured quantities (visible with
//! `cargo test --test acceptance -- --nocapture`) and enforces its runtime
//! budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zfregion_core::capacity::{
    capacity, epi_lower_bound, mc_mutual_information, CapacityFn, SnrRatio,
};
use zfregion_core::channel_model::{
    build_channel, percentage_loss_curve, sweep_displacement, LambertianParams, RoomLayout,
};
use zfregion_core::geometry::{
    self, in_parallelogram, l1_max, l2_xi, oracle_l1_max, oracle_l2_xi, rect_in_parallelogram,
    ChannelMatrix, Rectangle,
};
use zfregion_core::rate_region::{
    contains, r_alpha_max_detail, sym_rate, trace_boundary, verify_containment, DimmingScenario,
    RatePoint,
};
use zfregion_core::transceiver::{run_sim, TxConfig};

const XI_SWEEP: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75,
    0.80, 0.85, 0.90, 0.95,
];

fn random_canonical(rng: &mut ChaCha8Rng) -> ChannelMatrix {
    loop {
        let raw = [
            [rng.random_range(0.05..5.0), rng.random_range(0.05..5.0)],
            [rng.random_range(0.05..5.0), rng.random_range(0.05..5.0)],
        ];
        if let Ok(h) = ChannelMatrix::canonicalize(raw) {
            return h;
        }
    }
}

fn reference_scenario() -> (ChannelMatrix, CapacityFn) {
    let h = build_channel(&RoomLayout::default(), &LambertianParams::default()).unwrap();
    let cap = CapacityFn::new(SnrRatio::from_db_power(70.0).unwrap());
    (h, cap)
}

#[test]
fn criterion_1_geometry_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let grid_step = 1e-6;
    let mut worst_l1 = 0.0_f64;
    let mut worst_l2 = 0.0_f64;
    for _ in 0..200 {
        let h = random_canonical(&mut rng);
        for xi in XI_SWEEP {
            let cap = l1_max(&h, xi).unwrap();
            let oracle = oracle_l1_max(&h, xi, grid_step).unwrap();
            worst_l1 = worst_l1.max((cap - oracle).abs());
            for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let x = frac * cap;
                let closed = l2_xi(&h, xi, x).unwrap();
                let oracle = oracle_l2_xi(&h, xi, x, grid_step).unwrap();
                worst_l2 = worst_l2.max((closed - oracle).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst_l1 <= 1e-5, "l1_max disagreement {worst_l1}");
    assert!(worst_l2 <= 1e-5, "l2_xi disagreement {worst_l2}");
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS: geometry-oracle equivalence — max |l1_max - oracle| = {worst_l1:.2e}, \
         max |l2_xi - oracle| = {worst_l2:.2e} over 200 channels x 19 xi ({elapsed:.2?})"
    );
}

#[test]
fn criterion_2_symmetry_and_monotonicity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut worst_sym = 0.0_f64;
    let mut worst_dominance = f64::NEG_INFINITY;
    let mut monotone_violations = 0u64;
    for _ in 0..200 {
        let h = random_canonical(&mut rng);
        let slope_cap = (h.h21() / h.h11()).max(h.h22() / h.h12());
        // Remark on l1_max: exact symmetry and a unique maximum at 1/2.
        let mut prev_l1 = -1.0;
        for xi in XI_SWEEP {
            let a = l1_max(&h, xi).unwrap();
            let b = l1_max(&h, 1.0 - xi).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "l1_max symmetry at xi = {xi}");
            if xi <= 0.5 {
                assert!(a > prev_l1, "l1_max not strictly increasing at {xi}");
                prev_l1 = a;
            }
        }
        for xi in XI_SWEEP {
            let cap = l1_max(&h, xi).unwrap();
            let mut prev = f64::INFINITY;
            let mut prev_x = 0.0;
            for k in 0..=96 {
                let x = cap * k as f64 / 96.0;
                let v = l2_xi(&h, xi, x).unwrap();
                // Lemma: non-increasing, Lipschitz with the case slopes.
                if v > prev + 1e-12 {
                    monotone_violations += 1;
                }
                if k > 0 {
                    assert!(
                        (prev - v).abs() <= slope_cap * (x - prev_x) * (1.0 + 1e-9) + 1e-12,
                        "continuity break at xi {xi} x {x}"
                    );
                }
                // Lemma: symmetric about 1/2.
                worst_sym = worst_sym.max((v - l2_xi(&h, 1.0 - xi, x).unwrap()).abs());
                prev = v;
                prev_x = x;
            }
            // Dominance of xi = 1/2 over the full sweep.
            let report = verify_containment(&h, xi, 97).unwrap();
            worst_dominance = worst_dominance.max(report.max_violation());
            // Up/down extensions coincide exactly at xi = 1/2.
            let up = geometry::l2_up(&h, 0.5, 0.5 * cap).unwrap();
            let down = geometry::l2_down(&h, 0.5, 0.5 * cap).unwrap();
            assert_eq!(up.to_bits(), down.to_bits());
            // The maximal segment and sampled rectangles actually fit.
            let d = h.dimming_point(xi).unwrap();
            assert!(rect_in_parallelogram(
                &h,
                &Rectangle::new((d.u1, d.u2), cap, 0.0),
                1e-9
            ));
            let l2 = l2_xi(&h, xi, 0.5 * cap).unwrap();
            assert!(rect_in_parallelogram(
                &h,
                &Rectangle::new((d.u1, d.u2), 0.5 * cap, l2),
                1e-9
            ));
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(monotone_violations, 0);
    assert!(worst_sym <= 1e-12, "l2 symmetry residual {worst_sym}");
    assert!(worst_dominance <= 1e-12, "dominance violation {worst_dominance}");
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS: symmetry/monotonicity — l2 symmetry residual = {worst_sym:.2e}, \
         dominance violation = {worst_dominance:.2e}, 0 monotonicity violations ({elapsed:.2?})"
    );
}

#[test]
fn criterion_3_capacity_validation() {
    let start = Instant::now();
    let snr = SnrRatio::from_linear(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut worst_mc = 0.0_f64;
    let mut worst_epi = f64::NEG_INFINITY;
    let mut worst_scale = 0.0_f64;
    let mut prev = -1.0_f64;
    for k in 0..20 {
        // 20 grid points spanning L*snr in [0.1, 1e4].
        let rho = 0.1 * 10f64.powf(5.0 * k as f64 / 19.0);
        let c = capacity(rho, snr).unwrap();
        let mc = mc_mutual_information(rho, snr, 10_000_000, 1000 + k).unwrap();
        worst_mc = worst_mc.max((c - mc).abs());
        worst_epi = worst_epi.max(epi_lower_bound(rho, snr) - c);
        assert!(c > prev + 1e-9, "capacity not strictly increasing at {rho}");
        prev = c;
        let scale: f64 = rng.random_range(0.1..10.0);
        let scaled = capacity(rho * scale, SnrRatio::from_linear(1.0 / scale).unwrap()).unwrap();
        worst_scale = worst_scale.max((c - scaled).abs());
    }
    let k = 3.7;
    let direct = capacity(1.0, SnrRatio::from_linear(37.0).unwrap()).unwrap();
    let scaled = capacity(k, SnrRatio::from_linear(10.0).unwrap()).unwrap();
    worst_scale = worst_scale.max((direct - scaled).abs());
    let elapsed = start.elapsed();
    assert!(worst_mc <= 0.01, "quadrature vs MC disagreement {worst_mc}");
    assert!(worst_epi <= 1e-6, "EPI lower bound violated by {worst_epi}");
    assert!(worst_scale <= 1e-9, "scale invariance residual {worst_scale}");
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 PASS: capacity validation — max |quad - MC(1e7)| = {worst_mc:.2e} bits, \
         max EPI excess = {worst_epi:.2e}, scale-invariance residual = {worst_scale:.2e} ({elapsed:.2?})"
    );
}

#[test]
fn criterion_4_boundary_nesting_and_symmetry() {
    let start = Instant::now();
    let (h, cap) = reference_scenario();
    let xis = [0.1, 0.2, 0.3, 0.4, 0.5];
    let boundaries: Vec<_> = xis
        .iter()
        .map(|&xi| trace_boundary(&h, &cap, xi, 512).unwrap())
        .collect();
    // Strict nesting: every boundary point of the smaller region is inside
    // the next, and the regions strictly grow.
    for w in boundaries.windows(2) {
        let (inner, outer) = (&w[0], &w[1]);
        assert!(l1_max(&h, inner.xi).unwrap() < l1_max(&h, outer.xi).unwrap());
        for s in &inner.samples {
            assert!(
                contains(&h, &cap, outer.xi, s.rate).unwrap().is_inside(),
                "xi = {} point ({}, {}) escaped xi = {}",
                inner.xi,
                s.rate.r1,
                s.rate.r2,
                outer.xi
            );
        }
    }
    let b03 = trace_boundary(&h, &cap, 0.3, 512).unwrap();
    let b07 = trace_boundary(&h, &cap, 0.7, 512).unwrap();
    assert_eq!(b03.samples.len(), b07.samples.len());
    let mut worst = 0.0_f64;
    for (a, b) in b03.samples.iter().zip(&b07.samples) {
        worst = worst.max((a.rate.r1 - b.rate.r1).abs());
        worst = worst.max((a.rate.r2 - b.rate.r2).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-9, "xi = 0.3 vs 0.7 boundary mismatch {worst}");
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 4 PASS: boundary reproduction — xi in {{0.1..0.5}} strictly nested, \
         xi = 0.3 vs 0.7 mismatch = {worst:.2e} bits ({elapsed:.2?})"
    );
}

#[test]
fn criterion_5_symmetric_rate_vs_dimming() {
    let start = Instant::now();
    let (h, cap) = reference_scenario();
    let rates: Vec<(f64, f64)> = (0..=100)
        .map(|k| {
            let xi = k as f64 / 100.0;
            (xi, sym_rate(&h, &cap, xi).unwrap())
        })
        .collect();
    let (peak_xi, peak) = rates
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    assert_eq!(peak_xi, 0.5, "peak not at xi = 1/2");
    let at_04 = rates[40].1;
    let drop = 100.0 * (1.0 - at_04 / peak);
    assert!(
        (6.0..=16.0).contains(&drop),
        "drop from 0.5 to 0.4 is {drop:.2}%, outside 11% +/- 5"
    );
    let mut worst_sym = 0.0_f64;
    for k in 0..=100 {
        let mirrored = rates[100 - k].1;
        worst_sym = worst_sym.max((rates[k].1 - mirrored).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst_sym <= 1e-9, "sym-rate asymmetry {worst_sym}");
    assert_eq!(rates[0].1, 0.0);
    assert_eq!(rates[100].1, 0.0);
    println!(
        "ACCEPTANCE 5 PASS: symmetric rate curve — peak {peak:.4} bits at xi = 0.5, \
         drop to xi = 0.4 = {drop:.2}%, asymmetry = {worst_sym:.2e} ({elapsed:.2?})"
    );
}

#[test]
fn criterion_6_coverage_sweep() {
    let start = Instant::now();
    let (_, cap) = reference_scenario();
    let ds: Vec<f64> = (-24..=24).map(|k| 0.1 * k as f64).collect();
    let cells = sweep_displacement(
        &RoomLayout::default(),
        &LambertianParams::default(),
        &cap,
        0.1,
        &ds,
        &ds,
    )
    .unwrap();
    let best = cells
        .iter()
        .max_by(|a, b| a.sym_rate_bits.partial_cmp(&b.sym_rate_bits).unwrap())
        .unwrap();
    let mag1 = best.d1.abs();
    let mag2 = best.d2.abs();
    assert!(
        (0.9..=1.5).contains(&mag1) && (0.9..=1.5).contains(&mag2),
        "optimum at ({}, {}) outside 1.2 +/- 0.3",
        best.d1,
        best.d2
    );
    assert!(
        best.d1 * best.d2 < 0.0 && (mag1 - mag2).abs() <= 0.1 + 1e-12,
        "optimum not antisymmetric: ({}, {})",
        best.d1,
        best.d2
    );
    for cell in &cells {
        if (cell.d1 - cell.d2).abs() < 1e-12 {
            assert!(cell.singular && cell.sym_rate_bits == 0.0);
        }
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 6 PASS: coverage sweep — optimum at ({}, {}) with {:.4} bits, \
         co-located diagonal singular ({elapsed:.2?})",
        best.d1, best.d2, best.sym_rate_bits
    );
}

#[test]
fn criterion_7_percentage_loss() {
    let start = Instant::now();
    let (_, cap) = reference_scenario();
    let deltas: Vec<f64> = (0..=50).map(|k| 0.02 * k as f64).collect();
    let layout = RoomLayout::default();
    let params = LambertianParams::default();
    let curve03 = percentage_loss_curve(&layout, &params, &cap, 0.3, &deltas).unwrap();
    let curve01 = percentage_loss_curve(&layout, &params, &cap, 0.1, &deltas).unwrap();
    let loss = |curve: &zfregion_core::channel_model::LossCurve, d: f64| {
        curve
            .points
            .iter()
            .find(|p| (p.displacement_m - d).abs() < 1e-12)
            .unwrap()
            .loss_percent
    };
    let at_40 = loss(&curve03, 0.4);
    let at_80 = loss(&curve03, 0.8);
    assert!(
        (2.0..=10.0).contains(&at_40),
        "loss at 40 cm = {at_40:.2}%, outside 6% +/- 4"
    );
    assert!(
        (20.0..=40.0).contains(&at_80),
        "loss at 80 cm = {at_80:.2}%, outside 30% +/- 10"
    );
    let radius = curve03
        .points
        .iter()
        .find(|p| p.loss_percent >= 20.0)
        .unwrap()
        .displacement_m;
    assert!(
        (0.55..=0.85).contains(&radius),
        "20%-loss radius = {radius} m, outside 0.70 +/- 0.15"
    );
    for (a, b) in curve01.points.iter().zip(&curve03.points) {
        if a.displacement_m <= 0.8 + 1e-12 {
            assert!(
                a.loss_percent >= b.loss_percent - 1e-9,
                "xi = 0.1 loss {} below xi = 0.3 loss {} at {} m",
                a.loss_percent,
                b.loss_percent,
                a.displacement_m
            );
        }
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 7 PASS: percentage loss — {at_40:.2}% at 40 cm, {at_80:.2}% at 80 cm, \
         20%-loss radius = {radius} m, xi = 0.1 dominates ({elapsed:.2?})"
    );
}

#[test]
fn criterion_8_transceiver_simulation() {
    let start = Instant::now();
    let (h, cap) = reference_scenario();
    let xi = 0.3;
    let on_boundary = r_alpha_max_detail(&h, &cap, xi, 1.0).unwrap();
    let targets = RatePoint::new(0.9 * on_boundary.rate.r1, 0.9 * on_boundary.rate.r2);
    let config = TxConfig {
        scenario: DimmingScenario {
            channel: h,
            snr: cap.snr(),
            xi,
        },
        targets,
        num_symbols: 1_000_000,
        seed: 0xC8,
    };
    // run_sim fails on any peak/non-negativity violation, so success means
    // zero violations across the run.
    let report = run_sim(&config, &cap).unwrap();
    // Expected standard error of the per-LED mean power from the uniform
    // codewords routed through H^-1.
    let det = h.det();
    let hinv = [
        [h.h22() / det, -h.h12() / det],
        [-h.h21() / det, h.h11() / det],
    ];
    for i in 0..2 {
        let var: f64 = (0..2)
            .map(|j| (hinv[i][j] * report.interval_len[j]).powi(2) / 12.0)
            .sum();
        let stderr = (var / report.num_symbols as f64).sqrt();
        let dev = (report.x_mean[i] - xi).abs();
        assert!(
            dev <= 4.0 * stderr,
            "LED {} mean {} deviates from xi by {dev:.2e} > 4 x stderr {stderr:.2e}",
            i + 1,
            report.x_mean[i]
        );
        assert!(report.x_min[i] >= -1e-12 && report.x_max[i] <= 1.0 + 1e-12);
        let mi_err = (report.mi_bits[i] - report.rate_bits[i]).abs();
        assert!(
            mi_err <= 0.02,
            "user {} plug-in MI off by {mi_err:.4} bits",
            i + 1
        );
    }
    assert!(
        report.mui_residual_max <= 1e-10,
        "MUI residual {}",
        report.mui_residual_max
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 8 PASS: transceiver — 1e6 symbols, zero violations, means ({:.5}, {:.5}) vs \
         xi = {xi}, MUI residual = {:.2e}, MI errors = ({:.4}, {:.4}) bits ({elapsed:.2?})",
        report.x_mean[0],
        report.x_mean[1],
        report.mui_residual_max,
        (report.mi_bits[0] - report.rate_bits[0]).abs(),
        (report.mi_bits[1] - report.rate_bits[1]).abs()
    );
}

#[test]
fn criterion_9_alpha_rate_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let mut worst_residual = 0.0_f64;
    let mut worst_boundary = 0.0_f64;
    let mut worst_square = 0.0_f64;
    for _ in 0..20 {
        let h = random_canonical(&mut rng);
        let snr = SnrRatio::from_linear(rng.random_range(5.0..500.0)).unwrap();
        let xi = rng.random_range(0.05..0.95);
        let cap = CapacityFn::new(snr);
        for alpha in [0.5, 1.0, 2.0] {
            let p = r_alpha_max_detail(&h, &cap, xi, alpha).unwrap();
            assert!((p.rate.r2 - alpha * p.rate.r1).abs() <= 1e-9);
            // Root residual of alpha*C(x) - C(L2(x)) at the returned x.
            let residual =
                (alpha * cap.eval(p.x).unwrap() - cap.eval(p.l2).unwrap()).abs();
            worst_residual = worst_residual.max(residual);
            // The point sits on the traced boundary: map r1 back to x and
            // compare r2 against the boundary rate there.
            let x_b = cap.inverse(p.rate.r1).unwrap();
            let r2_b = cap.eval(l2_xi(&h, xi, x_b.min(l1_max(&h, xi).unwrap())).unwrap()).unwrap();
            worst_boundary = worst_boundary.max((r2_b - p.rate.r2).abs());
            assert!(contains(&h, &cap, xi, p.rate).unwrap().is_inside());
            if alpha == 1.0 {
                worst_square = worst_square.max((p.x - p.l2).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst_residual <= 1e-9, "root residual {worst_residual}");
    assert!(worst_boundary <= 1e-6, "boundary distance {worst_boundary} bits");
    assert!(worst_square <= 1e-8, "square mismatch {worst_square}");
    println!(
        "ACCEPTANCE 9 PASS: alpha-max points — root residual = {worst_residual:.2e} bits, \
         boundary distance = {worst_boundary:.2e} bits, square mismatch = {worst_square:.2e} \
         over 20 scenarios x 3 alphas ({elapsed:.2?})"
    );
}
