use hrc_core::bsde::axioms::terminal_values;
use hrc_core::bsde::{
    comparison_check, conditional_g_expectation, risk_measure, risk_measure_with_error, risk_value, risk_value_on,
    solve_bsde, solve_cost_bsde, RegressionBasis,
};
use hrc_core::problem::{catalog, FunctionPreset};
use hrc_core::sde::{accumulate_cost, brownian_only, simulate, FeedbackPolicy};
use hrc_core::{build_problem, Generator, Player};
use proptest::prelude::*;

const BASIS: RegressionBasis = RegressionBasis { degree: 2 };

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn origin() -> FeedbackPolicy {
    FeedbackPolicy::constant(&[0.0])
}

#[test]
fn constant_terminal_passes_through_every_generator() {
    let b = brownian_only(2, 1.0, 0.125, 500, 3).unwrap();
    for gen in [
        Generator::ZERO,
        Generator::scaled_l1(2.0),
        Generator::scaled_quadratic(1.5),
    ] {
        let s = solve_bsde(&b, &gen, &[-1.25; 500], BASIS).unwrap();
        assert_eq!(s.y0, -1.25);
        assert!((0..8).all(|k| (0..500).all(|p| s.z(p, k) == [0.0, 0.0])));
    }
}

#[test]
fn zero_generator_gives_the_sample_mean() {
    let n = 20_000;
    let b = brownian_only(1, 1.0, 1.0 / 16.0, n, 21).unwrap();
    let xi = terminal_values(&b, |x| x[0]);
    let (_, sd) = mean_sd(&xi);
    let y0 = risk_measure(&b, &Generator::ZERO, &xi, BASIS).unwrap();
    assert!(y0.abs() <= 3.0 * sd / (n as f64).sqrt(), "y0 {y0}");
}

#[test]
fn scaled_l1_of_brownian_endpoint() {
    // xi = B_T has Z = 1, so Y_0 = kappa T
    let (n, kappa) = (40_000, 0.5);
    let b = brownian_only(1, 1.0, 1.0 / 128.0, n, 8).unwrap();
    let xi = terminal_values(&b, |x| x[0]);
    let y0 = risk_measure(&b, &Generator::scaled_l1(kappa), &xi, BASIS).unwrap();
    let se = 1.0 / (n as f64).sqrt();
    assert!((y0 - kappa).abs() <= 0.02 * kappa + 3.0 * se, "y0 {y0}");
}

#[test]
fn square_endpoint_tracks_its_martingale() {
    // E[B_T^2 | F_t] = B_t^2 + (T - t)
    let b = brownian_only(1, 1.0, 1.0 / 32.0, 20_000, 4).unwrap();
    let xi = terminal_values(&b, |x| x[0] * x[0]);
    let s = solve_bsde(&b, &Generator::ZERO, &xi, BASIS).unwrap();
    for k in 0..b.n_steps() {
        let t = b.time(k);
        let ss: f64 = (0..b.n_paths())
            .map(|p| {
                let x = b.state(p, k)[0];
                let e = s.y(p, k) - (x * x + 1.0 - t);
                e * e
            })
            .sum();
        let rms = (ss / b.n_paths() as f64).sqrt();
        assert!(rms <= 0.05, "step {k}: rms {rms}");
    }
}

#[test]
fn brownian_endpoint_is_its_own_martingale() {
    let b = brownian_only(1, 1.0, 1.0 / 32.0, 20_000, 6).unwrap();
    let xi = terminal_values(&b, |x| x[0]);
    for k in [0, 8, 16, 31] {
        let y = conditional_g_expectation(&b, &Generator::ZERO, &xi, BASIS, k).unwrap();
        let ss: f64 = (0..b.n_paths()).map(|p| (y[p] - b.state(p, k)[0]).powi(2)).sum();
        let rms = (ss / b.n_paths() as f64).sqrt();
        assert!(rms <= 0.05, "step {k}: rms {rms}");
    }
}

#[test]
fn comparison_of_identical_and_lifted_terminals() {
    let b = brownian_only(1, 1.0, 0.125, 2000, 10).unwrap();
    let xi = terminal_values(&b, |x| x[0].abs());
    let gen = Generator::scaled_l1(0.5);
    let same = comparison_check(&b, &gen, &gen, &xi, &xi, BASIS).unwrap();
    assert!(same.ordered);
    assert_eq!(same.y_a0, same.y_b0);
    let lifted: Vec<f64> = xi.iter().map(|v| v + 1.0).collect();
    let rep = comparison_check(&b, &gen, &gen, &lifted, &xi, BASIS).unwrap();
    assert!(rep.ordered && (rep.y_a0 - rep.y_b0 - 1.0).abs() <= 1e-6, "{rep:?}");
}

#[test]
fn conditional_expectation_at_the_start_is_the_risk_value() {
    let b = brownian_only(1, 1.0, 0.125, 3000, 12).unwrap();
    let xi = terminal_values(&b, |x| (x[0] - 0.2).abs());
    let gen = Generator::scaled_l1(0.3);
    let y0 = risk_measure(&b, &gen, &xi, BASIS).unwrap();
    assert!(conditional_g_expectation(&b, &gen, &xi, BASIS, 0)
        .unwrap()
        .iter()
        .all(|y| *y == y0));
}

#[test]
fn risk_value_of_simple_costs() {
    let zero = build_problem(&catalog::zero_cost(1)).unwrap();
    let r = risk_value(&zero, &origin(), &origin(), Player::Leader, 500, 0.125, 1, BASIS).unwrap();
    assert_eq!((r.value, r.std_error), (0.0, 0.0));

    let mut cfg = catalog::zero_cost(1);
    cfg.follower_cost = FunctionPreset::constant_cost(1.0);
    cfg.follower_generator = Generator::scaled_l1(0.4);
    let unit = build_problem(&cfg).unwrap();
    let r = risk_value(&unit, &origin(), &origin(), Player::Follower, 500, 1.0 / 64.0, 1, BASIS).unwrap();
    assert!((r.value - 1.0).abs() <= 1e-6, "{}", r.value);
}

#[test]
fn lq_risk_value_with_constant_policies() {
    // X = x0 + 0.5 B, cost X_T^2, E = x0^2 + 0.25 T
    let spec = build_problem(&catalog::lq_decoupled(0.0)).unwrap();
    let n = 20_000;
    let r = risk_value(&spec, &origin(), &origin(), Player::Leader, n, 1.0 / 32.0, 5, BASIS).unwrap();
    let exact = 0.25 + 0.25;
    assert!(
        (r.value - exact).abs() <= 3.0 * r.std_error,
        "{} vs {exact} (se {})",
        r.value,
        r.std_error
    );
}

#[test]
fn cost_bsde_starts_at_the_risk_value() {
    let spec = build_problem(&catalog::lq_decoupled(0.2)).unwrap();
    let b = simulate(
        &spec,
        &FeedbackPolicy::constant(&[0.3]),
        &FeedbackPolicy::constant(&[-0.1]),
        4000,
        1.0 / 16.0,
        2,
    )
    .unwrap();
    for p in Player::BOTH {
        let s = solve_cost_bsde(&b, &spec, p, BASIS).unwrap();
        let r = risk_value_on(&b, &spec, p, BASIS).unwrap();
        assert_eq!(s.y0, r.value);
        assert_eq!(
            s.y_at(b.n_steps()),
            &hrc_core::sde::terminal_costs(&b, &spec, p).unwrap()[..]
        );
    }
}

#[test]
fn zero_generator_risk_value_is_the_mean_cost() {
    let spec = build_problem(&catalog::lq_decoupled(0.0)).unwrap();
    let b = simulate(
        &spec,
        &FeedbackPolicy::constant(&[0.5]),
        &FeedbackPolicy::constant(&[0.2]),
        5000,
        0.125,
        9,
    )
    .unwrap();
    let (m, _) = mean_sd(&accumulate_cost(&b, &spec, Player::Follower).unwrap());
    let r = risk_value_on(&b, &spec, Player::Follower, BASIS).unwrap();
    assert!((r.value - m).abs() <= 1e-10, "{} vs {m}", r.value);
}

#[test]
fn heavier_generator_and_larger_terminal_order_the_values() {
    for seed in 0..100 {
        let b = brownian_only(1, 1.0, 1.0 / 16.0, 1000, seed).unwrap();
        let hi = terminal_values(&b, |x| x[0].abs());
        let lo = terminal_values(&b, |x| x[0].abs() - 0.1 * x[0] * x[0]);
        let rep = comparison_check(&b, &Generator::scaled_l1(0.5), &Generator::ZERO, &hi, &lo, BASIS).unwrap();
        assert!(rep.ordered, "seed {seed}: {rep:?}");
    }
}

#[test]
fn valuation_is_consistent_in_time() {
    let b = brownian_only(1, 1.0, 1.0 / 16.0, 5000, 30).unwrap();
    let xi = terminal_values(&b, |x| x[0] * x[0] - 0.5 * x[0]);
    for gen in [Generator::scaled_l1(0.5), Generator::scaled_quadratic(0.4)] {
        let y0 = risk_measure(&b, &gen, &xi, BASIS).unwrap();
        let mid = conditional_g_expectation(&b, &gen, &xi, BASIS, 8).unwrap();
        let two_stage = risk_measure(&b.truncate(8).unwrap(), &gen, &mid, BASIS).unwrap();
        assert!((two_stage - y0).abs() <= 1e-10, "{two_stage} vs {y0}");
    }
}

#[test]
fn path_order_does_not_matter() {
    let n = 3000;
    let b = brownian_only(2, 1.0, 0.125, n, 14).unwrap();
    let perm: Vec<usize> = (0..n).map(|p| (p * 7 + 3) % n).collect();
    let pb = b.permute_paths(&perm).unwrap();
    let f = |x: &[f64]| (x[0] + x[1]).abs() + x[0] * x[1];
    for gen in [Generator::ZERO, Generator::scaled_l1(0.7)] {
        let a = risk_measure(&b, &gen, &terminal_values(&b, f), BASIS).unwrap();
        let c = risk_measure(&pb, &gen, &terminal_values(&pb, f), BASIS).unwrap();
        assert!((a - c).abs() <= 1e-10, "{a} vs {c}");
    }
}

#[test]
fn time_step_error_shrinks_at_first_order() {
    let fine = brownian_only(1, 1.0, 1.0 / 256.0, 20_000, 17).unwrap();
    let gen = Generator::scaled_l1(0.5);
    let y: Vec<f64> = [32, 16, 8, 4]
        .iter()
        .map(|f| {
            let b = fine.coarsen(*f).unwrap();
            risk_measure(&b, &gen, &terminal_values(&b, |x| x[0] * x[0]), BASIS).unwrap()
        })
        .collect();
    for w in y.windows(3) {
        let ratio = (w[0] - w[1]) / (w[1] - w[2]);
        assert!((1.5..=3.0).contains(&ratio), "{y:?}: ratio {ratio}");
    }
}

fn generator_strategy() -> impl Strategy<Value = Generator> {
    prop_oneof![
        Just(Generator::ZERO),
        (0.0f64..2.0).prop_map(Generator::scaled_l1),
        (0.0f64..1.0).prop_map(Generator::scaled_quadratic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_terminal_has_zero_value(gen in generator_strategy(), seed in any::<u64>()) {
        let b = brownian_only(1, 1.0, 0.125, 400, seed).unwrap();
        prop_assert_eq!(risk_measure(&b, &gen, &[0.0; 400], BASIS).unwrap(), 0.0);
    }

    #[test]
    fn constant_shifts_pass_through(
        gen in generator_strategy(),
        seed in any::<u64>(),
        coeffs in prop::array::uniform3(-2.0f64..2.0),
        shift in -5.0f64..5.0,
    ) {
        let b = brownian_only(1, 1.0, 0.125, 600, seed).unwrap();
        let xi = terminal_values(&b, |x| coeffs[0] + coeffs[1] * x[0] + coeffs[2] * x[0].abs());
        let moved: Vec<f64> = xi.iter().map(|v| v + shift).collect();
        let (y, _) = risk_measure_with_error(&b, &gen, &xi, BASIS).unwrap();
        let (ys, _) = risk_measure_with_error(&b, &gen, &moved, BASIS).unwrap();
        prop_assert!((ys - y - shift).abs() <= 1e-9, "{} vs {}", ys, y + shift);
    }
}
