use preauction_core::equilibria::{full_commitment, ThresholdScanner};
use preauction_core::numeric::linspace;
use preauction_core::perturbations::{
    entry_subsidy_factor, lying_cost_epsilon_bar, lying_cost_sets_with, lying_cost_sustainable_set, LyingCostSpec, SubsidyDelivery,
};
use preauction_core::statics::{probabilities, statics_record, sweep_c, tau_s_star, MONOTONE_SLACK};
use preauction_core::{Distribution, NumericConfig, Policy, ValueDistribution};
use proptest::prelude::*;

fn cfg() -> NumericConfig {
    NumericConfig::default()
}

fn example() -> Distribution {
    Distribution::uniform(0.5, 2.0).unwrap()
}

#[test]
fn probabilities_examples() {
    let f = example();
    let p = probabilities(&f, 0.75, Policy::AnyH, &cfg()).unwrap();
    assert!((p.p_auction - 35.0 / 36.0).abs() < 1e-12);
    assert!((p.p_no_trade_given_auction - 3.0 / 35.0).abs() < 1e-12);

    // Above p_F every auction that runs sells.
    let p = probabilities(&f, 1.5, Policy::AnyH, &cfg()).unwrap();
    assert!((p.p_auction - 5.0 / 9.0).abs() < 1e-12);
    assert_eq!(p.p_no_trade_given_auction, 0.0);
    assert!(probabilities(&f, 2.0, Policy::AnyH, &cfg()).is_err());
}

#[test]
fn small_grid_is_monotone() {
    let f = example();
    let sweep = sweep_c(&f, &[0.6, 0.8, 1.0], &cfg()).unwrap();
    assert!(sweep.records.iter().all(|r| r.flag.is_none()));
    assert!(sweep.monotone(), "{:?}", sweep.findings);
    let taus: Vec<f64> = sweep.records.iter().map(|r| r.tau_s_star.unwrap()).collect();
    assert!(taus[0] < taus[1] && taus[1] < taus[2]);
}

#[test]
fn twenty_point_sweep_is_monotone() {
    let f = example();
    let grid = linspace(0.3, 1.2, 20);
    let sweep = sweep_c(&f, &grid, &cfg()).unwrap();
    assert!(sweep.monotone(), "{:?}", sweep.findings);

    // Below lo = 0.5 no AnyH threshold is sustainable; those records are flagged.
    for r in &sweep.records {
        assert_eq!(r.flag.is_some(), r.c < 0.5, "c = {}", r.c);
    }
    let kept: Vec<_> = sweep.records.iter().filter(|r| r.flag.is_none()).collect();
    assert!(kept.len() >= 15);
    for w in kept.windows(2) {
        let (a, b) = (w[0], w[1]);
        assert!(b.tau_s_star.unwrap() >= a.tau_s_star.unwrap() - MONOTONE_SLACK);
        assert!(b.seller_payoff.unwrap() >= a.seller_payoff.unwrap() - MONOTONE_SLACK);
        assert!(b.p_auction.unwrap() <= a.p_auction.unwrap() + MONOTONE_SLACK);
        assert!(b.p_no_trade_given_auction.unwrap() <= a.p_no_trade_given_auction.unwrap() + MONOTONE_SLACK);
    }
}

#[test]
fn payoff_at_example_equals_full_commitment() {
    let f = example();
    let scanner = ThresholdScanner::new(&f, &cfg()).unwrap();
    let rec = statics_record(&scanner, 1.0).unwrap();
    assert!((rec.tau_s_star.unwrap() - 1.5).abs() < 1e-9);
    assert!((rec.seller_payoff.unwrap() - full_commitment(&f, 1.0, &cfg()).unwrap().payoff).abs() < 1e-6);
    assert!((tau_s_star(&f, 1.0, &cfg()).unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn entry_subsidy_examples() {
    let f = example();
    for tau in [0.6, 1.0, 1.7] {
        assert_eq!(entry_subsidy_factor(&f, tau, Policy::AnyH, &cfg()).unwrap().factor, 1.0);
    }
    // F(1.25) = 1/2.
    let k = entry_subsidy_factor(&f, 1.25, Policy::BothH, &cfg()).unwrap();
    assert!((k.factor - 2.0).abs() < 1e-12);
    assert_eq!(k.delivery, SubsidyDelivery::ReserveReduction);

    let k = entry_subsidy_factor(&f, 0.854, Policy::BothH, &cfg()).unwrap();
    assert!((k.factor - 1.5 / (2.0 - 0.854)).abs() < 1e-12);
    assert!((k.factor - 1.309).abs() < 1e-3);
    assert_eq!(k.delivery, SubsidyDelivery::CashSubsidy);
}

#[test]
fn epsilon_bar_examples() {
    assert!((lying_cost_epsilon_bar(&LyingCostSpec::new(2.0 / 3.0, 2.0).unwrap()) - 1.0 / 3.0).abs() < 1e-12);
    let quad = LyingCostSpec::quadratic(&example(), 1.0).unwrap();
    assert!((quad.min_density - 2.0 / 3.0).abs() < 1e-12);
    assert!((lying_cost_epsilon_bar(&quad) - 1.0 / 3.0).abs() < 1e-12);
    // delta = M gives 1.
    assert!((lying_cost_epsilon_bar(&LyingCostSpec::new(0.25, 0.25).unwrap()) - 1.0).abs() < 1e-15);
    assert!(LyingCostSpec::new(1.0, f64::INFINITY).is_err());
}

#[test]
fn lying_cost_sets_of_example() {
    let f = example();
    let sets = lying_cost_sustainable_set(&f, 1.0, &cfg()).unwrap();
    assert_eq!(sets.restricted.len(), 1);
    let only = sets.restricted[0];
    assert!((only.lo - 1.0).abs() < 1e-6 && (only.hi - 1.0).abs() < 1e-6, "{only:?}");
    assert!(sets.unrestricted.is_empty());

    // The window [p_F, c] is empty below p_F = 1.
    let below = lying_cost_sustainable_set(&f, 0.9, &cfg()).unwrap();
    assert!(below.restricted.is_empty() && below.unrestricted.is_empty());
}

#[test]
fn lying_cost_sets_grow_with_c() {
    let f = example();
    let scanner = ThresholdScanner::new(&f, &cfg()).unwrap();
    let mut last_hi = f64::NEG_INFINITY;
    for c in linspace(1.0, 1.6, 7) {
        let sets = lying_cost_sets_with(&scanner, c).unwrap();
        let hi = sets.restricted.last().map_or(f64::NEG_INFINITY, |i| i.hi);
        assert!(hi >= last_hi - 1e-9, "c = {c}");
        for iv in &sets.restricted {
            assert!(iv.lo >= 1.0 - 1e-6 && iv.hi <= c + 1e-6);
        }
        last_hi = hi;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_h_factor_is_inverse_survival(lo in 0.0..1.0f64, width in 0.2..2.0f64, t in 0.01..0.99f64) {
        let f = Distribution::uniform(lo, lo + width).unwrap();
        let tau = lo + t * width;
        let k = entry_subsidy_factor(&f, tau, Policy::BothH, &cfg()).unwrap().factor;
        prop_assert!((k * f.survival(tau) - 1.0).abs() < 1e-12);
        prop_assert!(k >= 1.0);
    }

    #[test]
    fn epsilon_bar_scales_inversely_with_curvature(delta in 0.01..5.0f64, m in 0.01..5.0f64, s in 0.1..10.0f64) {
        let base = lying_cost_epsilon_bar(&LyingCostSpec::new(delta, m).unwrap());
        let scaled = lying_cost_epsilon_bar(&LyingCostSpec::new(delta, m * s).unwrap());
        prop_assert!((base / scaled - s).abs() < 1e-9 * s);
    }

    #[test]
    fn probabilities_are_probabilities(lo in 0.0..1.0f64, width in 0.2..2.0f64, t in 0.01..0.99f64) {
        let f = Distribution::uniform(lo, lo + width).unwrap();
        let tau = lo + t * width;
        for policy in [Policy::AnyH, Policy::BothH] {
            let p = probabilities(&f, tau, policy, &cfg()).unwrap();
            prop_assert!((0.0..=1.0).contains(&p.p_auction));
            prop_assert!((0.0..=1.0).contains(&p.p_no_trade_given_auction));
        }
        let any = probabilities(&f, tau, Policy::AnyH, &cfg()).unwrap().p_auction;
        let both = probabilities(&f, tau, Policy::BothH, &cfg()).unwrap().p_auction;
        prop_assert!(any >= both);
    }
}
