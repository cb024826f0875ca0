use preauction_core::dist::truncate;
use preauction_core::equilibria::{bidder_exante_utility, evaluate_threshold, seller_payoff, EquilibriumRegime};
use preauction_core::numeric::integrate;
use preauction_core::perturbations::entry_subsidy_factor;
use preauction_core::sim::{
    deviation_regret, entry_cost_regret, rng_stream, run_sequential, seller_ic_slack, simulate_game, simulate_interim, simulate_spa,
    uniform, BatchPlan, GamePlan, SimConfig,
};
use preauction_core::{Distribution, MessageProfile, NumericConfig, Policy, Regime, ValueDistribution};

fn cfg() -> NumericConfig {
    NumericConfig::default()
}

fn example() -> Distribution {
    Distribution::uniform(0.5, 2.0).unwrap()
}

fn sim(tau: f64, policy: Policy, regime: Regime, draws: u64) -> SimConfig {
    SimConfig { seed: 2024, draws, tau, policy, regime, c: 1.0 }
}

#[test]
fn streams_repeat_and_decorrelate() {
    let (mut a, mut b) = (rng_stream(9, 4), rng_stream(9, 4));
    for _ in 0..100 {
        assert_eq!(uniform(&mut a), uniform(&mut b));
    }

    let n = 100_000;
    let (mut x, mut y) = (rng_stream(9, 0), rng_stream(9, 1));
    let pairs: Vec<(f64, f64)> = (0..n).map(|_| (uniform(&mut x), uniform(&mut y))).collect();
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1));
    let (mx, my) = (mx / n as f64, my / n as f64);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let corr = sxy / (sxx * syy).sqrt();
    assert!(corr.abs() < 0.01, "{corr}");
}

#[test]
fn inverse_cdf_draws_pass_ks() {
    let n = 100_000;
    for f in [example(), Distribution::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.1), (1.2, 0.9), (2.0, 1.0)]).unwrap()] {
        let mut rng = rng_stream(5, 0);
        let mut xs: Vec<f64> = (0..n).map(|_| f.quantile(uniform(&mut rng))).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
            let fx = f.cdf(x);
            d.max((fx - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - fx).abs())
        });
        assert!(d <= 1.36 / (n as f64).sqrt(), "{d}");
    }
}

#[test]
fn low_pool_auction_revenue() {
    let low = truncate(&example(), 0.5, 1.5).unwrap();
    let est = simulate_spa(&low, &low, 0.75, 1_000_000, 17);
    assert!(est.z(27.0 / 32.0) <= 3.0, "{est:?}");
}

#[test]
fn game_matches_analytic_payoffs() {
    let f = example();
    let matrix = [
        (0.7, Policy::AnyH, Regime::CommonReserve),
        (1.2, Policy::AnyH, Regime::CommonReserve),
        (1.5, Policy::AnyH, Regime::CommonReserve),
        (0.7, Policy::BothH, Regime::CommonReserve),
        (1.2, Policy::BothH, Regime::CommonReserve),
        (0.7, Policy::BothH, Regime::Unrestricted),
        (1.5, Policy::BothH, Regime::Unrestricted),
    ];
    for (tau, policy, regime) in matrix {
        let r = simulate_game(&f, &sim(tau, policy, regime, 1_000_000), &cfg()).unwrap();
        let pi = seller_payoff(&f, tau, policy, 1.0, &cfg()).unwrap();
        let u = bidder_exante_utility(&f, tau, policy, &cfg()).unwrap();
        assert!(r.seller_payoff.z(pi) <= 3.0, "{tau} {policy:?} {regime:?}: {:?} vs {pi}", r.seller_payoff);
        assert!(r.bidder_utility.z(u) <= 3.0, "{tau} {policy:?} {regime:?}: {:?} vs {u}", r.bidder_utility);
        assert!(r.seller_payoff.se > 0.0 && r.revenue.se > 0.0);
        assert_eq!(r.counts.total(), 1_000_000);
    }
}

#[test]
fn auction_vanishes_at_the_top() {
    let r = simulate_game(&example(), &sim(2.0 - 1e-9, Policy::BothH, Regime::CommonReserve, 20_000), &cfg()).unwrap();
    assert_eq!(r.seller_payoff.mean, 1.0);
    assert_eq!(r.counts.runs, 0);
}

#[test]
fn interim_utility_follows_envelope() {
    let f = example();
    for (tau, policy) in [(1.2, Policy::AnyH), (0.8, Policy::BothH)] {
        let reserve = f64::max(tau, 1.0);
        let floor = if policy == Policy::BothH { f.cdf(tau) } else { 0.0 };
        for v in [0.7, 1.1, 1.4, 1.9] {
            let exact = if v > reserve { integrate(|s| f.cdf(s) - floor, reserve, v) } else { 0.0 };
            let est = simulate_interim(&f, &sim(tau, policy, Regime::CommonReserve, 200_000), v, &cfg()).unwrap();
            if exact == 0.0 {
                assert_eq!(est.mean, 0.0, "v = {v}");
            } else {
                assert!(est.z(exact) <= 3.0, "tau = {tau}, v = {v}: {est:?} vs {exact}");
            }
        }
    }
}

#[test]
fn batch_order_does_not_change_results() {
    let f = example();
    let s = sim(0.8, Policy::BothH, Regime::Unrestricted, 200_000);
    let plan = GamePlan::new(&f, &s, &cfg()).unwrap();
    let forward = run_sequential(&plan);
    let mut stats: Vec<_> = (0..plan.batches()).rev().map(|b| (b, plan.run_batch(b))).collect();
    stats.sort_by_key(|(b, _)| *b);
    let shuffled = plan.finish(&stats.into_iter().map(|(_, s)| s).collect::<Vec<_>>());
    assert_eq!(forward, shuffled);
    assert_eq!(forward, simulate_game(&f, &s, &cfg()).unwrap());
    assert_ne!(forward, simulate_game(&f, &SimConfig { seed: 1, ..s }, &cfg()).unwrap());
}

#[test]
fn sustained_thresholds_have_no_profitable_deviation() {
    let f = example();
    for tau in [0.55, 0.6, 0.7, 0.8, 0.85] {
        let eq = evaluate_threshold(&f, 1.0, tau, EquilibriumRegime::UnrestrictedBothH, &cfg()).unwrap();
        let rep = deviation_regret(&f, 1.0, &eq, 200, &cfg()).unwrap();
        assert_eq!(rep.grid.len(), 200);
        assert!(rep.max_regret <= 1e-4, "tau = {tau}: {:?}", rep.witness);
        assert!(rep.witness.is_none());
        // The seller skips (H,L), so the threshold type is indifferent.
        assert!(rep.tau_gap <= 1e-6, "tau = {tau}: {}", rep.tau_gap);
    }
}

#[test]
fn unsustained_threshold_is_caught() {
    let f = example();
    let eq = evaluate_threshold(&f, 1.0, 0.9, EquilibriumRegime::UnrestrictedBothH, &cfg()).unwrap();
    let rep = deviation_regret(&f, 1.0, &eq, 200, &cfg()).unwrap();
    let slack = seller_ic_slack(&f, 1.0, &eq, &cfg()).unwrap();
    let hl = slack.profiles.iter().find(|p| p.profile == MessageProfile::HL).unwrap();
    assert!(rep.witness.is_some() || (!hl.consistent && hl.slack > 0.0));
    assert!(hl.slack > 0.0 && !slack.consistent);
}

#[test]
fn seller_slack_examples() {
    let f = example();
    let eq = evaluate_threshold(&f, 1.0, 1.5, EquilibriumRegime::RestrictedAnyH, &cfg()).unwrap();
    let rep = seller_ic_slack(&f, 1.0, &eq, &cfg()).unwrap();
    assert!((rep.slacks.ll - (27.0 / 32.0 - 1.0)).abs() < 1e-6);
    assert!((rep.slacks.hl - 0.5).abs() < 1e-9);
    assert!(rep.consistent);
    assert!(rep.max_drift <= 1e-6);

    let eq = evaluate_threshold(&f, 1.0, 0.7, EquilibriumRegime::UnrestrictedBothH, &cfg()).unwrap();
    let rep = seller_ic_slack(&f, 1.0, &eq, &cfg()).unwrap();
    assert!(rep.consistent && rep.max_drift <= 1e-6, "{rep:?}");
}

#[test]
fn entry_costs_below_the_bound_keep_regret_zero() {
    let f = example();
    for regime in [EquilibriumRegime::RestrictedAnyH, EquilibriumRegime::UnrestrictedBothH] {
        let tau = if regime == EquilibriumRegime::RestrictedAnyH { 1.5 } else { 0.7 };
        let eq = evaluate_threshold(&f, 1.0, tau, regime, &cfg()).unwrap();
        let bound = entry_cost_regret(&f, 1.0, &eq, 0.0, 50, &cfg()).unwrap().epsilon_bound;
        assert!(bound > 0.0);
        for eps in [bound / 8.0, bound / 2.0, bound] {
            let rep = entry_cost_regret(&f, 1.0, &eq, eps, 50, &cfg()).unwrap();
            assert_eq!(rep.factor, entry_subsidy_factor(&f, tau, regime.policy(), &cfg()).unwrap().factor);
            assert!(rep.deviation.max_regret <= 1e-4, "{regime:?}, eps = {eps}: {:?}", rep.deviation.witness);
        }
    }
}
