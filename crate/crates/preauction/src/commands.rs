//! The five commands, each turning a validated configuration into a report
//! plus plot data.

use preauction_core::dist::{is_regular, r_star, truncate};
use preauction_core::equilibria::{
    analyze_with, bidder_exante_utility, evaluate_threshold, seller_optimal_in, seller_payoff, verify_equilibrium, Bound,
    Constraint, EquilibriumRegime, Surplus, ThresholdScanner, ThresholdSet,
};
use preauction_core::mechanisms::{optimal_common_reserve, rev_profile};
use preauction_core::numeric::{linspace, maximize};
use preauction_core::perturbations::lying_cost_sets_with;
use preauction_core::sim::{deviation_regret, seller_ic_slack, GamePlan, SimConfig, SpaPlan};
use preauction_core::statics::{check_c_grid, monotonicity_findings, statics_record, Sweep};
use preauction_core::{Distribution, MessageProfile, Policy, Regime, ValueDistribution};

use crate::config::{regime_name, RunConfig, SimulateConfig};
use crate::emit::{Artifacts, Series};
use crate::parallel::{parallel_map, run_parallel};
use crate::report::{Analysis, AnalyticComparison, Check, Command, Report, Simulation, Verification};

/// Largest deviation gain accepted by `verify`.
pub const REGRET_BOUND: f64 = 1e-4;
/// Largest gap, in standard errors, between a Monte Carlo estimate and its
/// closed form.
pub const Z_BOUND: f64 = 3.0;
/// Drift allowed between the solver's slacks and the independent recomputation.
pub const SLACK_DRIFT: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] preauction_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("non-finite numbers in report at: {}", .0.join(", "))]
    NonFinite(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Artifacts,
}

/// Runs `command` on `cfg` with simulations spread over `workers` threads.
/// The report does not depend on `workers`.
pub fn run_command(command: Command, cfg: &RunConfig, workers: usize) -> Result<Outcome, RunError> {
    let cfg = match command {
        Command::Example => {
            let mut base = RunConfig::example();
            base.solver = cfg.solver;
            base.simulate.seed = cfg.simulate.seed;
            base.simulate.draws = cfg.simulate.draws;
            base
        }
        _ => cfg.clone(),
    };
    let mut report = Report::new(command, cfg.clone());
    let mut artifacts = Artifacts::default();
    match command {
        Command::Analyze => analyze(&cfg, &mut report, &mut artifacts)?,
        Command::Sweep => sweep(&cfg, workers, &mut report, &mut artifacts)?,
        Command::Simulate => simulate(&cfg, workers, &mut report)?,
        Command::Verify => verify(&cfg, &mut report, &mut artifacts)?,
        Command::Example => example(&cfg, workers, &mut report, &mut artifacts)?,
    }
    report.seal();
    let bad = report.non_finite_fields();
    if !bad.is_empty() {
        return Err(RunError::NonFinite(bad));
    }
    Ok(Outcome { report, artifacts })
}

/// Equilibrium class selected by the `[simulate]` regime and policy.
pub fn equilibrium_class(s: &SimulateConfig) -> Result<EquilibriumRegime, RunError> {
    match (s.regime, s.policy) {
        (Regime::Unrestricted, Policy::BothH) => Ok(EquilibriumRegime::UnrestrictedBothH),
        (Regime::CommonReserve, Policy::AnyH) => Ok(EquilibriumRegime::RestrictedAnyH),
        (Regime::CommonReserve, Policy::BothH) => Ok(EquilibriumRegime::RestrictedBothH),
        (Regime::Unrestricted, Policy::AnyH) => Err(RunError::Usage(
            "regime = unrestricted has threshold equilibria only with policy = both_h".into(),
        )),
    }
}

fn class_set(scanner: &ThresholdScanner, c: f64, class: EquilibriumRegime) -> ThresholdSet {
    match class {
        EquilibriumRegime::UnrestrictedBothH => scanner.unrestricted_set(c),
        EquilibriumRegime::RestrictedAnyH => scanner.restricted_sets(c).0,
        EquilibriumRegime::RestrictedBothH => scanner.restricted_sets(c).1,
    }
}

/// Seller-best sustainable threshold of `class`.
pub fn default_tau(f: &Distribution, c: f64, class: EquilibriumRegime, scanner: &ThresholdScanner) -> Result<f64, RunError> {
    let cfg = scanner.config();
    let set = class_set(scanner, c, class);
    if class == EquilibriumRegime::RestrictedAnyH {
        return Ok(seller_optimal_in(f, c, &set, cfg)?.tau);
    }
    let surplus = Surplus::new(f, cfg);
    set.intervals
        .iter()
        .map(|i| maximize(|t| surplus.pi2(t, c), i.lo, i.hi, cfg.root_tol))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .ok_or_else(|| RunError::Usage(format!("no sustainable threshold for this class at c = {c}; set [simulate] tau")))
}

fn resolve_tau(cfg: &RunConfig, f: &Distribution, class: EquilibriumRegime) -> Result<f64, RunError> {
    match cfg.simulate.tau {
        Some(t) => Ok(t),
        None => default_tau(f, cfg.outside_option, class, &ThresholdScanner::new(f, &cfg.solver.numeric)?),
    }
}

fn pi_series(f: &Distribution, c: f64, scanner: &ThresholdScanner) -> [Series; 2] {
    let surplus = Surplus::new(f, scanner.config());
    let taus = scanner.taus();
    [
        Series { file: "pi1.dat".into(), x_label: "tau", y_label: "pi1", points: taus.iter().map(|&t| (t, surplus.pi1(t, c))).collect() },
        Series { file: "pi2.dat".into(), x_label: "tau", y_label: "pi2", points: taus.iter().map(|&t| (t, surplus.pi2(t, c))).collect() },
    ]
}

fn slack_series(c: f64, scanner: &ThresholdScanner) -> Vec<Series> {
    let mut out = Vec::new();
    for regime in [Regime::CommonReserve, Regime::Unrestricted] {
        for profile in MessageProfile::ALL {
            let rev = scanner.revenue_curve(profile, regime);
            out.push(Series {
                file: format!("slack_{}_{}.dat", regime_name(regime), profile.name().to_lowercase()),
                x_label: "tau",
                y_label: "rev_minus_c",
                points: scanner.taus().iter().zip(rev).map(|(&t, &r)| (t, r - c)).collect(),
            });
        }
    }
    out
}

fn analyze(cfg: &RunConfig, report: &mut Report, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let f = cfg.prior();
    let c = cfg.outside_option;
    let numeric = &cfg.solver.numeric;
    let scanner = ThresholdScanner::new(&f, numeric)?;
    let regimes = analyze_with(&scanner, c)?;
    let found = [
        ("unrestricted_best", &regimes.unrestricted_best),
        ("seller_optimal", &regimes.seller_optimal),
        ("bidder_optimal", &regimes.bidder_optimal),
    ];
    for (name, eq) in found {
        if let Some(eq) = eq {
            let check = verify_equilibrium(&f, c, eq, numeric)?;
            report.checks.push(
                Check::at_most(&format!("{name}_reverified"), check.max_drift, preauction_core::equilibria::DRIFT_TOL)
                    .with_detail(format!("tau = {}, signs_ok = {}, reserve_ok = {}", eq.tau, check.signs_ok, check.reserve_ok)),
            );
            if !(check.signs_ok && check.reserve_ok) {
                report.checks.push(Check::flag(&format!("{name}_signs"), false, "slack signs or reserve rule violated"));
            }
        }
    }
    report.analysis = Some(Analysis { lying_cost: lying_cost_sets_with(&scanner, c)?, regimes });
    artifacts.series.extend(pi_series(&f, c, &scanner));
    artifacts.series.extend(slack_series(c, &scanner));
    Ok(())
}

fn sweep(cfg: &RunConfig, workers: usize, report: &mut Report, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let grid = cfg
        .c_grid
        .as_ref()
        .ok_or_else(|| RunError::Usage("sweep needs `c_grid` in [seller]".into()))?
        .values();
    let f = cfg.prior();
    check_c_grid(&f, &grid)?;
    let scanner = ThresholdScanner::new(&f, &cfg.solver.numeric)?;
    let records = parallel_map(grid.len(), workers, |i| statics_record(&scanner, grid[i]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = Sweep { findings: monotonicity_findings(&records), records };
    report.checks.push(Check::flag(
        "monotone",
        sweep.monotone(),
        format!("{} monotonicity violations across {} outside options", sweep.findings.len(), grid.len()),
    ));
    artifacts.series.push(Series {
        file: "tau_s_vs_c.dat".into(),
        x_label: "c",
        y_label: "tau_s_star",
        points: sweep.records.iter().filter_map(|r| r.tau_s_star.map(|t| (r.c, t))).collect(),
    });
    artifacts.sweep = Some(sweep.records.clone());
    report.statics = Some(sweep);
    Ok(())
}

/// Monte Carlo run of the configured strategy profile, on `workers` threads.
pub fn simulate_config(cfg: &RunConfig, tau: f64, workers: usize) -> Result<Simulation, RunError> {
    let f = cfg.prior();
    let numeric = &cfg.solver.numeric;
    let s = &cfg.simulate;
    let sim = SimConfig { seed: s.seed, draws: s.draws, tau, policy: s.policy, regime: s.regime, c: cfg.outside_option };
    let plan = GamePlan::new(&f, &sim, numeric)?;
    let result = run_parallel(&plan, workers);
    // The closed forms price every auction at max(tau, p_F), which the
    // Myerson auction also does at (H,H) when the prior is regular.
    let applies = is_regular(&f, numeric) && !(s.regime == Regime::Unrestricted && s.policy == Policy::AnyH);
    let analytic = if applies {
        let payoff = seller_payoff(&f, tau, s.policy, cfg.outside_option, numeric)?;
        let utility = bidder_exante_utility(&f, tau, s.policy, numeric)?;
        Some(AnalyticComparison {
            seller_payoff: payoff,
            seller_payoff_z: result.seller_payoff.z(payoff),
            bidder_utility: utility,
            bidder_utility_z: result.bidder_utility.z(utility),
        })
    } else {
        None
    };
    Ok(Simulation { config: sim, result, analytic })
}

fn simulate(cfg: &RunConfig, workers: usize, report: &mut Report) -> Result<(), RunError> {
    let f = cfg.prior();
    let tau = match cfg.simulate.tau {
        Some(t) => t,
        None => resolve_tau(cfg, &f, equilibrium_class(&cfg.simulate)?)?,
    };
    let sim = simulate_config(cfg, tau, workers)?;
    if let Some(a) = &sim.analytic {
        report.checks.push(Check::at_most("seller_payoff_z", a.seller_payoff_z, Z_BOUND));
        report.checks.push(Check::at_most("bidder_utility_z", a.bidder_utility_z, Z_BOUND));
    }
    report.simulation = Some(sim);
    Ok(())
}

/// Seller and bidder certification of one threshold.
pub fn verify_threshold(cfg: &RunConfig, tau: f64) -> Result<(Verification, Vec<Check>), RunError> {
    let f = cfg.prior();
    let c = cfg.outside_option;
    let numeric = &cfg.solver.numeric;
    let class = equilibrium_class(&cfg.simulate)?;
    let equilibrium = evaluate_threshold(&f, c, tau, class, numeric)?;
    let resolution = verify_equilibrium(&f, c, &equilibrium, numeric)?;
    let seller_slack = seller_ic_slack(&f, c, &equilibrium, numeric)?;
    let deviation = deviation_regret(&f, c, &equilibrium, cfg.solver.deviation_grid, numeric)?;

    let mut checks = Vec::new();
    let signs: Vec<String> = seller_slack
        .profiles
        .iter()
        .map(|p| format!("{}: {:+.3e} ({})", p.profile.name(), p.slack, if p.runs { "runs" } else { "skips" }))
        .collect();
    checks.push(Check::flag("seller_ic", seller_slack.consistent, signs.join(", ")));
    checks.push(Check::at_most("seller_slack_drift", seller_slack.max_drift, SLACK_DRIFT));
    checks.push(Check::flag(
        "resolution",
        resolution.passed,
        format!("max drift {:.3e} at doubled resolution", resolution.max_drift),
    ));
    let mut regret = Check::at_most("max_regret", deviation.max_regret, REGRET_BOUND);
    if let Some(w) = &deviation.witness {
        regret = regret.with_detail(format!("type {} gains {:.3e} by sending {:?} instead of {:?}", w.value, w.gain, w.to, w.from));
    }
    checks.push(regret);
    Ok((Verification { equilibrium, resolution, seller_slack, deviation }, checks))
}

fn verify(cfg: &RunConfig, report: &mut Report, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let f = cfg.prior();
    let tau = resolve_tau(cfg, &f, equilibrium_class(&cfg.simulate)?)?;
    let (v, checks) = verify_threshold(cfg, tau)?;
    artifacts.series.push(Series {
        file: "regret.dat".into(),
        x_label: "value",
        y_label: "regret",
        points: v.deviation.grid.iter().copied().zip(v.deviation.regret.iter().copied()).collect(),
    });
    report.checks.extend(checks);
    report.verification = Some(v);
    Ok(())
}

/// The running example: `r* = 3/2`, unrestricted thresholds up to about
/// 0.854 with reserve 1 on path, the `(L,L)` auction at `tau = 3/2` with
/// reserve 3/4 and revenue 27/32, and restricted optima 3/2 and 1.
fn example(cfg: &RunConfig, workers: usize, report: &mut Report, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let f = cfg.prior();
    let c = cfg.outside_option;
    let numeric = &cfg.solver.numeric;
    let checks = &mut report.checks;

    checks.push(Check::near("r_star", r_star(&f, c, numeric)?, 1.5, 1e-9));

    let scanner = ThresholdScanner::new(&f, numeric)?;
    let regimes = analyze_with(&scanner, c)?;
    let unrestricted = &regimes.unrestricted;
    match unrestricted.intervals.last() {
        Some(top) => {
            checks.push(Check::near("unrestricted_upper_endpoint", top.hi, 0.854, 0.005));
            let binding = match top.hi_bound {
                Bound::Binding { constraint: Constraint::SkipHL, residual } => Check::at_most("unrestricted_upper_binding", residual, 1e-8)
                    .with_detail("Myerson Rev(H,L) = c"),
                other => Check::flag("unrestricted_upper_binding", false, format!("bound is {other:?}")),
            };
            checks.push(binding);
            let worst = linspace(top.lo, top.hi, 9)
                .into_iter()
                .filter(|&t| t > f.lo() && t < f.hi())
                .map(|t| evaluate_threshold(&f, c, t, EquilibriumRegime::UnrestrictedBothH, numeric).map(|eq| (eq.on_path_reserve - 1.0).abs()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::at_most("on_path_reserve", worst, 1e-6).with_detail("max |reserve - 1| over sustained thresholds"));
        }
        None => checks.push(Check::flag("unrestricted_upper_endpoint", false, "no sustainable unrestricted threshold")),
    }

    let low = truncate(&f, f.lo(), 1.5)?;
    let (reserve, revenue) = optimal_common_reserve(&low, &low, numeric);
    checks.push(Check::near("ll_reserve", reserve, 0.75, 1e-4));
    checks.push(Check::near("ll_revenue", revenue, 27.0 / 32.0, 1e-6));
    let plan = SpaPlan { g1: low.clone(), g2: low, reserve: 0.75, draws: cfg.simulate.draws, seed: cfg.simulate.seed };
    let mc = run_parallel(&plan, workers);
    checks.push(
        Check::at_most("ll_revenue_monte_carlo_z", mc.z(27.0 / 32.0), Z_BOUND)
            .with_detail(format!("{} +- {} over {} draws", mc.mean, mc.se, cfg.simulate.draws)),
    );

    let full = regimes.full_commitment;
    match &regimes.seller_optimal {
        Some(eq) => {
            checks.push(Check::near("tau_s_star", eq.tau, 1.5, 1e-6));
            checks.push(Check::near("tau_s_star_payoff", eq.seller_payoff, full.payoff, 1e-6));
        }
        None => checks.push(Check::flag("tau_s_star", false, "no seller-optimal threshold")),
    }
    match &regimes.bidder_optimal {
        Some(eq) => {
            checks.push(Check::near("tau_2_star", eq.tau, 1.0, 1e-6));
            let rev = rev_profile(&f, eq.tau, MessageProfile::HL, Regime::CommonReserve, numeric)?.revenue;
            checks.push(Check::at_most("tau_2_star_residual", (rev - c).abs(), 1e-8).with_detail("|Rev(H,L) - c|"));
        }
        None => checks.push(Check::flag("tau_2_star", false, "no bidder-optimal threshold")),
    }
    if let Some(gap) = regimes.commitment_gap {
        checks.push(Check::positive("commitment_gap", gap).with_detail("full commitment minus best unrestricted payoff"));
    }

    artifacts.series.extend(pi_series(&f, c, &scanner));
    artifacts.series.extend(slack_series(c, &scanner));
    report.analysis = Some(Analysis { lying_cost: lying_cost_sets_with(&scanner, c)?, regimes });
    Ok(())
}
