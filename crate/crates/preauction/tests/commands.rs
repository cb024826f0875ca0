use std::fs;

use preauction::commands::{verify_threshold, REGRET_BOUND};
use preauction::config::{CGrid, ConfigErrorKind, SimulateConfig, SolverConfig};
use preauction::parallel::run_parallel;
use preauction::{emit_report, parse_config, run_command, Command, RunConfig};
use preauction_core::dist::{r_star, Family};
use preauction_core::numeric::NumericConfig;
use preauction_core::sim::{run_sequential, GamePlan, SimConfig, SpaPlan};
use preauction_core::{Distribution, Policy, Regime, ValueDistribution};
use proptest::prelude::*;

const MINIMAL: &str = "[distribution]\nfamily = uniform\nlo = 0.5\nhi = 2.0\n\n[seller]\noutside_option = 1.0\n";

fn quick(mut cfg: RunConfig) -> RunConfig {
    cfg.simulate.draws = 100_000;
    cfg
}

#[test]
fn minimal_config_is_the_running_example() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.distribution, Family::Uniform { lo: 0.5, hi: 2.0 });
    assert_eq!(cfg.outside_option, 1.0);
    assert_eq!(cfg.c_grid, None);

    let shipped = parse_config(&fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.ini")).unwrap()).unwrap();
    assert_eq!(shipped, RunConfig::example());
}

#[test]
fn invalid_configs_are_rejected_with_positions() {
    let e = parse_config(&MINIMAL.replace("lo = 0.5", "lo = 2.0")).unwrap_err();
    assert!(matches!(e.kind, ConfigErrorKind::OutOfRange { .. }));
    assert_eq!(e.line, 4);

    let e = parse_config(&MINIMAL.replace("outside_option = 1.0", "outside_option = 2.5")).unwrap_err();
    assert!(matches!(e.kind, ConfigErrorKind::OutOfRange { ref key, .. } if key == "outside_option"));
    assert_eq!(e.line, 7);

    let e = parse_config(&MINIMAL.replace("hi = 2.0", "hi = two")).unwrap_err();
    assert!(matches!(e.kind, ConfigErrorKind::Malformed { .. }));
    assert_eq!((e.line, e.col), (4, 6));

    let e = parse_config(&format!("{MINIMAL}\n[simulate]\ndraws = 10\n")).unwrap_err();
    assert!(matches!(e.kind, ConfigErrorKind::OutOfRange { ref key, .. } if key == "draws"));
    let e = parse_config(&format!("{MINIMAL}\n[solver]\nquad_point = 512\n")).unwrap_err();
    assert!(matches!(e.kind, ConfigErrorKind::UnknownKey { .. }));
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.0..2.0f64, 0.1..3.0f64).prop_map(|(lo, w)| Family::Uniform { lo, hi: lo + w }),
        (0.0..2.0f64, prop::collection::vec((0.05..1.0f64, 0.05..1.0f64), 2..=5)).prop_map(|(lo, steps)| {
            let mut knots = vec![(lo, 0.0)];
            let total: f64 = steps.iter().map(|s| s.1).sum();
            let (mut x, mut c) = (lo, 0.0);
            for (i, (dx, dc)) in steps.iter().enumerate() {
                x += dx;
                c += dc;
                knots.push((x, if i + 1 == steps.len() { 1.0 } else { c / total }));
            }
            Family::PiecewiseLinearCdf { knots }
        }),
    ]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        family(),
        0.05..0.95f64,
        prop::option::of(prop_oneof![
            (0.05..0.3f64, 2usize..40).prop_map(|(a, n)| (a, n, true)),
            (0.05..0.3f64, 1usize..6).prop_map(|(a, n)| (a, n, false)),
        ]),
        (64usize..2000, 1e-12..1e-4f64, 128usize..4096, 16usize..512, 2usize..500),
        (any::<u64>(), 10_000u64..10_000_000, prop::option::of(0.05..0.95f64), any::<bool>(), any::<bool>()),
    )
        .prop_map(|(distribution, c, grid, solver, sim)| {
            let f = Distribution::from_family(distribution.clone()).unwrap();
            let (lo, hi) = (f.lo(), f.hi());
            let c_grid = grid.map(|(a, n, range)| {
                if range {
                    CGrid::Range { start: a * hi, end: 0.9 * hi, n }
                } else {
                    CGrid::List { values: (0..n).map(|k| hi * (a + 0.1 * k as f64)).collect() }
                }
            });
            RunConfig {
                distribution,
                outside_option: c * hi,
                c_grid,
                solver: SolverConfig {
                    numeric: NumericConfig { quad_points: solver.0, root_tol: solver.1, grid_points: solver.2, scan_points: solver.3 },
                    deviation_grid: solver.4,
                },
                simulate: SimulateConfig {
                    seed: sim.0,
                    draws: sim.1,
                    tau: sim.2.map(|t| lo + t * (hi - lo)),
                    policy: if sim.3 { Policy::AnyH } else { Policy::BothH },
                    regime: if sim.4 { Regime::Unrestricted } else { Regime::CommonReserve },
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_round_trips(cfg in run_config()) {
        let text = cfg.to_ini();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}

#[test]
fn reports_are_byte_identical() {
    let cfg = quick(RunConfig::example());
    let a = run_command(Command::Example, &cfg, 4).unwrap();
    let b = run_command(Command::Example, &cfg, 1).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());

    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let wa = emit_report(&a.report, &a.artifacts, da.path()).unwrap();
    let wb = emit_report(&b.report, &b.artifacts, db.path()).unwrap();
    assert_eq!(wa.len(), wb.len());
    for (x, y) in wa.iter().zip(&wb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(da.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], "example");
}

#[test]
fn example_bundle_passes() {
    let out = run_command(Command::Example, &quick(RunConfig::example()), 2).unwrap();
    for c in &out.report.checks {
        assert!(c.passed, "{c:?}");
    }
    assert!(out.report.passed);
    assert!(out.report.checks.len() >= 10);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let cfg = RunConfig::example();
    let out = run_command(Command::Sweep, &cfg, 4).unwrap();
    let statics = out.report.statics.as_ref().unwrap();
    assert_eq!(statics.records.len(), 20);
    assert!(statics.monotone(), "{:?}", statics.findings);

    let dir = tempfile::tempdir().unwrap();
    emit_report(&out.report, &out.artifacts, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 6);
    assert_eq!(reader.records().count(), 20);
    let plot = fs::read_to_string(dir.path().join("tau_s_vs_c.dat")).unwrap();
    assert!(plot.starts_with("# c tau_s_star\n"));
}

#[test]
fn pi1_plot_peaks_at_commitment_reserve() {
    let cfg = RunConfig::example();
    let out = run_command(Command::Analyze, &cfg, 1).unwrap();
    let pi1 = out.artifacts.series.iter().find(|s| s.file == "pi1.dat").unwrap();
    let step = pi1.points[1].0 - pi1.points[0].0;
    let rs = r_star(&cfg.prior(), 1.0, &cfg.solver.numeric).unwrap();
    assert!((pi1.argmax().unwrap() - rs).abs() <= step);

    for line in pi1.render().lines().skip(1) {
        assert_eq!(line.split_whitespace().count(), 2);
    }
    assert!(out.report.non_finite_fields().is_empty());
}

#[test]
fn simulations_ignore_worker_count() {
    let f = Distribution::uniform(0.5, 2.0).unwrap();
    let cfg = NumericConfig::default();
    let sim = SimConfig { seed: 99, draws: 300_000, tau: 0.7, policy: Policy::BothH, regime: Regime::Unrestricted, c: 1.0 };
    let plan = GamePlan::new(&f, &sim, &cfg).unwrap();
    let reference = run_sequential(&plan);
    for workers in [1, 2, 8] {
        assert_eq!(run_parallel(&plan, workers), reference);
    }

    let low = preauction_core::dist::truncate(&f, 0.5, 1.5).unwrap();
    let spa = SpaPlan { g1: low.clone(), g2: low, reserve: 0.75, draws: 250_000, seed: 4 };
    let reference = run_sequential(&spa);
    for workers in [1, 2, 8] {
        let got = run_parallel(&spa, workers);
        assert_eq!(got.mean.to_bits(), reference.mean.to_bits());
        assert_eq!(got.se.to_bits(), reference.se.to_bits());
    }

    let mut run = RunConfig::example();
    run.simulate.draws = 200_000;
    run.simulate.tau = Some(0.7);
    let jsons: Vec<String> = [1, 2, 8].iter().map(|&w| run_command(Command::Simulate, &run, w).unwrap().report.to_json()).collect();
    assert!(jsons.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn verify_inside_and_outside_the_interval() {
    let mut cfg = RunConfig::example();
    cfg.simulate.tau = Some(0.6);
    let out = run_command(Command::Verify, &cfg, 1).unwrap();
    let v = out.report.verification.as_ref().unwrap();
    assert!(v.deviation.max_regret <= REGRET_BOUND);
    assert!(out.report.passed, "{:?}", out.report.checks);
    assert!(out.artifacts.series.iter().any(|s| s.file == "regret.dat"));

    let (v, checks) = verify_threshold(&cfg, 0.9).unwrap();
    let hl_slack = v.seller_slack.slacks.hl;
    assert!(v.deviation.witness.is_some() || hl_slack > 0.0);
    assert!(checks.iter().any(|c| !c.passed));
}

#[test]
fn unsupported_class_is_a_usage_error() {
    let mut cfg = RunConfig::example();
    cfg.simulate.policy = Policy::AnyH;
    cfg.simulate.tau = Some(0.7);
    assert!(run_command(Command::Verify, &cfg, 1).is_err());
}
