//! Machine-readable run reports. Field order in the structs below is the
//! key order of the emitted JSON.

use preauction_core::equilibria::{EquilibriumCheck, RegimeReport, ThresholdEquilibrium};
use preauction_core::numeric::NumericConfig;
use preauction_core::perturbations::LyingCostSets;
use preauction_core::sim::{DeviationReport, SellerSlackReport, SimConfig, SimResult};
use preauction_core::statics::Sweep;
use serde::Serialize;

use crate::config::RunConfig;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL: &str = "preauction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Sweep,
    Simulate,
    Verify,
    Example,
}

impl Command {
    /// Whether the exit status depends on the report's checks.
    pub fn gated(self) -> bool {
        matches!(self, Command::Verify | Command::Example)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub tolerances: NumericConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    #[serde(flatten)]
    pub regimes: RegimeReport,
    pub lying_cost: LyingCostSets,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub seller_payoff: f64,
    pub seller_payoff_z: f64,
    pub bidder_utility: f64,
    pub bidder_utility_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub config: SimConfig,
    pub result: SimResult,
    /// Closed-form payoffs at the simulated threshold, when they apply to
    /// the simulated regime and policy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub equilibrium: ThresholdEquilibrium,
    pub resolution: EquilibriumCheck,
    pub seller_slack: SellerSlackReport,
    pub deviation: DeviationReport,
}

/// One pass/fail item.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// `|value - expected| <= tolerance`.
    pub fn near(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: (value - expected).abs() <= tolerance,
            value,
            expected: Some(expected),
            tolerance: Some(tolerance),
            detail: None,
        }
    }

    /// `value <= bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), passed: value <= bound, value, expected: None, tolerance: Some(bound), detail: None }
    }

    /// `value > 0`.
    pub fn positive(name: &str, value: f64) -> Self {
        Check { name: name.into(), passed: value > 0.0, value, expected: None, tolerance: None, detail: None }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            expected: None,
            tolerance: None,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub config: RunConfig,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statics: Option<Sweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Simulation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: Command, config: RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            provenance: Provenance {
                tool: TOOL,
                version: env!("CARGO_PKG_VERSION"),
                seed: config.simulate.seed,
                tolerances: config.solver.numeric,
            },
            config,
            analysis: None,
            statics: None,
            simulation: None,
            verification: None,
            checks: Vec::new(),
            passed: true,
        }
    }

    /// Recomputes `passed` from the checks.
    pub fn seal(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report types serialize infallibly")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize infallibly");
        s.push('\n');
        s
    }

    /// JSON paths of non-finite numbers. Optional fields are omitted rather
    /// than written as `null`, so every `null` is a NaN or an infinity.
    pub fn non_finite_fields(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_nulls(&self.to_value(), String::new(), &mut out);
        out
    }
}

fn collect_nulls(v: &serde_json::Value, path: String, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Null => out.push(if path.is_empty() { "$".into() } else { path }),
        serde_json::Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                collect_nulls(x, format!("{path}[{i}]"), out);
            }
        }
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                collect_nulls(x, if path.is_empty() { k.clone() } else { format!("{path}.{k}") }, out);
            }
        }
        _ => {}
    }
}
