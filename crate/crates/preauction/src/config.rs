//! Strict INI-style run configuration.
//!
//! ```text
//! [distribution]
//! family = uniform            # or piecewise_linear
//! lo = 0.5
//! hi = 2.0
//! # knots = 0.5:0, 1.2:0.6, 2:1   (piecewise_linear)
//!
//! [seller]
//! outside_option = 1.0
//! c_grid = 0.3:1.2:20         # or a list: 0.3, 0.5, 0.9
//!
//! [solver]
//! quad_points = 512
//! root_tol = 1e-9
//! grid_points = 2048
//! scan_points = 256
//! deviation_grid = 200
//!
//! [simulate]
//! seed = 1
//! draws = 1000000
//! tau = 0.6
//! policy = both_h             # or any_h
//! regime = unrestricted       # or common_reserve
//! ```
//!
//! Comments start with `#` or `;`. Unknown sections or keys, repeated keys
//! and repeated sections are errors.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use preauction_core::dist::Family;
use preauction_core::numeric::{linspace, NumericConfig};
use preauction_core::sim::MIN_DRAWS;
use preauction_core::{Distribution, Policy, Regime, ValueDistribution};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ConfigError {
    pub line: usize,
    pub col: usize,
    pub kind: ConfigErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("section [{0}] appears twice")]
    DuplicateSection(String),
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("key `{0}` appears twice")]
    DuplicateKey(String),
    #[error("missing required key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("malformed value for `{key}`: `{text}`")]
    Malformed { key: String, text: String },
    #[error("`{key}` out of range: {reason}")]
    OutOfRange { key: String, reason: String },
}

/// Outside options for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CGrid {
    List { values: Vec<f64> },
    /// `n` evenly spaced points from `start` to `end` inclusive.
    Range { start: f64, end: f64, n: usize },
}

impl CGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            CGrid::List { values } => values.clone(),
            CGrid::Range { start, end, n } => linspace(*start, *end, *n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    #[serde(flatten)]
    pub numeric: NumericConfig,
    /// Types on the deviation-oracle grid.
    pub deviation_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { numeric: NumericConfig::default(), deviation_grid: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub seed: u64,
    pub draws: u64,
    /// Threshold for `simulate` and `verify`; when absent the seller-best
    /// sustainable threshold of the configured class is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub policy: Policy,
    pub regime: Regime,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { seed: 1, draws: 1_000_000, tau: None, policy: Policy::BothH, regime: Regime::Unrestricted }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub distribution: Family,
    pub outside_option: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<CGrid>,
    pub solver: SolverConfig,
    pub simulate: SimulateConfig,
}

impl RunConfig {
    /// The running example: values uniform on `[1/2, 2]`, outside option 1.
    pub fn example() -> Self {
        RunConfig {
            distribution: Family::Uniform { lo: 0.5, hi: 2.0 },
            outside_option: 1.0,
            c_grid: Some(CGrid::Range { start: 0.3, end: 1.2, n: 20 }),
            solver: SolverConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }

    pub fn prior(&self) -> Distribution {
        Distribution::from_family(self.distribution.clone()).expect("validated at parse time")
    }

    /// Serializes back to the INI format; `parse(&cfg.to_ini()) == Ok(cfg)`.
    pub fn to_ini(&self) -> String {
        let mut s = String::from("[distribution]\n");
        match &self.distribution {
            Family::Uniform { lo, hi } => {
                let _ = writeln!(s, "family = uniform\nlo = {lo}\nhi = {hi}");
            }
            Family::PiecewiseLinearCdf { knots } => {
                let list: Vec<String> = knots.iter().map(|(v, c)| format!("{v}:{c}")).collect();
                let _ = writeln!(s, "family = piecewise_linear\nknots = {}", list.join(", "));
            }
        }
        let _ = writeln!(s, "\n[seller]\noutside_option = {}", self.outside_option);
        match &self.c_grid {
            Some(CGrid::List { values }) => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "c_grid = {}", list.join(", "));
            }
            Some(CGrid::Range { start, end, n }) => {
                let _ = writeln!(s, "c_grid = {start}:{end}:{n}");
            }
            None => {}
        }
        let n = &self.solver.numeric;
        let _ = writeln!(
            s,
            "\n[solver]\nquad_points = {}\nroot_tol = {:e}\ngrid_points = {}\nscan_points = {}\ndeviation_grid = {}",
            n.quad_points, n.root_tol, n.grid_points, n.scan_points, self.solver.deviation_grid
        );
        let m = &self.simulate;
        let _ = writeln!(s, "\n[simulate]\nseed = {}\ndraws = {}", m.seed, m.draws);
        if let Some(tau) = m.tau {
            let _ = writeln!(s, "tau = {tau}");
        }
        let _ = writeln!(s, "policy = {}\nregime = {}", policy_name(m.policy), regime_name(m.regime));
        s
    }
}

pub fn policy_name(p: Policy) -> &'static str {
    match p {
        Policy::AnyH => "any_h",
        Policy::BothH => "both_h",
    }
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::CommonReserve => "common_reserve",
        Regime::Unrestricted => "unrestricted",
    }
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("distribution", &["family", "lo", "hi", "knots"]),
    ("seller", &["outside_option", "c_grid"]),
    ("solver", &["quad_points", "root_tol", "grid_points", "scan_points", "deviation_grid"]),
    ("simulate", &["seed", "draws", "tau", "policy", "regime"]),
];

/// A raw value with the position of its first character.
#[derive(Debug, Clone)]
struct Entry {
    text: String,
    line: usize,
    col: usize,
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

struct Raw {
    sections: BTreeMap<String, Section>,
    last_line: usize,
}

fn err(line: usize, col: usize, kind: ConfigErrorKind) -> ConfigError {
    ConfigError { line, col, kind }
}

fn lex(text: &str) -> Result<Raw, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut last_line = 1;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = match raw_line.find(['#', ';']) {
            Some(at) => &raw_line[..at],
            None => raw_line,
        };
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        let col = indent + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, col, ConfigErrorKind::Syntax("section header missing `]`".into())))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, col, ConfigErrorKind::UnknownSection(name.into())));
            }
            if sections.contains_key(name) {
                return Err(err(line, col, ConfigErrorKind::DuplicateSection(name.into())));
            }
            sections.insert(name.into(), Section { line, entries: BTreeMap::new() });
            current = Some(name.into());
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(err(line, col, ConfigErrorKind::Syntax("expected `key = value`".into())));
        };
        let Some(section) = current.as_ref() else {
            return Err(err(line, col, ConfigErrorKind::Syntax("key outside of any section".into())));
        };
        let key = trimmed[..eq].trim();
        let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(line, col, ConfigErrorKind::UnknownKey { section: section.clone(), key: key.into() }));
        }
        let after = &trimmed[eq + 1..];
        let value = after.trim();
        if value.is_empty() {
            return Err(err(line, col, ConfigErrorKind::Malformed { key: key.into(), text: String::new() }));
        }
        let value_col = col + eq + 1 + (after.len() - after.trim_start().len());
        let entries = &mut sections.get_mut(section).expect("current section exists").entries;
        if entries.contains_key(key) {
            return Err(err(line, col, ConfigErrorKind::DuplicateKey(key.into())));
        }
        entries.insert(key.into(), Entry { text: value.into(), line, col: value_col });
    }
    Ok(Raw { sections, last_line })
}

impl Raw {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.entries.get(key))
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry, ConfigError> {
        self.get(section, key).ok_or_else(|| {
            let line = self.sections.get(section).map_or(self.last_line, |s| s.line);
            err(line, 1, ConfigErrorKind::MissingKey { section: section.into(), key: key.into() })
        })
    }
}

fn malformed(key: &str, e: &Entry) -> ConfigError {
    err(e.line, e.col, ConfigErrorKind::Malformed { key: key.into(), text: e.text.clone() })
}

fn out_of_range(key: &str, e: &Entry, reason: impl fmt::Display) -> ConfigError {
    err(e.line, e.col, ConfigErrorKind::OutOfRange { key: key.into(), reason: reason.to_string() })
}

fn float(key: &str, e: &Entry, text: &str) -> Result<f64, ConfigError> {
    match text.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(malformed(key, e)),
    }
}

fn number<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T, ConfigError> {
    e.text.parse().map_err(|_| malformed(key, e))
}

fn distribution(raw: &Raw) -> Result<Family, ConfigError> {
    let fam = raw.require("distribution", "family")?;
    let unused = |key: &str| match raw.get("distribution", key) {
        Some(e) => Err(out_of_range(key, e, format_args!("not used by family `{}`", fam.text))),
        None => Ok(()),
    };
    let family = match fam.text.as_str() {
        "uniform" => {
            unused("knots")?;
            let lo = raw.require("distribution", "lo")?;
            let hi = raw.require("distribution", "hi")?;
            let (lo_v, hi_v) = (float("lo", lo, &lo.text)?, float("hi", hi, &hi.text)?);
            if lo_v < 0.0 {
                return Err(out_of_range("lo", lo, "values must be nonnegative"));
            }
            if lo_v >= hi_v {
                return Err(out_of_range("hi", hi, format_args!("need lo < hi, got lo = {lo_v}, hi = {hi_v}")));
            }
            Family::Uniform { lo: lo_v, hi: hi_v }
        }
        "piecewise_linear" => {
            unused("lo")?;
            unused("hi")?;
            let e = raw.require("distribution", "knots")?;
            let knots = e
                .text
                .split(',')
                .map(|pair| {
                    let (v, c) = pair.split_once(':').ok_or_else(|| malformed("knots", e))?;
                    Ok((float("knots", e, v)?, float("knots", e, c)?))
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            let family = Family::PiecewiseLinearCdf { knots };
            Distribution::from_family(family.clone()).map_err(|x| out_of_range("knots", e, x))?;
            family
        }
        _ => return Err(malformed("family", fam)),
    };
    Ok(family)
}

fn c_grid(e: &Entry, hi: f64) -> Result<CGrid, ConfigError> {
    let grid = if e.text.contains(':') {
        let parts: Vec<&str> = e.text.split(':').collect();
        if parts.len() != 3 {
            return Err(malformed("c_grid", e));
        }
        let start = float("c_grid", e, parts[0])?;
        let end = float("c_grid", e, parts[1])?;
        let n: usize = parts[2].trim().parse().map_err(|_| malformed("c_grid", e))?;
        if n < 2 || !(end > start) {
            return Err(out_of_range("c_grid", e, "a range needs start < end and at least 2 points"));
        }
        CGrid::Range { start, end, n }
    } else {
        let values = e.text.split(',').map(|x| float("c_grid", e, x)).collect::<Result<Vec<_>, _>>()?;
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(out_of_range("c_grid", e, "values must be strictly increasing"));
        }
        CGrid::List { values }
    };
    if grid.values().iter().any(|&c| !(c > 0.0 && c < hi)) {
        return Err(out_of_range("c_grid", e, format_args!("every outside option must lie in (0, {hi})")));
    }
    Ok(grid)
}

fn solver(raw: &Raw) -> Result<SolverConfig, ConfigError> {
    let mut s = SolverConfig::default();
    let n = &mut s.numeric;
    if let Some(e) = raw.get("solver", "quad_points") {
        n.quad_points = number("quad_points", e)?;
    }
    if let Some(e) = raw.get("solver", "root_tol") {
        n.root_tol = float("root_tol", e, &e.text)?;
    }
    if let Some(e) = raw.get("solver", "grid_points") {
        n.grid_points = number("grid_points", e)?;
    }
    if let Some(e) = raw.get("solver", "scan_points") {
        n.scan_points = number("scan_points", e)?;
    }
    if let Some(e) = raw.get("solver", "deviation_grid") {
        s.deviation_grid = number("deviation_grid", e)?;
        if s.deviation_grid < 2 {
            return Err(out_of_range("deviation_grid", e, "must be at least 2"));
        }
    }
    if let Err(preauction_core::Error::InvalidParameter { name, reason }) = s.numeric.validate() {
        let at = raw.get("solver", name).expect("defaults are valid, so the offending key was given");
        return Err(out_of_range(name, at, reason));
    }
    Ok(s)
}

fn simulate(raw: &Raw, lo: f64, hi: f64) -> Result<SimulateConfig, ConfigError> {
    let mut s = SimulateConfig::default();
    if let Some(e) = raw.get("simulate", "seed") {
        s.seed = number("seed", e)?;
    }
    if let Some(e) = raw.get("simulate", "draws") {
        s.draws = number("draws", e)?;
        if s.draws < MIN_DRAWS {
            return Err(out_of_range("draws", e, format_args!("must be at least {MIN_DRAWS}")));
        }
    }
    if let Some(e) = raw.get("simulate", "tau") {
        let tau = float("tau", e, &e.text)?;
        if !(tau > lo && tau < hi) {
            return Err(out_of_range("tau", e, format_args!("must lie in ({lo}, {hi})")));
        }
        s.tau = Some(tau);
    }
    if let Some(e) = raw.get("simulate", "policy") {
        s.policy = match e.text.as_str() {
            "any_h" => Policy::AnyH,
            "both_h" => Policy::BothH,
            _ => return Err(malformed("policy", e)),
        };
    }
    if let Some(e) = raw.get("simulate", "regime") {
        s.regime = match e.text.as_str() {
            "common_reserve" => Regime::CommonReserve,
            "unrestricted" => Regime::Unrestricted,
            _ => return Err(malformed("regime", e)),
        };
    }
    Ok(s)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = lex(text)?;
    let distribution = distribution(&raw)?;
    let prior = Distribution::from_family(distribution.clone()).expect("checked above");
    let (lo, hi) = (prior.lo(), prior.hi());
    let c_entry = raw.require("seller", "outside_option")?;
    let outside_option = float("outside_option", c_entry, &c_entry.text)?;
    if !(outside_option > 0.0 && outside_option < hi) {
        return Err(out_of_range("outside_option", c_entry, format_args!("must lie in (0, {hi})")));
    }
    let c_grid = raw.get("seller", "c_grid").map(|e| c_grid(e, hi)).transpose()?;
    Ok(RunConfig { distribution, outside_option, c_grid, solver: solver(&raw)?, simulate: simulate(&raw, lo, hi)? })
}
