//! Comparative statics in the outside option at the seller-optimal
//! restricted equilibrium, and the auction / no-trade probabilities.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::{monopoly_price, Distribution, ValueDistribution};
use crate::equilibria::{check_outside_option, check_threshold, restricted_equilibrium_sets, seller_optimal_in, ThresholdScanner};
use crate::error::{Error, Result};
use crate::numeric::NumericConfig;
use crate::Policy;

/// Slack allowed in the monotonicity checks of a sweep.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Probabilities {
    /// Ex-ante probability that the seller runs an auction.
    pub p_auction: f64,
    /// Probability that an auction that runs ends without a sale.
    pub p_no_trade_given_auction: f64,
}

/// Closed-form probabilities at threshold `tau` with on-path reserve
/// `max(tau, p_F)`.
pub fn probabilities(f: &Distribution, tau: f64, policy: Policy, cfg: &NumericConfig) -> Result<Probabilities> {
    check_threshold(f, tau)?;
    let reserve = tau.max(monopoly_price(f, cfg).price);
    let (ft, fr) = (f.cdf(tau), f.cdf(reserve));
    let (p_auction, no_trade) = match policy {
        Policy::AnyH => (1.0 - ft * ft, fr * fr - ft * ft),
        Policy::BothH => ((1.0 - ft) * (1.0 - ft), (fr - ft) * (fr - ft)),
    };
    let p_no_trade_given_auction = if p_auction > 0.0 { (no_trade / p_auction).clamp(0.0, 1.0) } else { 0.0 };
    Ok(Probabilities { p_auction, p_no_trade_given_auction })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StaticsRecord {
    pub c: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub tau_s_star: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub seller_payoff: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub p_auction: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub p_no_trade_given_auction: Option<f64>,
    /// Why the record has no equilibrium; flagged records are left out of
    /// the monotonicity checks.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub flag: Option<String>,
}

/// A monotonicity violation between two adjacent unflagged records.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Finding {
    pub quantity: String,
    pub c_from: f64,
    pub c_to: f64,
    pub value_from: f64,
    pub value_to: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sweep {
    pub records: Vec<StaticsRecord>,
    pub findings: Vec<Finding>,
}

impl Sweep {
    pub fn monotone(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Seller-optimal restricted equilibrium and its probabilities at one `c`.
pub fn statics_record(scanner: &ThresholdScanner, c: f64) -> Result<StaticsRecord> {
    let f = scanner.prior();
    let cfg = scanner.config();
    check_outside_option(f, c)?;
    let (any_h, _) = scanner.restricted_sets(c);
    match seller_optimal_in(f, c, &any_h, cfg) {
        Ok(eq) => {
            let p = probabilities(f, eq.tau, Policy::AnyH, cfg)?;
            Ok(StaticsRecord {
                c,
                tau_s_star: Some(eq.tau),
                seller_payoff: Some(eq.seller_payoff),
                p_auction: Some(p.p_auction),
                p_no_trade_given_auction: Some(p.p_no_trade_given_auction),
                flag: None,
            })
        }
        Err(Error::NoEquilibrium(why)) => Ok(StaticsRecord {
            c,
            tau_s_star: None,
            seller_payoff: None,
            p_auction: None,
            p_no_trade_given_auction: None,
            flag: Some(why),
        }),
        Err(e) => Err(e),
    }
}

/// Checks the monotonicity claims across adjacent unflagged records:
/// threshold and payoff nondecreasing in `c`, both probabilities
/// nonincreasing.
pub fn monotonicity_findings(records: &[StaticsRecord]) -> Vec<Finding> {
    let kept: Vec<&StaticsRecord> = records.iter().filter(|r| r.flag.is_none()).collect();
    let mut findings = Vec::new();
    for w in kept.windows(2) {
        let (a, b) = (w[0], w[1]);
        let checks: [(&str, Option<f64>, Option<f64>, bool); 4] = [
            ("tau_s_star", a.tau_s_star, b.tau_s_star, true),
            ("seller_payoff", a.seller_payoff, b.seller_payoff, true),
            ("p_auction", a.p_auction, b.p_auction, false),
            ("p_no_trade_given_auction", a.p_no_trade_given_auction, b.p_no_trade_given_auction, false),
        ];
        for (name, x, y, increasing) in checks {
            let (Some(x), Some(y)) = (x, y) else { continue };
            let violated = if increasing { y < x - MONOTONE_SLACK } else { y > x + MONOTONE_SLACK };
            if violated {
                findings.push(Finding { quantity: format!("{name}"), c_from: a.c, c_to: b.c, value_from: x, value_to: y });
            }
        }
    }
    findings
}

pub fn check_c_grid(f: &Distribution, c_grid: &[f64]) -> Result<()> {
    if c_grid.is_empty() {
        return Err(Error::param("c_grid", "must not be empty"));
    }
    if c_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("c_grid", "must be strictly increasing"));
    }
    for &c in c_grid {
        check_outside_option(f, c)?;
    }
    Ok(())
}

/// Seller-optimal restricted equilibria across `c_grid`.
pub fn sweep_c(f: &Distribution, c_grid: &[f64], cfg: &NumericConfig) -> Result<Sweep> {
    check_c_grid(f, c_grid)?;
    let scanner = ThresholdScanner::new(f, cfg)?;
    let records = c_grid.iter().map(|&c| statics_record(&scanner, c)).collect::<Result<Vec<_>>>()?;
    Ok(Sweep { findings: monotonicity_findings(&records), records })
}

/// Seller-optimal threshold without a precomputed scanner.
pub fn tau_s_star(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<f64> {
    let (any_h, _) = restricted_equilibrium_sets(f, c, cfg)?;
    seller_optimal_in(f, c, &any_h, cfg).map(|eq| eq.tau)
}
