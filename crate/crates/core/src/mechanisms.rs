//! Expected revenue of the seller's second-period options against a pair of
//! posteriors: posted prices, second-price auctions with a common reserve,
//! and Myerson-optimal auctions.
//!
//! The primary revenue routes are one-dimensional tail integrals that are
//! exact between the posteriors' knots. [`spa_revenue_2d`] and
//! [`myerson_revenue_2d`] integrate the payment rule over the product
//! measure instead and serve as independent cross-checks.

use alloc::format;
use alloc::vec::Vec;

use crate::dist::{monopoly_price, truncate, Distribution, Posterior, ValueDistribution};
use crate::error::{Error, Result};
use crate::iron::{iron, IronedVirtual};
use crate::numeric::{gauss_legendre, integrate_panels, linspace, maximize, NumericConfig};

/// Message profile of a binary threshold strategy; `HL` stands for both
/// asymmetric profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MessageProfile {
    HH,
    HL,
    LL,
}

impl MessageProfile {
    pub const ALL: [MessageProfile; 3] = [MessageProfile::HH, MessageProfile::HL, MessageProfile::LL];

    pub fn name(self) -> &'static str {
        match self {
            MessageProfile::HH => "HH",
            MessageProfile::HL => "HL",
            MessageProfile::LL => "LL",
        }
    }
}

/// Class of mechanisms the seller may run in the second period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// Second-price auction with a single common reserve.
    CommonReserve,
    /// Any DSIC, interim-IR mechanism; the seller runs Myerson's auction.
    Unrestricted,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum MechanismKind {
    PostedPrice { price: f64 },
    SecondPriceReserve { reserve: f64 },
    /// Per-bidder reserves `inf { v : ironed virtual value >= 0 }`.
    MyersonOptimal { reserves: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MechanismSummary {
    pub kind: MechanismKind,
    pub revenue: f64,
    /// Index of a bidder who is never allocated the good, if any.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub excluded: Option<usize>,
}

/// Revenue of posting price `p` to a single bidder.
pub fn posted_price_revenue<D: ValueDistribution + ?Sized>(g: &D, p: f64) -> f64 {
    if p > g.hi() {
        return 0.0;
    }
    p * g.survival(p)
}

fn joint_breaks<A: ValueDistribution + ?Sized, B: ValueDistribution + ?Sized>(g1: &A, g2: &B) -> Vec<f64> {
    let mut b = g1.pieces();
    b.extend(g2.pieces());
    b
}

/// Expected payment of a second-price auction with common reserve `r`.
///
/// Uses `E[pay] = r P(max >= r) + E[(min - r)^+]` with
/// `E[(min - r)^+] = int_r^inf (1 - G1)(1 - G2)`.
pub fn spa_revenue<A, B>(g1: &A, g2: &B, r: f64) -> f64
where
    A: ValueDistribution + ?Sized,
    B: ValueDistribution + ?Sized,
{
    let top = g1.hi().max(g2.hi());
    if r > top {
        return 0.0;
    }
    let clear = 1.0 - g1.cdf(r) * g2.cdf(r);
    let tail = integrate_panels(|y| g1.survival(y) * g2.survival(y), r, top, &joint_breaks(g1, g2));
    r * clear + tail
}

/// Revenue-maximizing common reserve: grid search over the hull of both
/// supports, local golden-section refinement, smallest reserve on ties.
pub fn optimal_common_reserve<A, B>(g1: &A, g2: &B, cfg: &NumericConfig) -> (f64, f64)
where
    A: ValueDistribution + ?Sized,
    B: ValueDistribution + ?Sized,
{
    let (lo, hi) = (g1.lo().min(g2.lo()), g1.hi().max(g2.hi()));
    let grid = linspace(lo, hi, cfg.grid_points);
    let revenue = |r: f64| spa_revenue(g1, g2, r);
    let values: Vec<f64> = grid.iter().map(|&r| revenue(r)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let mut winner = maximize(revenue, a, b, cfg.root_tol);
    // Kinks at support endpoints and knots can carry the maximum exactly.
    for x in joint_breaks(g1, g2) {
        if x >= a && x <= b {
            let v = revenue(x);
            if v > winner.1 || (v == winner.1 && x < winner.0) {
                winner = (x, v);
            }
        }
    }
    winner
}

/// Outcome of the Myerson-optimal auction on two posteriors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MyersonOutcome {
    pub revenue: f64,
    pub reserves: [f64; 2],
}

/// Revenue of the optimal auction: `E[max(phi1(v1)^+, phi2(v2)^+)]` over the
/// ironed virtual values, computed as `int_0^inf 1 - H1(y) H2(y) dy` where
/// `Hi` is the CDF of bidder i's ironed virtual value.
pub fn myerson_revenue(g1: &Posterior, g2: &Posterior, cfg: &NumericConfig) -> MyersonOutcome {
    let (v1, v2) = (iron(g1, cfg), iron(g2, cfg));
    myerson_revenue_ironed(g1, &v1, g2, &v2)
}

pub(crate) fn myerson_revenue_ironed(g1: &Posterior, v1: &IronedVirtual, g2: &Posterior, v2: &IronedVirtual) -> MyersonOutcome {
    let top = v1.eval(v1.hi()).max(v2.eval(v2.hi())).max(0.0);
    let mut breaks = v1.levels();
    breaks.extend(v2.levels());
    let revenue = integrate_panels(|y| 1.0 - v1.prob_at_most(g1, y) * v2.prob_at_most(g2, y), 0.0, top, &breaks);
    MyersonOutcome { revenue, reserves: [v1.reserve(), v2.reserve()] }
}

/// Posteriors induced by threshold `tau`: `(H, L)`.
pub fn threshold_posteriors(f: &Distribution, tau: f64) -> Result<(Posterior, Posterior)> {
    if !(tau > f.lo() && tau < f.hi()) {
        return Err(Error::param("tau", format!("must lie in ({}, {}), got {tau}", f.lo(), f.hi())));
    }
    Ok((truncate(f, tau, f.hi())?, truncate(f, f.lo(), tau)?))
}

/// Seller's best revenue at `profile` when bidders use threshold `tau`.
pub fn rev_profile(
    f: &Distribution,
    tau: f64,
    profile: MessageProfile,
    regime: Regime,
    cfg: &NumericConfig,
) -> Result<MechanismSummary> {
    let (high, low) = threshold_posteriors(f, tau)?;
    Ok(rev_on_posteriors(&high, &low, profile, regime, cfg))
}

pub(crate) fn rev_on_posteriors(
    high: &Posterior,
    low: &Posterior,
    profile: MessageProfile,
    regime: Regime,
    cfg: &NumericConfig,
) -> MechanismSummary {
    let (g1, g2) = match profile {
        MessageProfile::HH => (high, high),
        MessageProfile::HL => (high, low),
        MessageProfile::LL => (low, low),
    };
    match (regime, profile) {
        (Regime::CommonReserve, MessageProfile::HL) => {
            // The low bidder never clears a reserve at or above tau, so the
            // optimal common reserve is the monopoly price of the high posterior.
            let m = monopoly_price(high, cfg);
            MechanismSummary {
                kind: MechanismKind::SecondPriceReserve { reserve: m.price },
                revenue: m.revenue,
                excluded: Some(1),
            }
        }
        (Regime::CommonReserve, _) => {
            let (reserve, revenue) = optimal_common_reserve(g1, g2, cfg);
            MechanismSummary { kind: MechanismKind::SecondPriceReserve { reserve }, revenue, excluded: None }
        }
        (Regime::Unrestricted, _) => {
            let out = myerson_revenue(g1, g2, cfg);
            let excluded = (0..2).find(|&i| out.reserves[i] >= [g1.hi(), g2.hi()][i]);
            MechanismSummary { kind: MechanismKind::MyersonOptimal { reserves: out.reserves }, revenue: out.revenue, excluded }
        }
    }
}

/// Checks the posted-price reduction at `(H, L)` against a full grid search
/// over common reserves. Fails on a mismatch above `1e-6`.
pub fn hl_reduction_self_test(f: &Distribution, tau: f64, cfg: &NumericConfig) -> Result<f64> {
    let (high, low) = threshold_posteriors(f, tau)?;
    let reduced = rev_on_posteriors(&high, &low, MessageProfile::HL, Regime::CommonReserve, cfg).revenue;
    let (_, searched) = optimal_common_reserve(&high, &low, cfg);
    let gap = (reduced - searched).abs();
    if gap > 1e-6 {
        return Err(Error::SelfTest(format!(
            "posted-price reduction {reduced} disagrees with reserve search {searched} at tau = {tau}"
        )));
    }
    Ok(gap)
}

/// Gauss-Legendre nodes mapped onto each panel of `[a, b]` split at `breaks`.
fn panel_nodes(a: f64, b: f64, breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::new();
    for p in pts.windows(2) {
        let (c, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
        if h <= 0.0 {
            continue;
        }
        out.extend(x.iter().zip(&w).map(|(x, w)| (c + h * x, w * h)));
    }
    out
}

/// Cross-check route for [`spa_revenue`]: iterated Gauss-Legendre over the
/// product measure of the realized payment, panels split at the reserve
/// and at the diagonal.
pub fn spa_revenue_2d(g1: &Posterior, g2: &Posterior, r: f64, cfg: &NumericConfig) -> f64 {
    let n = (cfg.quad_points / 16).max(8);
    let mut total = 0.0;
    let mut outer_breaks = g1.pieces();
    outer_breaks.push(r);
    for (v1, w1) in panel_nodes(g1.lo(), g1.hi(), &outer_breaks, n) {
        let mut inner_breaks = g2.pieces();
        inner_breaks.push(r);
        inner_breaks.push(v1);
        let inner: f64 = panel_nodes(g2.lo(), g2.hi(), &inner_breaks, n)
            .into_iter()
            .map(|(v2, w2)| {
                let pay = match (v1 >= r, v2 >= r) {
                    (true, true) => v1.min(v2),
                    (true, false) | (false, true) => r,
                    (false, false) => 0.0,
                };
                pay * g2.pdf(v2) * w2
            })
            .sum();
        total += inner * g1.pdf(v1) * w1;
    }
    total
}

/// Cross-check route for [`myerson_revenue`]: iterated Gauss-Legendre of
/// `max(phi1(v1)^+, phi2(v2)^+)` over the product measure.
pub fn myerson_revenue_2d(g1: &Posterior, g2: &Posterior, cfg: &NumericConfig) -> f64 {
    let n = (cfg.quad_points / 16).max(8);
    let (p1, p2) = (iron(g1, cfg), iron(g2, cfg));
    let mut outer_breaks = g1.pieces();
    outer_breaks.extend(p1.knots());
    outer_breaks.push(p1.reserve());
    // The inner integral kinks where bidder 1's virtual value crosses the
    // range of bidder 2's.
    outer_breaks.extend(p2.levels().into_iter().filter_map(|y| p1.upper_preimage(y)));
    let mut total = 0.0;
    for (v1, w1) in panel_nodes(g1.lo(), g1.hi(), &outer_breaks, n) {
        let y1 = p1.eval(v1).max(0.0);
        let mut inner_breaks = g2.pieces();
        inner_breaks.extend(p2.knots());
        inner_breaks.push(p2.reserve());
        if let Some(cross) = p2.upper_preimage(y1) {
            inner_breaks.push(cross);
        }
        let inner: f64 = panel_nodes(g2.lo(), g2.hi(), &inner_breaks, n)
            .into_iter()
            .map(|(v2, w2)| y1.max(p2.eval(v2)).max(0.0) * g2.pdf(v2) * w2)
            .sum();
        total += inner * g1.pdf(v1) * w1;
    }
    total
}
