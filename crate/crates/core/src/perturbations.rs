//! Closed-form robustness scalars: the participation subsidy that restores
//! a threshold equilibrium under messaging costs, and the lying-cost bound
//! under which thresholds between `p_F` and `c` survive.

use alloc::vec::Vec;

use crate::dist::{monopoly_price, Distribution, ValueDistribution};
use crate::equilibria::{check_outside_option, check_threshold, Bound, Interval, ThresholdScanner, ThresholdSet};
use crate::error::{Error, Result};
use crate::numeric::NumericConfig;
use crate::Policy;

/// How the required participation surplus reaches bidders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SubsidyDelivery {
    /// `tau >= p_F`: lowering the common reserve hands out the surplus.
    ReserveReduction,
    /// `tau < p_F`: the reserve stays at `p_F` and some types need cash.
    CashSubsidy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntrySubsidy {
    /// Multiplier `k` on the messaging cost.
    pub factor: f64,
    pub delivery: SubsidyDelivery,
}

/// Subsidy factor `k` such that the marginal type breaks even on a
/// messaging cost: 1 under `AnyH`, `1 / (1 - F(tau))` under `BothH`.
pub fn entry_subsidy_factor(f: &Distribution, tau: f64, policy: Policy, cfg: &NumericConfig) -> Result<EntrySubsidy> {
    check_threshold(f, tau)?;
    let factor = match policy {
        Policy::AnyH => 1.0,
        Policy::BothH => {
            let run = f.survival(tau);
            if !(run > 0.0) {
                return Err(Error::InfiniteSubsidy);
            }
            1.0 / run
        }
    };
    let delivery = if tau >= monopoly_price(f, cfg).price {
        SubsidyDelivery::ReserveReduction
    } else {
        SubsidyDelivery::CashSubsidy
    };
    Ok(EntrySubsidy { factor, delivery })
}

/// Lying-cost primitives: the minimum density of the prior and the maximum
/// curvature `d^2 l / dv^2` of the cost function over the square support.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyingCostSpec {
    pub min_density: f64,
    pub max_curvature: f64,
}

impl LyingCostSpec {
    pub fn new(min_density: f64, max_curvature: f64) -> Result<Self> {
        if !(min_density > 0.0 && min_density.is_finite()) {
            return Err(Error::param("min_density", "must be positive and finite"));
        }
        if !(max_curvature > 0.0 && max_curvature.is_finite()) {
            return Err(Error::param("max_curvature", "must be positive and finite"));
        }
        Ok(LyingCostSpec { min_density, max_curvature })
    }

    /// Quadratic loss `scale * (m - v)^2`, whose curvature is `2 * scale`.
    pub fn quadratic(f: &Distribution, scale: f64) -> Result<Self> {
        LyingCostSpec::new(f.min_density(), 2.0 * scale)
    }
}

/// `delta / M`: the largest lying-cost scale that keeps the pooled
/// threshold equilibrium.
pub fn lying_cost_epsilon_bar(spec: &LyingCostSpec) -> f64 {
    spec.min_density / spec.max_curvature
}

/// Thresholds that survive lying costs, per equilibrium class.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyingCostSets {
    /// Union of the `AnyH` and `BothH` common-reserve sets.
    pub restricted: Vec<Interval>,
    pub unrestricted: Vec<Interval>,
}

/// Endpoints closer than this are identified when intersecting sets.
const SET_TOL: f64 = 1e-7;

fn intersect(window: (f64, f64), set: &ThresholdSet) -> Vec<Interval> {
    let (a, b) = window;
    set.intervals
        .iter()
        .filter_map(|i| {
            let lo = i.lo.max(a);
            let hi = i.hi.min(b);
            if hi < lo - SET_TOL {
                return None;
            }
            let (lo_bound, lo) = if i.lo >= a - SET_TOL { (i.lo_bound, i.lo) } else { (Bound::Domain, lo) };
            let (hi_bound, hi) = if i.hi <= b + SET_TOL { (i.hi_bound, i.hi) } else { (Bound::Domain, hi) };
            // Snap near-coincident endpoints onto a single point.
            let hi = hi.max(lo);
            Some(Interval { lo, hi, lo_bound, hi_bound })
        })
        .collect()
}

fn union(mut parts: Vec<Interval>) -> Vec<Interval> {
    parts.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut out: Vec<Interval> = Vec::new();
    for p in parts {
        match out.last_mut() {
            Some(last) if p.lo <= last.hi + SET_TOL => {
                if p.hi > last.hi {
                    last.hi = p.hi;
                    last.hi_bound = p.hi_bound;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

/// Sustainable thresholds inside `[p_F, c]`.
pub fn lying_cost_sustainable_set(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<LyingCostSets> {
    check_outside_option(f, c)?;
    lying_cost_sets_with(&ThresholdScanner::new(f, cfg)?, c)
}

pub fn lying_cost_sets_with(scanner: &ThresholdScanner, c: f64) -> Result<LyingCostSets> {
    let f = scanner.prior();
    check_outside_option(f, c)?;
    let p_f = monopoly_price(f, scanner.config()).price;
    if c < p_f {
        return Ok(LyingCostSets::default());
    }
    let window = (p_f, c);
    let (any_h, both_h) = scanner.restricted_sets(c);
    let mut restricted = intersect(window, &any_h);
    restricted.extend(intersect(window, &both_h));
    Ok(LyingCostSets {
        restricted: union(restricted),
        unrestricted: union(intersect(window, &scanner.unrestricted_set(c))),
    })
}
