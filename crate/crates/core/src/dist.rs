//! Value distributions, posteriors after threshold messages, virtual values
//! and monopoly prices.
//!
//! Every supported family has a piecewise-linear CDF (the uniform is the
//! two-knot case), so densities are piecewise constant and raw virtual
//! values are affine with slope 2 between knots. Several routines rely on
//! that structure to integrate exactly between breakpoints.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::iron::Segment;
use crate::numeric::{find_root, linspace, maximize, NumericConfig};

/// Slack allowed when checking that a virtual value is nondecreasing.
pub const REGULARITY_SLACK: f64 = 1e-8;

/// Read access shared by [`Distribution`] and [`Posterior`].
pub trait ValueDistribution {
    fn lo(&self) -> f64;
    fn hi(&self) -> f64;
    fn cdf(&self, v: f64) -> f64;
    /// Density; at an interior knot the density of the piece to the right.
    fn pdf(&self, v: f64) -> f64;
    /// Inverse CDF for `u` in `[0, 1]`.
    fn quantile(&self, u: f64) -> f64;
    /// Interior points where the density changes.
    fn breakpoints(&self) -> Vec<f64>;

    /// `v - (1 - F(v)) / f(v)`.
    fn virtual_value(&self, v: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        if !(v >= lo && v <= hi) {
            return Err(Error::OutOfSupport { value: v, lo, hi });
        }
        Ok(v - (1.0 - self.cdf(v)) / self.pdf(v))
    }

    /// Support endpoints together with the interior knots, ascending.
    fn pieces(&self) -> Vec<f64> {
        let mut pts = alloc::vec![self.lo()];
        pts.extend(self.breakpoints());
        pts.push(self.hi());
        pts
    }

    /// Probability of selling at posted price `p`: `1 - F(p)`.
    fn survival(&self, p: f64) -> f64 {
        1.0 - self.cdf(p)
    }
}

/// Parametric family of a [`Distribution`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "family"))]
pub enum Family {
    Uniform { lo: f64, hi: f64 },
    /// Sorted `(value, cdf)` knots; the CDF is linear in between.
    PiecewiseLinearCdf { knots: Vec<(f64, f64)> },
}

/// Prior value distribution with full support on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    family: Family,
    xs: Vec<f64>,
    cs: Vec<f64>,
}

impl Distribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDistribution(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        if lo < 0.0 {
            return Err(Error::InvalidDistribution(format!("values must be nonnegative, got lo = {lo}")));
        }
        Ok(Distribution {
            family: Family::Uniform { lo, hi },
            xs: alloc::vec![lo, hi],
            cs: alloc::vec![0.0, 1.0],
        })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two knots".into()));
        }
        if knots.iter().any(|(x, c)| !x.is_finite() || !c.is_finite()) {
            return Err(Error::InvalidDistribution("knots must be finite".into()));
        }
        if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 1.0 {
            return Err(Error::InvalidDistribution("cdf must run from 0 at the first knot to 1 at the last".into()));
        }
        if knots[0].0 < 0.0 {
            return Err(Error::InvalidDistribution("values must be nonnegative".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidDistribution(format!("knot values not strictly increasing at {}", w[1].0)));
            }
            if !(w[1].1 > w[0].1) {
                return Err(Error::InvalidDistribution(format!("cdf not strictly increasing at {}", w[1].0)));
            }
        }
        Ok(Distribution {
            xs: knots.iter().map(|k| k.0).collect(),
            cs: knots.iter().map(|k| k.1).collect(),
            family: Family::PiecewiseLinearCdf { knots },
        })
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::Uniform { lo, hi } => Self::uniform(lo, hi),
            Family::PiecewiseLinearCdf { knots } => Self::piecewise_linear(knots),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Smallest density over the support.
    pub fn min_density(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.cs.windows(2))
            .map(|(x, c)| (c[1] - c[0]) / (x[1] - x[0]))
            .fold(f64::INFINITY, f64::min)
    }

    fn piece(&self, v: f64) -> usize {
        // Index k with xs[k] <= v < xs[k+1], clamped to the last piece.
        let k = self.xs.partition_point(|&x| x <= v);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }
}

impl ValueDistribution for Distribution {
    fn lo(&self) -> f64 {
        self.xs[0]
    }

    fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn cdf(&self, v: f64) -> f64 {
        if v <= self.lo() {
            return 0.0;
        }
        if v >= self.hi() {
            return 1.0;
        }
        let k = self.piece(v);
        let t = (v - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.cs[k] + t * (self.cs[k + 1] - self.cs[k])
    }

    fn pdf(&self, v: f64) -> f64 {
        if v < self.lo() || v > self.hi() {
            return 0.0;
        }
        let k = self.piece(v);
        (self.cs[k + 1] - self.cs[k]) / (self.xs[k + 1] - self.xs[k])
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lo();
        }
        if u >= 1.0 {
            return self.hi();
        }
        let k = self.cs.partition_point(|&c| c <= u).saturating_sub(1).min(self.cs.len() - 2);
        let t = (u - self.cs[k]) / (self.cs[k + 1] - self.cs[k]);
        self.xs[k] + t * (self.xs[k + 1] - self.xs[k])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.xs[1..self.xs.len() - 1].to_vec()
    }
}

/// The seller's belief about a bidder after a message: the prior truncated
/// to `[lo, hi]` and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    base: Distribution,
    lo: f64,
    hi: f64,
    cdf_lo: f64,
    mass: f64,
}

impl Posterior {
    pub fn base(&self) -> &Distribution {
        &self.base
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl ValueDistribution for Posterior {
    fn lo(&self) -> f64 {
        self.lo
    }

    fn hi(&self) -> f64 {
        self.hi
    }

    fn cdf(&self, v: f64) -> f64 {
        if v <= self.lo {
            return 0.0;
        }
        if v >= self.hi {
            return 1.0;
        }
        ((self.base.cdf(v) - self.cdf_lo) / self.mass).clamp(0.0, 1.0)
    }

    fn pdf(&self, v: f64) -> f64 {
        if v < self.lo || v > self.hi {
            return 0.0;
        }
        // At `hi` use the piece to the left, even when `hi` is a knot of the base.
        let at = if v >= self.hi { self.hi - (self.hi - self.lo) * 1e-12 } else { v };
        self.base.pdf(at) / self.mass
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lo;
        }
        if u >= 1.0 {
            return self.hi;
        }
        self.base.quantile(self.cdf_lo + u * self.mass).clamp(self.lo, self.hi)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints().into_iter().filter(|&x| x > self.lo && x < self.hi).collect()
    }
}

/// Truncates `base` to `[a, b]`.
pub fn truncate(base: &Distribution, a: f64, b: f64) -> Result<Posterior> {
    if !(a >= base.lo() && b <= base.hi() && a < b) {
        return Err(Error::InvalidParameter {
            name: "truncation",
            reason: format!("[{a}, {b}] must be a nondegenerate subinterval of [{}, {}]", base.lo(), base.hi()),
        });
    }
    let cdf_lo = base.cdf(a);
    let mass = base.cdf(b) - cdf_lo;
    if !(mass > 0.0) {
        return Err(Error::ZeroMass { lo: a, hi: b });
    }
    Ok(Posterior { base: base.clone(), lo: a, hi: b, cdf_lo, mass })
}

/// The prior viewed as the trivial posterior on its own support.
pub fn full_posterior(base: &Distribution) -> Posterior {
    Posterior { base: base.clone(), lo: base.lo(), hi: base.hi(), cdf_lo: 0.0, mass: 1.0 }
}

/// Virtual value of `d` at `v`.
pub fn virtual_value<D: ValueDistribution + ?Sized>(d: &D, v: f64) -> Result<f64> {
    d.virtual_value(v)
}

/// Raw virtual value as affine pieces between consecutive knots.
pub fn raw_virtual_segments<D: ValueDistribution + ?Sized>(d: &D) -> Vec<Segment> {
    let pts = d.pieces();
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let phi_mid = mid - (1.0 - d.cdf(mid)) / d.pdf(mid);
            Segment { lo: w[0], hi: w[1], slope: 2.0, intercept: phi_mid - 2.0 * mid }
        })
        .collect()
}

/// Location of the first decrease of the raw virtual value, if any.
///
/// Checks the jump at every knot exactly and a `grid_points` grid in
/// between.
pub fn regularity_violation<D: ValueDistribution + ?Sized>(d: &D, cfg: &NumericConfig) -> Option<f64> {
    let segs = raw_virtual_segments(d);
    for w in segs.windows(2) {
        let knot = w[0].hi;
        if w[1].eval(knot) < w[0].eval(knot) - REGULARITY_SLACK {
            return Some(knot);
        }
    }
    let grid = linspace(d.lo(), d.hi(), cfg.grid_points);
    let mut prev = f64::NEG_INFINITY;
    for &v in &grid {
        let phi = d.virtual_value(v).unwrap_or(f64::NAN);
        if phi < prev - REGULARITY_SLACK {
            return Some(v);
        }
        prev = phi;
    }
    None
}

pub fn is_regular<D: ValueDistribution + ?Sized>(d: &D, cfg: &NumericConfig) -> bool {
    regularity_violation(d, cfg).is_none()
}

/// Optimal posted price against a single bidder.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonopolyPrice {
    pub price: f64,
    pub revenue: f64,
}

/// Maximizer of `p (1 - F(p))` over the support, smallest price on ties.
///
/// The primary route takes every zero of the affine virtual-value pieces
/// plus the piece endpoints as candidates. A `grid_points` grid argmax
/// cross-checks it and wins if it finds strictly more revenue.
pub fn monopoly_price<D: ValueDistribution + ?Sized>(d: &D, cfg: &NumericConfig) -> MonopolyPrice {
    let revenue = |p: f64| p * d.survival(p);
    let mut candidates = Vec::new();
    for seg in raw_virtual_segments(d) {
        candidates.push(seg.lo);
        candidates.push(seg.hi);
        let root = -seg.intercept / seg.slope;
        if root > seg.lo && root < seg.hi {
            candidates.push(root);
        }
    }
    candidates.sort_by(f64::total_cmp);
    let best_rev = candidates.iter().map(|&p| revenue(p)).fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-14 * best_rev.abs().max(1.0);
    let price = candidates.iter().copied().find(|&p| revenue(p) >= best_rev - tie).unwrap_or(d.lo());
    let by_root = MonopolyPrice { price, revenue: revenue(price) };

    let grid = linspace(d.lo(), d.hi(), cfg.grid_points);
    let (gi, grid_rev) = grid
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if revenue(p) > acc.1 { (i, revenue(p)) } else { acc });
    if grid_rev > by_root.revenue + cfg.root_tol {
        let a = grid[gi.saturating_sub(1)];
        let b = grid[(gi + 1).min(grid.len() - 1)];
        let (p, r) = maximize(revenue, a, b, cfg.root_tol);
        return MonopolyPrice { price: p, revenue: r };
    }
    by_root
}

/// Full-commitment reserve: the value whose virtual value equals `c`.
pub fn r_star(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<f64> {
    if !(c > 0.0 && c < f.hi()) {
        return Err(Error::param("outside_option", format!("must lie in (0, {}), got {c}", f.hi())));
    }
    if let Some(at) = regularity_violation(f, cfg) {
        return Err(Error::Irregular { at });
    }
    let gap = |v: f64| f.virtual_value(v).map(|phi| phi - c).unwrap_or(f64::NAN);
    if gap(f.lo()) >= 0.0 {
        return Ok(f.lo());
    }
    if gap(f.hi()) < 0.0 {
        return Ok(f.hi());
    }
    find_root(gap, f.lo(), f.hi(), cfg.root_tol * 0.25)
}
