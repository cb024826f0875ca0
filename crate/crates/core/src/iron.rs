//! Ironed virtual values.
//!
//! For a regular posterior the raw virtual value is returned unchanged. For
//! an irregular one the revenue curve `R(q) = q * G^{-1}(1 - q)` is sampled
//! on a `grid_points` grid of sale probabilities `q`, its upper concave hull
//! is taken, and the ironed virtual value on each grid cell is the slope of
//! the hull there. Hull slopes are nonincreasing in `q`, hence nondecreasing
//! in value, and integrate back to the hull so no virtual surplus is created
//! or destroyed.

use alloc::vec::Vec;

use crate::dist::{raw_virtual_segments, regularity_violation, Posterior, ValueDistribution};
use crate::numeric::NumericConfig;

/// Affine piece `slope * v + intercept` on `[lo, hi]`. Flat pieces have
/// zero slope.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn eval(&self, v: f64) -> f64 {
        self.slope * v + self.intercept
    }

    pub fn is_flat(&self) -> bool {
        self.slope == 0.0
    }
}

/// Nondecreasing (possibly ironed) virtual value of a posterior.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IronedVirtual {
    segments: Vec<Segment>,
    ironed: bool,
}

impl IronedVirtual {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True when the raw virtual value was not monotone and had to be ironed.
    pub fn ironed(&self) -> bool {
        self.ironed
    }

    pub fn lo(&self) -> f64 {
        self.segments[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.segments[self.segments.len() - 1].hi
    }

    /// Value at `v`, clamped to the support. At a segment boundary the
    /// right-hand segment applies.
    pub fn eval(&self, v: f64) -> f64 {
        let v = v.clamp(self.lo(), self.hi());
        let k = self.segments.partition_point(|s| s.lo <= v).saturating_sub(1);
        self.segments[k].eval(v)
    }

    /// Largest `v` in the support with `eval(v) <= y`, or `None` when even
    /// the bottom of the support exceeds `y`.
    pub fn upper_preimage(&self, y: f64) -> Option<f64> {
        let k = self.segments.iter().rposition(|s| s.eval(s.lo) <= y)?;
        let s = &self.segments[k];
        if s.slope > 0.0 {
            Some(((y - s.intercept) / s.slope).clamp(s.lo, s.hi))
        } else {
            Some(s.hi)
        }
    }

    /// Smallest `v` in the support with `eval(v) >= y`, or `None` when even
    /// the top of the support falls short of `y`.
    pub fn lower_preimage(&self, y: f64) -> Option<f64> {
        let k = self.segments.iter().position(|s| s.eval(s.hi) >= y)?;
        let s = &self.segments[k];
        if s.slope > 0.0 {
            Some(((y - s.intercept) / s.slope).clamp(s.lo, s.hi))
        } else {
            Some(s.lo)
        }
    }

    /// `inf { v : eval(v) >= 0 }`: the type below which the bidder is never
    /// served. Equals the top of the support if no type has a nonnegative
    /// virtual value.
    pub fn reserve(&self) -> f64 {
        self.lower_preimage(0.0).unwrap_or(self.hi())
    }

    /// Probability under `d` that the virtual value is at most `y`.
    pub fn prob_at_most<D: ValueDistribution + ?Sized>(&self, d: &D, y: f64) -> f64 {
        self.upper_preimage(y).map_or(0.0, |v| d.cdf(v))
    }

    /// Probability under `d` that the virtual value is strictly below `y`.
    pub fn prob_below<D: ValueDistribution + ?Sized>(&self, d: &D, y: f64) -> f64 {
        self.lower_preimage(y).map_or(1.0, |v| d.cdf(v))
    }

    /// Virtual-value levels at every segment end, where the induced
    /// distribution of the virtual value has kinks or atoms.
    pub fn levels(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| [s.eval(s.lo), s.eval(s.hi)]).collect()
    }

    /// Values where the segments meet.
    pub fn knots(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }
}

/// Irons the virtual value of `p`.
pub fn iron(p: &Posterior, cfg: &NumericConfig) -> IronedVirtual {
    if regularity_violation(p, cfg).is_none() {
        return IronedVirtual { segments: raw_virtual_segments(p), ironed: false };
    }
    let n = cfg.grid_points;
    let qs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let vs: Vec<f64> = qs.iter().map(|&q| p.quantile(1.0 - q)).collect();
    let rs: Vec<f64> = qs.iter().zip(&vs).map(|(q, v)| q * v).collect();
    let hull = upper_hull(&qs, &rs);

    // Hull edges run in increasing q, i.e. decreasing value.
    let mut segments: Vec<Segment> = hull
        .windows(2)
        .rev()
        .map(|e| {
            let (i, j) = (e[0], e[1]);
            let slope = (rs[j] - rs[i]) / (qs[j] - qs[i]);
            Segment { lo: vs[j], hi: vs[i], slope: 0.0, intercept: slope }
        })
        .filter(|s| s.hi > s.lo)
        .collect();
    // Quantile steps can map onto identical values at the ends; keep coverage exact.
    segments[0].lo = p.lo();
    let last = segments.len() - 1;
    segments[last].hi = p.hi();
    IronedVirtual { segments, ironed: true }
}

/// Indices of the upper concave hull of the points `(xs[i], ys[i])`, with
/// `xs` strictly increasing. Collinear interior points are dropped.
pub fn upper_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (xs[k] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}
