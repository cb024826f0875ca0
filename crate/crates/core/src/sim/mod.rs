//! Monte Carlo estimation and brute-force oracles.
//!
//! Simulations are split into fixed batches of [`BATCH_DRAWS`] draws; batch
//! `b` reads random stream `b`, and batch statistics are combined by a
//! fixed pairwise tree over batch indices. Any driver that runs the batches
//! (sequentially here, on threads in the `preauction` crate) therefore
//! produces bit-identical results.

pub mod deviation;
pub mod game;
pub mod rng;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mechanisms::Regime;
use crate::Policy;

pub use deviation::{deviation_regret, entry_cost_regret, seller_ic_slack, DeviationReport, EntryCostReport, Message, SellerSlackReport};
pub use game::{simulate_game, simulate_interim, simulate_spa, GamePlan, InterimPlan, SpaPlan};
pub use rng::{rng_stream, uniform};

/// Draws per batch.
pub const BATCH_DRAWS: u64 = 1 << 14;

/// Streaming first and second moments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        Moments { n: self.n + other.n, sum: self.sum + other.sum, sumsq: self.sumsq + other.sumsq }
    }

    pub fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate { mean: 0.0, se: 0.0 };
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sumsq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
        Estimate { mean, se: libm::sqrt(var / n) }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// `|mean - target|` in standard errors.
    pub fn z(&self, target: f64) -> f64 {
        if self.se > 0.0 {
            (self.mean - target).abs() / self.se
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Statistics that combine associatively.
pub trait Mergeable: Clone {
    fn merge(&self, other: &Self) -> Self;
}

impl Mergeable for Moments {
    fn merge(&self, other: &Self) -> Self {
        Moments::merge(self, other)
    }
}

/// A simulation split into independent batches.
pub trait BatchPlan: Sync {
    type Stats: Mergeable + Send;
    type Output;

    fn batches(&self) -> usize;
    fn run_batch(&self, index: usize) -> Self::Stats;
    /// Builds the result from the statistics of every batch, in batch order.
    fn finish(&self, stats: &[Self::Stats]) -> Self::Output;
}

/// Fixed pairwise reduction over `stats` in index order.
pub fn tree_reduce<S: Mergeable>(stats: &[S]) -> Option<S> {
    match stats.len() {
        0 => None,
        1 => Some(stats[0].clone()),
        n => {
            let (l, r) = stats.split_at(n / 2);
            Some(tree_reduce(l)?.merge(&tree_reduce(r)?))
        }
    }
}

/// Runs every batch on the current thread.
pub fn run_sequential<P: BatchPlan>(plan: &P) -> P::Output {
    let stats: Vec<P::Stats> = (0..plan.batches()).map(|b| plan.run_batch(b)).collect();
    plan.finish(&stats)
}

/// Number of batches and the draws in batch `index`.
pub fn batch_layout(draws: u64) -> usize {
    draws.div_ceil(BATCH_DRAWS) as usize
}

pub fn batch_draws(draws: u64, index: usize) -> u64 {
    let start = index as u64 * BATCH_DRAWS;
    BATCH_DRAWS.min(draws.saturating_sub(start))
}

pub const MIN_DRAWS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub seed: u64,
    pub draws: u64,
    pub tau: f64,
    pub policy: Policy,
    pub regime: Regime,
    pub c: f64,
}

impl SimConfig {
    pub fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        if self.draws < MIN_DRAWS {
            return Err(Error::param("draws", alloc::format!("must be at least {MIN_DRAWS}")));
        }
        if !(self.tau > lo && self.tau < hi) {
            return Err(Error::param("tau", alloc::format!("must lie in ({lo}, {hi}), got {}", self.tau)));
        }
        if !(self.c > 0.0 && self.c < hi) {
            return Err(Error::param("outside_option", alloc::format!("must lie in (0, {hi}), got {}", self.c)));
        }
        Ok(())
    }
}

/// Tallies of message profiles and of auctions actually run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileCounts {
    pub hh: u64,
    pub hl: u64,
    pub ll: u64,
    pub runs: u64,
    pub sales: u64,
}

impl ProfileCounts {
    pub fn total(&self) -> u64 {
        self.hh + self.hl + self.ll
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimResult {
    pub draws: u64,
    pub revenue: Estimate,
    pub seller_payoff: Estimate,
    /// Ex-ante utility of one bidder, averaged over both.
    pub bidder_utility: Estimate,
    pub counts: ProfileCounts,
}
