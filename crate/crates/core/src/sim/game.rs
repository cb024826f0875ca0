//! Monte Carlo of the two-period game under a threshold strategy.

use crate::dist::{monopoly_price, truncate, Distribution, Posterior, ValueDistribution};
use crate::error::Result;
use crate::iron::{iron, IronedVirtual};
use crate::mechanisms::{MessageProfile, Regime};
use crate::numeric::NumericConfig;

use super::rng::{rng_stream, uniform, Stream};
use super::{batch_draws, batch_layout, run_sequential, tree_reduce, BatchPlan, Estimate, Mergeable, Moments, ProfileCounts, SimConfig, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GameStats {
    pub revenue: Moments,
    pub payoff: Moments,
    pub utility: Moments,
    pub counts: ProfileCounts,
}

impl Mergeable for GameStats {
    fn merge(&self, o: &Self) -> Self {
        GameStats {
            revenue: self.revenue.merge(&o.revenue),
            payoff: self.payoff.merge(&o.payoff),
            utility: self.utility.merge(&o.utility),
            counts: ProfileCounts {
                hh: self.counts.hh + o.counts.hh,
                hl: self.counts.hl + o.counts.hl,
                ll: self.counts.ll + o.counts.ll,
                runs: self.counts.runs + o.counts.runs,
                sales: self.counts.sales + o.counts.sales,
            },
        }
    }
}

/// Result of one play of the second period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub profile: MessageProfile,
    pub run: bool,
    pub winner: Option<usize>,
    pub price: f64,
}

/// Everything needed to play the game for given values.
#[derive(Debug, Clone)]
pub struct GamePlan {
    prior: Distribution,
    sim: SimConfig,
    reserve: f64,
    /// Ironed virtual values of the `H` and `L` posteriors.
    virt: [IronedVirtual; 2],
}

impl GamePlan {
    pub fn new(f: &Distribution, sim: &SimConfig, cfg: &NumericConfig) -> Result<Self> {
        sim.validate(f.lo(), f.hi())?;
        let high = truncate(f, sim.tau, f.hi())?;
        let low = truncate(f, f.lo(), sim.tau)?;
        Ok(GamePlan {
            prior: f.clone(),
            sim: *sim,
            reserve: sim.tau.max(monopoly_price(f, cfg).price),
            virt: [iron(&high, cfg), iron(&low, cfg)],
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.sim
    }

    /// Reserve of every second-price auction run on path.
    pub fn reserve(&self) -> f64 {
        self.reserve
    }

    fn virt_of(&self, high: bool) -> &IronedVirtual {
        &self.virt[if high { 0 } else { 1 }]
    }

    /// Messages, run decision and mechanism outcome for values `v`; `rng`
    /// breaks ties.
    pub fn play(&self, v: [f64; 2], rng: &mut Stream) -> Outcome {
        let high = [v[0] >= self.sim.tau, v[1] >= self.sim.tau];
        let profile = match (high[0], high[1]) {
            (true, true) => MessageProfile::HH,
            (false, false) => MessageProfile::LL,
            _ => MessageProfile::HL,
        };
        if !self.sim.policy.runs(profile) {
            return Outcome { profile, run: false, winner: None, price: 0.0 };
        }
        let (winner, price) = match self.sim.regime {
            Regime::CommonReserve => second_price(v, self.reserve, rng),
            Regime::Unrestricted => self.myerson(v, high, rng),
        };
        Outcome { profile, run: true, winner, price }
    }

    fn myerson(&self, v: [f64; 2], high: [bool; 2], rng: &mut Stream) -> (Option<usize>, f64) {
        let virt = [self.virt_of(high[0]), self.virt_of(high[1])];
        let y = [virt[0].eval(v[0]), virt[1].eval(v[1])];
        if y[0] < 0.0 && y[1] < 0.0 {
            return (None, 0.0);
        }
        let tie = y[0] == y[1];
        let i = if tie {
            usize::from(uniform(rng) >= 0.5)
        } else if y[0] > y[1] {
            0
        } else {
            1
        };
        let (own, rival) = (virt[i], y[1 - i]);
        let price = if tie {
            own.lower_preimage(y[i]).unwrap_or(v[i])
        } else if rival < 0.0 {
            own.reserve()
        } else {
            // Averages over the flat stretch at the rival's level, where
            // ties would have been split.
            let a = own.lower_preimage(rival).unwrap_or(v[i]);
            let b = own.upper_preimage(rival).unwrap_or(a).min(v[i]);
            0.5 * (a + b.max(a))
        };
        (Some(i), price)
    }
}

fn second_price(v: [f64; 2], reserve: f64, rng: &mut Stream) -> (Option<usize>, f64) {
    match (v[0] >= reserve, v[1] >= reserve) {
        (false, false) => (None, 0.0),
        (true, false) => (Some(0), reserve),
        (false, true) => (Some(1), reserve),
        (true, true) => {
            let i = if v[0] == v[1] {
                usize::from(uniform(rng) >= 0.5)
            } else if v[0] > v[1] {
                0
            } else {
                1
            };
            (Some(i), v[1 - i])
        }
    }
}

impl BatchPlan for GamePlan {
    type Stats = GameStats;
    type Output = SimResult;

    fn batches(&self) -> usize {
        batch_layout(self.sim.draws)
    }

    fn run_batch(&self, index: usize) -> GameStats {
        let mut rng = rng_stream(self.sim.seed, index as u64);
        let mut s = GameStats::default();
        for _ in 0..batch_draws(self.sim.draws, index) {
            let v = [self.prior.quantile(uniform(&mut rng)), self.prior.quantile(uniform(&mut rng))];
            let out = self.play(v, &mut rng);
            match out.profile {
                MessageProfile::HH => s.counts.hh += 1,
                MessageProfile::HL => s.counts.hl += 1,
                MessageProfile::LL => s.counts.ll += 1,
            }
            let mut u = [0.0; 2];
            if out.run {
                s.counts.runs += 1;
                if let Some(i) = out.winner {
                    s.counts.sales += 1;
                    u[i] = v[i] - out.price;
                }
                s.revenue.push(out.price);
                s.payoff.push(out.price);
            } else {
                s.revenue.push(0.0);
                s.payoff.push(self.sim.c);
            }
            s.utility.push(0.5 * (u[0] + u[1]));
        }
        s
    }

    fn finish(&self, stats: &[GameStats]) -> SimResult {
        let total = tree_reduce(stats).unwrap_or_default();
        SimResult {
            draws: self.sim.draws,
            revenue: total.revenue.estimate(),
            seller_payoff: total.payoff.estimate(),
            bidder_utility: total.utility.estimate(),
            counts: total.counts,
        }
    }
}

pub fn simulate_game(f: &Distribution, sim: &SimConfig, cfg: &NumericConfig) -> Result<SimResult> {
    Ok(run_sequential(&GamePlan::new(f, sim, cfg)?))
}

/// Utility of a bidder with fixed type `value` who follows the threshold
/// strategy against a rival drawn from the prior.
#[derive(Debug, Clone)]
pub struct InterimPlan {
    game: GamePlan,
    value: f64,
}

impl InterimPlan {
    pub fn new(f: &Distribution, sim: &SimConfig, value: f64, cfg: &NumericConfig) -> Result<Self> {
        Ok(InterimPlan { game: GamePlan::new(f, sim, cfg)?, value: value.clamp(f.lo(), f.hi()) })
    }
}

impl BatchPlan for InterimPlan {
    type Stats = Moments;
    type Output = Estimate;

    fn batches(&self) -> usize {
        batch_layout(self.game.sim.draws)
    }

    fn run_batch(&self, index: usize) -> Moments {
        let mut rng = rng_stream(self.game.sim.seed, index as u64);
        let mut m = Moments::default();
        for _ in 0..batch_draws(self.game.sim.draws, index) {
            let v = [self.value, self.game.prior.quantile(uniform(&mut rng))];
            let out = self.game.play(v, &mut rng);
            m.push(if out.winner == Some(0) { v[0] - out.price } else { 0.0 });
        }
        m
    }

    fn finish(&self, stats: &[Moments]) -> Estimate {
        tree_reduce(stats).unwrap_or_default().estimate()
    }
}

pub fn simulate_interim(f: &Distribution, sim: &SimConfig, value: f64, cfg: &NumericConfig) -> Result<Estimate> {
    Ok(run_sequential(&InterimPlan::new(f, sim, value, cfg)?))
}

/// Revenue of a second-price auction with reserve `reserve` between bidders
/// drawn from two posteriors.
#[derive(Debug, Clone)]
pub struct SpaPlan {
    pub g1: Posterior,
    pub g2: Posterior,
    pub reserve: f64,
    pub draws: u64,
    pub seed: u64,
}

impl BatchPlan for SpaPlan {
    type Stats = Moments;
    type Output = Estimate;

    fn batches(&self) -> usize {
        batch_layout(self.draws)
    }

    fn run_batch(&self, index: usize) -> Moments {
        let mut rng = rng_stream(self.seed, index as u64);
        let mut m = Moments::default();
        for _ in 0..batch_draws(self.draws, index) {
            let v = [self.g1.quantile(uniform(&mut rng)), self.g2.quantile(uniform(&mut rng))];
            m.push(second_price(v, self.reserve, &mut rng).1);
        }
        m
    }

    fn finish(&self, stats: &[Moments]) -> Estimate {
        tree_reduce(stats).unwrap_or_default().estimate()
    }
}

pub fn simulate_spa(g1: &Posterior, g2: &Posterior, reserve: f64, draws: u64, seed: u64) -> Estimate {
    run_sequential(&SpaPlan { g1: g1.clone(), g2: g2.clone(), reserve, draws, seed })
}
