//! Brute-force oracles for candidate equilibria: bidder deviation regret on
//! a type grid and independent recomputation of the seller's slacks.
//!
//! Interim utilities use the envelope form `U(b) = int_floor^b x(s) ds`
//! with `x` the interim winning probability of the mechanism the seller
//! runs at each profile. A type whose value lies outside the support of the
//! posterior its message induces can only report within that support, so it
//! reports the nearest support point and earns `U(b) + x(b) (v - b)`,
//! floored at zero because it can always lose deliberately.

use alloc::vec::Vec;

use crate::dist::{truncate, Distribution, Posterior, ValueDistribution};
use crate::equilibria::{check_outside_option, EquilibriumRegime, Slacks, ThresholdEquilibrium, SLACK_TOL};
use crate::error::Result;
use crate::iron::{iron, IronedVirtual};
use crate::mechanisms::{myerson_revenue_2d, optimal_common_reserve, rev_on_posteriors, MechanismKind, MessageProfile, Regime};
use crate::numeric::{integrate_panels, linspace, NumericConfig};
use crate::perturbations::entry_subsidy_factor;

/// Gains at or below this are treated as no gain.
pub const REGRET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Message {
    H,
    L,
}

impl Message {
    fn index(self) -> usize {
        match self {
            Message::H => 0,
            Message::L => 1,
        }
    }

    fn other(self) -> Message {
        match self {
            Message::H => Message::L,
            Message::L => Message::H,
        }
    }
}

fn profile_of(own: Message, opp: Message) -> MessageProfile {
    match (own, opp) {
        (Message::H, Message::H) => MessageProfile::HH,
        (Message::L, Message::L) => MessageProfile::LL,
        _ => MessageProfile::HL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mechanism {
    SecondPrice { reserve: f64 },
    Myerson,
}

/// The seller's equilibrium response at every profile, from one bidder's
/// point of view.
#[derive(Debug, Clone)]
pub struct Play {
    tau: f64,
    p_high: f64,
    post: [Posterior; 2],
    virt: [IronedVirtual; 2],
    /// `cells[own][opp]`; `None` where the seller takes the outside option.
    cells: [[Option<Mechanism>; 2]; 2],
}

impl Play {
    pub fn new(f: &Distribution, eq: &ThresholdEquilibrium, cfg: &NumericConfig) -> Result<Self> {
        let post = [truncate(f, eq.tau, f.hi())?, truncate(f, f.lo(), eq.tau)?];
        let virt = [iron(&post[0], cfg), iron(&post[1], cfg)];
        let policy = eq.regime.policy();
        let regime = eq.regime.mechanisms();
        let mut cells = [[None; 2]; 2];
        for own in [Message::H, Message::L] {
            for opp in [Message::H, Message::L] {
                let profile = profile_of(own, opp);
                if !policy.runs(profile) {
                    continue;
                }
                cells[own.index()][opp.index()] = Some(match regime {
                    Regime::Unrestricted => Mechanism::Myerson,
                    Regime::CommonReserve => {
                        match rev_on_posteriors(&post[0], &post[1], profile, regime, cfg).kind {
                            MechanismKind::SecondPriceReserve { reserve } => Mechanism::SecondPrice { reserve },
                            MechanismKind::PostedPrice { price } => Mechanism::SecondPrice { reserve: price },
                            MechanismKind::MyersonOptimal { .. } => Mechanism::Myerson,
                        }
                    }
                });
            }
        }
        Ok(Play { tau: eq.tau, p_high: f.survival(eq.tau), post, virt, cells })
    }

    fn prob(&self, m: Message) -> f64 {
        match m {
            Message::H => self.p_high,
            Message::L => 1.0 - self.p_high,
        }
    }

    /// Interim winning probability of report `s` at `(own, opp)`.
    fn allocation(&self, mech: Mechanism, own: Message, opp: Message, s: f64) -> f64 {
        let g_opp = &self.post[opp.index()];
        match mech {
            Mechanism::SecondPrice { reserve } => {
                if s >= reserve {
                    g_opp.cdf(s)
                } else {
                    0.0
                }
            }
            Mechanism::Myerson => {
                let y = self.virt[own.index()].eval(s);
                if y < 0.0 {
                    return 0.0;
                }
                let v_opp = &self.virt[opp.index()];
                let below = v_opp.prob_below(g_opp, y);
                let at_most = v_opp.prob_at_most(g_opp, y);
                below + 0.5 * (at_most - below)
            }
        }
    }

    fn breaks(&self, mech: Mechanism, own: Message, opp: Message) -> Vec<f64> {
        let mut b = self.post[own.index()].pieces();
        b.extend(self.post[opp.index()].pieces());
        match mech {
            Mechanism::SecondPrice { reserve } => b.push(reserve),
            Mechanism::Myerson => {
                let v_own = &self.virt[own.index()];
                b.extend(v_own.knots());
                b.push(v_own.reserve());
                for y in self.virt[opp.index()].levels() {
                    b.extend(v_own.lower_preimage(y));
                    b.extend(v_own.upper_preimage(y));
                }
            }
        }
        b
    }

    /// Utility of true type `v` sending `own` when the rival sends `opp`.
    pub fn utility(&self, v: f64, own: Message, opp: Message) -> f64 {
        let Some(mech) = self.cells[own.index()][opp.index()] else {
            return 0.0;
        };
        let support = &self.post[own.index()];
        let report = v.clamp(support.lo(), support.hi());
        let floor = match mech {
            Mechanism::SecondPrice { reserve } => reserve,
            Mechanism::Myerson => support.lo(),
        };
        let x = |s: f64| self.allocation(mech, own, opp, s);
        let envelope = if report > floor { integrate_panels(x, floor, report, &self.breaks(mech, own, opp)) } else { 0.0 };
        (envelope + x(report) * (v - report)).max(0.0)
    }

    /// Expected utility of type `v` sending `own` against the threshold rival.
    pub fn expected_utility(&self, v: f64, own: Message) -> f64 {
        [Message::H, Message::L].iter().map(|&opp| self.prob(opp) * self.utility(v, own, opp)).sum()
    }

    /// Probability that the mechanism runs after sending `own`.
    pub fn run_probability(&self, own: Message) -> f64 {
        [Message::H, Message::L]
            .iter()
            .filter(|opp| self.cells[own.index()][opp.index()].is_some())
            .map(|&opp| self.prob(opp))
            .sum()
    }

    /// Message the threshold strategy prescribes for type `v`.
    pub fn prescribed(&self, v: f64) -> Message {
        if v >= self.tau {
            Message::H
        } else {
            Message::L
        }
    }
}

/// Largest gain of any type on the grid from switching message.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub value: f64,
    pub from: Message,
    pub to: Message,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviationReport {
    pub grid: Vec<f64>,
    /// Gain from switching message per grid type; negative when the
    /// prescribed message is strictly better.
    pub regret: Vec<f64>,
    pub max_regret: f64,
    /// `|U(tau | H) - U(tau | L)|` for the threshold type itself.
    pub tau_gap: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub witness: Option<Witness>,
}

fn report_from(play: &Play, grid: Vec<f64>, gain: impl Fn(f64, Message) -> f64) -> DeviationReport {
    let regret: Vec<f64> = grid.iter().map(|&v| gain(v, play.prescribed(v))).collect();
    let (arg, max_regret) = regret
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
    let witness = (max_regret > REGRET_TOL).then(|| {
        let from = play.prescribed(grid[arg]);
        Witness { value: grid[arg], from, to: from.other(), gain: max_regret }
    });
    let tau_gap = (play.expected_utility(play.tau, Message::H) - play.expected_utility(play.tau, Message::L)).abs();
    DeviationReport { grid, regret, max_regret, tau_gap, witness }
}

/// Best gain from switching message for every type on a `grid_points`
/// grid over the support, given the rival's threshold strategy and the
/// seller's equilibrium responses.
pub fn deviation_regret(
    f: &Distribution,
    c: f64,
    eq: &ThresholdEquilibrium,
    grid_points: usize,
    cfg: &NumericConfig,
) -> Result<DeviationReport> {
    check_outside_option(f, c)?;
    let play = Play::new(f, eq, cfg)?;
    let grid = linspace(f.lo(), f.hi(), grid_points.max(2));
    Ok(report_from(&play, grid, |v, m| play.expected_utility(v, m.other()) - play.expected_utility(v, m)))
}

/// Deviation check of the game with messaging cost `epsilon`, a free
/// non-participation message that the seller reads like `L`, and a
/// participation subsidy `k epsilon` paid whenever the mechanism runs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntryCostReport {
    pub epsilon: f64,
    pub factor: f64,
    /// Largest cost for which the subsidies keep every run profile
    /// profitable for the seller.
    pub epsilon_bound: f64,
    pub deviation: DeviationReport,
}

pub fn entry_cost_regret(
    f: &Distribution,
    c: f64,
    eq: &ThresholdEquilibrium,
    epsilon: f64,
    grid_points: usize,
    cfg: &NumericConfig,
) -> Result<EntryCostReport> {
    check_outside_option(f, c)?;
    let policy = eq.regime.policy();
    let factor = entry_subsidy_factor(f, eq.tau, policy, cfg)?.factor;
    let play = Play::new(f, eq, cfg)?;
    let net_h = |v: f64| play.expected_utility(v, Message::H) + play.run_probability(Message::H) * factor * epsilon - epsilon;
    let grid = linspace(f.lo(), f.hi(), grid_points.max(2));
    let deviation = report_from(&play, grid, |v, m| match m {
        Message::H => play.expected_utility(v, Message::L) - net_h(v),
        Message::L => net_h(v) - play.expected_utility(v, Message::L),
    });
    let epsilon_bound = MessageProfile::ALL
        .iter()
        .filter(|&&p| policy.runs(p))
        .map(|&p| {
            let participants = if p == MessageProfile::HH { 2.0 } else { 1.0 };
            eq.slacks.get(p).max(0.0) / (participants * factor)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(EntryCostReport { epsilon, factor, epsilon_bound, deviation })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileSlack {
    pub profile: MessageProfile,
    pub revenue: f64,
    pub slack: f64,
    pub runs: bool,
    /// Run profiles need `slack >= 0`, skipped ones `slack <= 0`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SellerSlackReport {
    pub profiles: Vec<ProfileSlack>,
    pub slacks: Slacks,
    pub consistent: bool,
    /// Largest difference from the slacks stored in the equilibrium.
    pub max_drift: f64,
}

/// Recomputes the seller's best revenue at each profile by a route
/// independent of the solver: a full reserve search under the common
/// reserve, product-measure quadrature under Myerson.
pub fn seller_ic_slack(f: &Distribution, c: f64, eq: &ThresholdEquilibrium, cfg: &NumericConfig) -> Result<SellerSlackReport> {
    check_outside_option(f, c)?;
    let high = truncate(f, eq.tau, f.hi())?;
    let low = truncate(f, f.lo(), eq.tau)?;
    let policy = eq.regime.policy();
    let mut profiles = Vec::new();
    for profile in MessageProfile::ALL {
        let (g1, g2) = match profile {
            MessageProfile::HH => (&high, &high),
            MessageProfile::HL => (&high, &low),
            MessageProfile::LL => (&low, &low),
        };
        let revenue = match eq.regime {
            EquilibriumRegime::UnrestrictedBothH => myerson_revenue_2d(g1, g2, cfg),
            _ => optimal_common_reserve(g1, g2, cfg).1,
        };
        let slack = revenue - c;
        let runs = policy.runs(profile);
        let consistent = if runs { slack >= -SLACK_TOL } else { slack <= SLACK_TOL };
        profiles.push(ProfileSlack { profile, revenue, slack, runs, consistent });
    }
    let slacks = Slacks { hh: profiles[0].slack, hl: profiles[1].slack, ll: profiles[2].slack };
    let max_drift = MessageProfile::ALL
        .iter()
        .map(|&p| (slacks.get(p) - eq.slacks.get(p)).abs())
        .fold(0.0, f64::max);
    Ok(SellerSlackReport { consistent: profiles.iter().all(|p| p.consistent), profiles, slacks, max_drift })
}
