//! Threshold equilibria: the full-commitment benchmark, sustainable
//! threshold sets under both regimes, seller- and bidder-optimal
//! thresholds, and the payoff functionals behind them.
//!
//! Sustainability is encoded as the seller's sequential-rationality
//! inequalities at the three message profiles. Each inequality is scanned
//! on a threshold grid, sign changes are refined with Brent's method, and
//! the feasible set is returned as a union of closed intervals whose
//! endpoints carry the constraint that binds there.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::{full_posterior, monopoly_price, r_star, regularity_violation, Distribution, MonopolyPrice, ValueDistribution};
use crate::error::{Error, Result};
use crate::iron::{iron, IronedVirtual};
use crate::mechanisms::{myerson_revenue, rev_profile, MechanismKind, MechanismSummary, MessageProfile, Regime};
use crate::numeric::{find_root, integrate_panels, linspace, maximize, NumericConfig};
use crate::statics::{probabilities, Probabilities};
use crate::Policy;

/// Slack within which a run (skip) constraint counts as satisfied.
pub const SLACK_TOL: f64 = 1e-7;
/// Largest change allowed when an equilibrium is recomputed at doubled
/// resolution.
pub const DRIFT_TOL: f64 = 1e-6;

pub(crate) fn check_outside_option(f: &Distribution, c: f64) -> Result<()> {
    if c > 0.0 && c < f.hi() {
        Ok(())
    } else {
        Err(Error::param("outside_option", format!("must lie in (0, {}), got {c}", f.hi())))
    }
}

pub(crate) fn check_threshold(f: &Distribution, tau: f64) -> Result<()> {
    if tau > f.lo() && tau < f.hi() {
        Ok(())
    } else {
        Err(Error::param("tau", format!("must lie in ({}, {}), got {tau}", f.lo(), f.hi())))
    }
}

/// Positive part of the prior's (ironed) virtual value weighted by the
/// density, and the seller payoffs built from it.
#[derive(Debug, Clone)]
pub struct Surplus {
    prior: Distribution,
    virt: IronedVirtual,
    breaks: Vec<f64>,
}

impl Surplus {
    pub fn new(f: &Distribution, cfg: &NumericConfig) -> Self {
        let virt = iron(&full_posterior(f), cfg);
        let mut breaks = f.pieces();
        breaks.extend(virt.knots());
        breaks.push(virt.reserve());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Surplus { prior: f.clone(), virt, breaks }
    }

    pub fn virtual_value(&self, v: f64) -> f64 {
        self.virt.eval(v)
    }

    fn density(&self, v: f64) -> f64 {
        self.virt.eval(v).max(0.0) * self.prior.pdf(v)
    }

    /// `int_x^hi max(phi(v), 0) f(v) dv`.
    pub fn tail(&self, x: f64) -> f64 {
        integrate_panels(|v| self.density(v), x, self.prior.hi(), &self.breaks)
    }

    /// Seller payoff when the auction runs iff some value is at least `tau`:
    /// `int_tau^hi max(phi, 0) 2 F f dx + c F(tau)^2`.
    pub fn pi1(&self, tau: f64, c: f64) -> f64 {
        let f = &self.prior;
        let run = integrate_panels(|x| self.density(x) * 2.0 * f.cdf(x), tau, f.hi(), &self.breaks);
        let low = f.cdf(tau);
        run + c * low * low
    }

    /// Seller payoff when the auction runs iff both values are at least
    /// `tau`: `int_tau^hi 2 f(x) S(x) dx + c (1 - (1 - F(tau))^2)` where `S`
    /// is [`Surplus::tail`].
    pub fn pi2(&self, tau: f64, c: f64) -> f64 {
        let f = &self.prior;
        let run = integrate_panels(|x| 2.0 * f.pdf(x) * self.tail(x), tau, f.hi(), &self.breaks);
        let high = f.survival(tau);
        run + c * (1.0 - high * high)
    }

    /// Analytic derivative of [`Surplus::pi1`] in `tau`.
    pub fn pi1_derivative(&self, tau: f64, c: f64) -> f64 {
        2.0 * self.prior.cdf(tau) * self.prior.pdf(tau) * (c - self.virt.eval(tau).max(0.0))
    }
}

/// Seller payoff at threshold `tau` under `policy`.
pub fn seller_payoff(f: &Distribution, tau: f64, policy: Policy, c: f64, cfg: &NumericConfig) -> Result<f64> {
    check_threshold(f, tau)?;
    let s = Surplus::new(f, cfg);
    Ok(match policy {
        Policy::AnyH => s.pi1(tau, c),
        Policy::BothH => s.pi2(tau, c),
    })
}

/// Ex-ante expected utility of one bidder at threshold `tau` when every
/// auction is a second-price auction with reserve `max(tau, p_F)`.
///
/// By the envelope theorem `U(v) = int_R^v x(s) ds`, so the ex-ante value
/// is `int_R^hi x(s) (1 - F(s)) ds` with `x(s) = F(s)` under `AnyH` and
/// `F(s) - F(tau)` under `BothH`.
pub fn bidder_exante_utility(f: &Distribution, tau: f64, policy: Policy, cfg: &NumericConfig) -> Result<f64> {
    check_threshold(f, tau)?;
    let reserve = tau.max(monopoly_price(f, cfg).price);
    let floor = match policy {
        Policy::AnyH => 0.0,
        Policy::BothH => f.cdf(tau),
    };
    let mut breaks = f.pieces();
    breaks.push(reserve);
    Ok(integrate_panels(|s| (f.cdf(s) - floor) * f.survival(s), reserve, f.hi(), &breaks))
}

/// Seller's commitment benchmark: reserve `r*` with `phi(r*) = c`, auction
/// run iff some report exceeds it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FullCommitment {
    pub reserve: f64,
    pub payoff: f64,
}

/// Full-commitment reserve and payoff. Irregular priors use the ironed
/// virtual value in place of the raw one.
pub fn full_commitment(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<FullCommitment> {
    check_outside_option(f, c)?;
    let surplus = Surplus::new(f, cfg);
    let reserve = if regularity_violation(f, cfg).is_none() {
        r_star(f, c, cfg)?
    } else {
        surplus.virt.lower_preimage(c).unwrap_or(f.hi())
    };
    Ok(FullCommitment { reserve, payoff: surplus.pi1(reserve, c) })
}

/// One seller sequential-rationality inequality, written as `g(tau) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Constraint {
    /// `Rev(H,H) >= c`.
    RunHH,
    /// `Rev(H,L) >= c`.
    RunHL,
    /// `Rev(H,L) <= c`.
    SkipHL,
    /// `Rev(L,L) <= c`.
    SkipLL,
}

impl Constraint {
    pub fn profile(self) -> MessageProfile {
        match self {
            Constraint::RunHH => MessageProfile::HH,
            Constraint::RunHL | Constraint::SkipHL => MessageProfile::HL,
            Constraint::SkipLL => MessageProfile::LL,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Constraint::RunHH => "Rev(H,H) >= c",
            Constraint::RunHL => "Rev(H,L) >= c",
            Constraint::SkipHL => "Rev(H,L) <= c",
            Constraint::SkipLL => "Rev(L,L) <= c",
        }
    }

    fn slack(self, revenue: f64, c: f64) -> f64 {
        match self {
            Constraint::RunHH | Constraint::RunHL => revenue - c,
            Constraint::SkipHL | Constraint::SkipLL => c - revenue,
        }
    }
}

/// A refined zero of one constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Root {
    pub constraint: Constraint,
    pub tau: f64,
    /// `|Rev(tau) - c|` at the refined root.
    pub residual: f64,
}

/// What pins down an interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum Bound {
    /// Edge of the scanned threshold domain.
    Domain,
    Binding { constraint: Constraint, residual: f64 },
}

/// Closed interval of sustainable thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_bound: Bound,
    pub hi_bound: Bound,
}

impl Interval {
    pub fn contains(&self, tau: f64, tol: f64) -> bool {
        tau >= self.lo - tol && tau <= self.hi + tol
    }
}

/// Union of disjoint closed intervals, ascending, plus every constraint
/// root found while building it.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdSet {
    pub intervals: Vec<Interval>,
    pub roots: Vec<Root>,
}

impl ThresholdSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, tau: f64, tol: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(tau, tol))
    }

    pub fn lo(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn hi(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.hi)
    }

    pub fn root_count(&self, constraint: Constraint) -> usize {
        self.roots.iter().filter(|r| r.constraint == constraint).count()
    }

    /// Every endpoint together with what binds there.
    pub fn endpoints(&self) -> impl Iterator<Item = (f64, Bound)> + '_ {
        self.intervals.iter().flat_map(|i| [(i.lo, i.lo_bound), (i.hi, i.hi_bound)])
    }
}

/// Equilibrium class: mechanism regime plus the seller's run rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EquilibriumRegime {
    UnrestrictedBothH,
    RestrictedAnyH,
    RestrictedBothH,
}

impl EquilibriumRegime {
    pub fn policy(self) -> Policy {
        match self {
            EquilibriumRegime::RestrictedAnyH => Policy::AnyH,
            _ => Policy::BothH,
        }
    }

    pub fn mechanisms(self) -> Regime {
        match self {
            EquilibriumRegime::UnrestrictedBothH => Regime::Unrestricted,
            _ => Regime::CommonReserve,
        }
    }

    pub fn constraints(self) -> [Constraint; 3] {
        match self.policy() {
            Policy::AnyH => [Constraint::RunHH, Constraint::RunHL, Constraint::SkipLL],
            Policy::BothH => [Constraint::RunHH, Constraint::SkipHL, Constraint::SkipLL],
        }
    }
}

/// `Rev - c` at each profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Slacks {
    pub hh: f64,
    pub hl: f64,
    pub ll: f64,
}

impl Slacks {
    pub fn get(&self, profile: MessageProfile) -> f64 {
        match profile {
            MessageProfile::HH => self.hh,
            MessageProfile::HL => self.hl,
            MessageProfile::LL => self.ll,
        }
    }

    /// Whether every slack has the sign the run rule requires, within `tol`.
    pub fn consistent_with(&self, policy: Policy, tol: f64) -> bool {
        MessageProfile::ALL.iter().all(|&p| {
            let s = self.get(p);
            if policy.runs(p) {
                s >= -tol
            } else {
                s <= tol
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdEquilibrium {
    pub regime: EquilibriumRegime,
    pub tau: f64,
    /// `max(tau, p_F)`, the reserve of every auction run on path.
    pub on_path_reserve: f64,
    pub seller_payoff: f64,
    pub bidder_exante_utility: f64,
    pub slacks: Slacks,
    /// Set when a binding constraint had more than one root, so the
    /// selection among roots is not unique.
    pub multiple_roots: bool,
}

/// Payoffs and slacks of the threshold strategy `tau` under `regime`,
/// without checking that it is sustainable.
pub fn evaluate_threshold(
    f: &Distribution,
    c: f64,
    tau: f64,
    regime: EquilibriumRegime,
    cfg: &NumericConfig,
) -> Result<ThresholdEquilibrium> {
    check_outside_option(f, c)?;
    check_threshold(f, tau)?;
    let rev = |p| rev_profile(f, tau, p, regime.mechanisms(), cfg).map(|m| m.revenue - c);
    let slacks = Slacks { hh: rev(MessageProfile::HH)?, hl: rev(MessageProfile::HL)?, ll: rev(MessageProfile::LL)? };
    let policy = regime.policy();
    Ok(ThresholdEquilibrium {
        regime,
        tau,
        on_path_reserve: tau.max(monopoly_price(f, cfg).price),
        seller_payoff: seller_payoff(f, tau, policy, c, cfg)?,
        bidder_exante_utility: bidder_exante_utility(f, tau, policy, cfg)?,
        slacks,
        multiple_roots: false,
    })
}

/// Outcome of re-verifying an equilibrium at doubled resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquilibriumCheck {
    /// Largest change of any slack or payoff.
    pub max_drift: f64,
    pub signs_ok: bool,
    /// `on_path_reserve >= p_F`.
    pub reserve_ok: bool,
    pub passed: bool,
}

pub fn verify_equilibrium(
    f: &Distribution,
    c: f64,
    eq: &ThresholdEquilibrium,
    cfg: &NumericConfig,
) -> Result<EquilibriumCheck> {
    let fine = cfg.doubled();
    let again = evaluate_threshold(f, c, eq.tau, eq.regime, &fine)?;
    let max_drift = [
        eq.slacks.hh - again.slacks.hh,
        eq.slacks.hl - again.slacks.hl,
        eq.slacks.ll - again.slacks.ll,
        eq.seller_payoff - again.seller_payoff,
        eq.bidder_exante_utility - again.bidder_exante_utility,
    ]
    .iter()
    .fold(0.0_f64, |m, d| m.max(d.abs()));
    let signs_ok = again.slacks.consistent_with(eq.regime.policy(), SLACK_TOL);
    let reserve_ok = eq.on_path_reserve >= monopoly_price(f, &fine).price - 1e-9;
    Ok(EquilibriumCheck { max_drift, signs_ok, reserve_ok, passed: max_drift <= DRIFT_TOL && signs_ok && reserve_ok })
}

/// Profile revenues on a threshold grid under both regimes. They do not
/// depend on `c`, so one scanner serves a whole sweep over outside options.
#[derive(Debug, Clone)]
pub struct ThresholdScanner {
    prior: Distribution,
    cfg: NumericConfig,
    taus: Vec<f64>,
    common: [Vec<f64>; 3],
    myerson: [Vec<f64>; 3],
}

fn profile_index(p: MessageProfile) -> usize {
    match p {
        MessageProfile::HH => 0,
        MessageProfile::HL => 1,
        MessageProfile::LL => 2,
    }
}

impl ThresholdScanner {
    pub fn new(f: &Distribution, cfg: &NumericConfig) -> Result<Self> {
        cfg.validate()?;
        let margin = 1e-6 * (f.hi() - f.lo());
        let taus = linspace(f.lo() + margin, f.hi() - margin, cfg.scan_points);
        let curve = |p, regime| -> Result<Vec<f64>> {
            taus.iter().map(|&t| rev_profile(f, t, p, regime, cfg).map(|m| m.revenue)).collect()
        };
        use MessageProfile::*;
        Ok(ThresholdScanner {
            prior: f.clone(),
            cfg: *cfg,
            common: [curve(HH, Regime::CommonReserve)?, curve(HL, Regime::CommonReserve)?, curve(LL, Regime::CommonReserve)?],
            myerson: [curve(HH, Regime::Unrestricted)?, curve(HL, Regime::Unrestricted)?, curve(LL, Regime::Unrestricted)?],
            taus,
        })
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn config(&self) -> &NumericConfig {
        &self.cfg
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Revenue at `profile` on the scan grid.
    pub fn revenue_curve(&self, profile: MessageProfile, regime: Regime) -> &[f64] {
        match regime {
            Regime::CommonReserve => &self.common[profile_index(profile)],
            Regime::Unrestricted => &self.myerson[profile_index(profile)],
        }
    }

    fn revenue(&self, tau: f64, profile: MessageProfile, regime: Regime) -> f64 {
        rev_profile(&self.prior, tau, profile, regime, &self.cfg).map_or(f64::NAN, |m| m.revenue)
    }

    /// Thresholds satisfying every constraint in `constraints` at outside
    /// option `c`, with revenues from `regime`.
    pub fn feasible_set(&self, c: f64, regime: Regime, constraints: &[Constraint]) -> ThresholdSet {
        let n = self.taus.len();
        let slack_at = |k: Constraint, i: usize| k.slack(self.revenue_curve(k.profile(), regime)[i], c);
        let exact = |k: Constraint, t: f64| k.slack(self.revenue(t, k.profile(), regime), c);

        let mut roots = Vec::new();
        for &k in constraints {
            for i in 0..n - 1 {
                let (a, b) = (slack_at(k, i), slack_at(k, i + 1));
                if (a >= 0.0) == (b >= 0.0) {
                    continue;
                }
                let (ta, tb) = (self.taus[i], self.taus[i + 1]);
                let tau = find_root(|t| exact(k, t), ta, tb, self.cfg.root_tol * 1e-2)
                    .unwrap_or_else(|_| ta + (tb - ta) * a / (a - b));
                roots.push(Root { constraint: k, tau, residual: exact(k, tau).abs() });
            }
        }

        let mut cuts: Vec<(f64, Option<Root>)> = roots.iter().map(|r| (r.tau, Some(*r))).collect();
        cuts.push((self.taus[0], None));
        cuts.push((self.taus[n - 1], None));
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));

        let feasible_grid = |i: usize| constraints.iter().all(|&k| slack_at(k, i) >= 0.0);
        let mut intervals: Vec<Interval> = Vec::new();
        let mut open: Option<(f64, Bound)> = None;
        let bound_of = |cut: &(f64, Option<Root>)| match cut.1 {
            Some(r) => Bound::Binding { constraint: r.constraint, residual: r.residual },
            None => Bound::Domain,
        };
        for w in cuts.windows(2) {
            let (a, b) = (w[0].0, w[1].0);
            if !(b > a) {
                continue;
            }
            let inside = self.taus.partition_point(|&t| t <= a);
            let ok = if inside < n && self.taus[inside] < b {
                feasible_grid(inside)
            } else {
                let mid = 0.5 * (a + b);
                constraints.iter().all(|&k| exact(k, mid) >= 0.0)
            };
            match (ok, open) {
                (true, None) => open = Some((a, bound_of(&w[0]))),
                (false, Some((lo, lo_bound))) => {
                    intervals.push(Interval { lo, hi: a, lo_bound, hi_bound: bound_of(&w[0]) });
                    open = None;
                }
                _ => {}
            }
        }
        if let Some((lo, lo_bound)) = open {
            intervals.push(Interval { lo, hi: self.taus[n - 1], lo_bound, hi_bound: Bound::Domain });
        }
        roots.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        ThresholdSet { intervals, roots }
    }

    /// Thresholds sustainable when the seller may run any mechanism.
    pub fn unrestricted_set(&self, c: f64) -> ThresholdSet {
        self.feasible_set(c, Regime::Unrestricted, &EquilibriumRegime::UnrestrictedBothH.constraints())
    }

    /// Sustainable thresholds in the common-reserve regime, as
    /// `(AnyH, BothH)` sets.
    pub fn restricted_sets(&self, c: f64) -> (ThresholdSet, ThresholdSet) {
        (
            self.feasible_set(c, Regime::CommonReserve, &EquilibriumRegime::RestrictedAnyH.constraints()),
            self.feasible_set(c, Regime::CommonReserve, &EquilibriumRegime::RestrictedBothH.constraints()),
        )
    }
}

pub fn unrestricted_threshold_range(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<ThresholdSet> {
    check_outside_option(f, c)?;
    Ok(ThresholdScanner::new(f, cfg)?.unrestricted_set(c))
}

pub fn restricted_equilibrium_sets(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<(ThresholdSet, ThresholdSet)> {
    check_outside_option(f, c)?;
    Ok(ThresholdScanner::new(f, cfg)?.restricted_sets(c))
}

/// Best threshold for the seller among the `AnyH` equilibria: the
/// commitment reserve when it is sustainable, otherwise the endpoint with
/// the highest payoff (where `Rev(L,L) = c` binds for single-peaked payoffs).
pub fn seller_optimal_in(
    f: &Distribution,
    c: f64,
    any_h: &ThresholdSet,
    cfg: &NumericConfig,
) -> Result<ThresholdEquilibrium> {
    if any_h.is_empty() {
        return Err(Error::NoEquilibrium(format!("no AnyH threshold is sustainable at c = {c}")));
    }
    let commit = full_commitment(f, c, cfg)?;
    let regime = EquilibriumRegime::RestrictedAnyH;
    let tau = if commit.reserve > f.lo() && commit.reserve < f.hi() && any_h.contains(commit.reserve, 1e-12) {
        commit.reserve
    } else {
        let surplus = Surplus::new(f, cfg);
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for (t, _) in any_h.endpoints() {
            let v = surplus.pi1(t, c);
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    };
    let mut eq = evaluate_threshold(f, c, tau, regime, cfg)?;
    eq.multiple_roots = any_h.root_count(Constraint::SkipLL) > 1;
    Ok(eq)
}

/// Best threshold for the bidders among the `AnyH` equilibria: the
/// smallest threshold at which `Rev(H,L) = c` binds.
pub fn bidder_optimal_in(
    f: &Distribution,
    c: f64,
    any_h: &ThresholdSet,
    cfg: &NumericConfig,
) -> Result<ThresholdEquilibrium> {
    let tau = any_h
        .endpoints()
        .find(|(_, b)| matches!(b, Bound::Binding { constraint: Constraint::RunHL, .. }))
        .map(|(t, _)| t)
        .ok_or_else(|| Error::NoEquilibrium(format!("Rev(H,L) = c has no sustainable root at c = {c}")))?;
    let mut eq = evaluate_threshold(f, c, tau, EquilibriumRegime::RestrictedAnyH, cfg)?;
    eq.multiple_roots = any_h.root_count(Constraint::RunHL) > 1;
    Ok(eq)
}

pub fn seller_optimal_restricted(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<ThresholdEquilibrium> {
    let (any_h, _) = restricted_equilibrium_sets(f, c, cfg)?;
    seller_optimal_in(f, c, &any_h, cfg)
}

pub fn bidder_optimal_restricted(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<ThresholdEquilibrium> {
    let (any_h, _) = restricted_equilibrium_sets(f, c, cfg)?;
    bidder_optimal_in(f, c, &any_h, cfg)
}

/// Threshold in `set` maximizing the `BothH` payoff.
fn best_both_h(f: &Distribution, c: f64, set: &ThresholdSet, cfg: &NumericConfig) -> Option<(f64, f64)> {
    let surplus = Surplus::new(f, cfg);
    set.intervals
        .iter()
        .map(|i| maximize(|t| surplus.pi2(t, c), i.lo, i.hi, cfg.root_tol))
        .fold(None, |acc: Option<(f64, f64)>, x| match acc {
            Some(a) if a.1 >= x.1 => Some(a),
            _ => Some(x),
        })
}

/// Everything [`analyze`] computes for one instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeReport {
    pub outside_option: f64,
    pub monopoly: MonopolyPrice,
    pub regular: bool,
    pub full_commitment: FullCommitment,
    /// Optimal auction with no communication, reported on its own.
    pub babbling: MechanismSummary,
    pub unrestricted: ThresholdSet,
    /// Seller-best sustainable threshold in the unrestricted regime.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub unrestricted_best: Option<ThresholdEquilibrium>,
    /// Full-commitment payoff minus the best unrestricted equilibrium payoff.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub commitment_gap: Option<f64>,
    pub restricted_any_h: ThresholdSet,
    pub restricted_both_h: ThresholdSet,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub seller_optimal: Option<ThresholdEquilibrium>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub bidder_optimal: Option<ThresholdEquilibrium>,
    /// Auction and no-trade probabilities at the seller-optimal threshold.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub probabilities: Option<Probabilities>,
    pub notes: Vec<String>,
}

pub fn analyze(f: &Distribution, c: f64, cfg: &NumericConfig) -> Result<RegimeReport> {
    check_outside_option(f, c)?;
    analyze_with(&ThresholdScanner::new(f, cfg)?, c)
}

/// [`analyze`] reusing precomputed revenue curves.
pub fn analyze_with(scanner: &ThresholdScanner, c: f64) -> Result<RegimeReport> {
    let f = scanner.prior();
    let cfg = scanner.config();
    check_outside_option(f, c)?;
    let mut notes = Vec::new();

    let prior = full_posterior(f);
    let myerson = myerson_revenue(&prior, &prior, cfg);
    let babbling = MechanismSummary {
        kind: MechanismKind::MyersonOptimal { reserves: myerson.reserves },
        revenue: myerson.revenue,
        excluded: None,
    };
    let full = full_commitment(f, c, cfg)?;

    let unrestricted = scanner.unrestricted_set(c);
    let mut unrestricted_best = None;
    let mut commitment_gap = None;
    if let Some((tau, _)) = best_both_h(f, c, &unrestricted, cfg) {
        let eq = evaluate_threshold(f, c, tau, EquilibriumRegime::UnrestrictedBothH, cfg)?;
        commitment_gap = Some(full.payoff - eq.seller_payoff);
        unrestricted_best = Some(eq);
    } else if babbling.revenue >= c {
        notes.push(format!(
            "no threshold is sustainable without commitment, yet the babbling auction earns {} >= c",
            babbling.revenue
        ));
    }

    let (any_h, both_h) = scanner.restricted_sets(c);
    let seller_optimal = match seller_optimal_in(f, c, &any_h, cfg) {
        Ok(eq) => Some(eq),
        Err(e) => {
            notes.push(format!("seller-optimal threshold: {e}"));
            None
        }
    };
    let bidder_optimal = match bidder_optimal_in(f, c, &any_h, cfg) {
        Ok(eq) => Some(eq),
        Err(e) => {
            notes.push(format!("bidder-optimal threshold: {e}"));
            None
        }
    };
    let probabilities = match &seller_optimal {
        Some(eq) => Some(probabilities(f, eq.tau, Policy::AnyH, cfg)?),
        None => None,
    };
    for eq in seller_optimal.iter().chain(&bidder_optimal) {
        if eq.multiple_roots {
            notes.push(format!("threshold {} selected among several roots of its binding constraint", eq.tau));
        }
    }

    Ok(RegimeReport {
        outside_option: c,
        monopoly: monopoly_price(f, cfg),
        regular: regularity_violation(f, cfg).is_none(),
        full_commitment: full,
        babbling,
        unrestricted,
        unrestricted_best,
        commitment_gap,
        restricted_any_h: any_h,
        restricted_both_h: both_h,
        seller_optimal,
        bidder_optimal,
        probabilities,
        notes,
    })
}
