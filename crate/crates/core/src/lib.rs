//! Equilibrium analysis for pre-auction cheap talk games with a seller who
//! cannot commit across periods.
//!
//! Two symmetric bidders with private values drawn from a common
//! distribution send a binary message (`H` when their value is at least a
//! threshold `tau`, `L` otherwise). After seeing the message profile the
//! seller either takes an outside option `c` or runs a mechanism against the
//! induced posteriors. The crate computes
//!
//! * optimal-auction primitives: virtual values, monopoly prices, ironing
//!   ([`dist`], [`iron`]),
//! * revenue of posted prices, second-price auctions with a common reserve
//!   and Myerson-optimal auctions on posteriors ([`mechanisms`]),
//! * sustainable thresholds under the unrestricted and common-reserve
//!   regimes together with seller- and bidder-optimal thresholds
//!   ([`equilibria`]),
//! * comparative statics in `c` ([`statics`]) and the robustness scalars of
//!   the entry-cost and lying-cost perturbations ([`perturbations`]),
//! * a seeded Monte Carlo engine and brute-force deviation oracles that
//!   certify the analytic results ([`sim`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the multi-threaded simulation driver live in the `preauction` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dist;
pub mod equilibria;
pub mod error;
pub mod iron;
pub mod mechanisms;
pub mod numeric;
pub mod perturbations;
pub mod sim;
pub mod statics;

pub use dist::{Distribution, Posterior, ValueDistribution};
pub use equilibria::{RegimeReport, ThresholdEquilibrium};
pub use error::{Error, Result};
pub use iron::IronedVirtual;
pub use mechanisms::{MechanismSummary, MessageProfile, Regime};
pub use numeric::NumericConfig;

/// Seller run rule on the message profiles of a threshold strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Policy {
    /// Run the auction iff at least one bidder reports `H`.
    AnyH,
    /// Run the auction iff both bidders report `H`.
    BothH,
}

impl Policy {
    /// Whether the seller runs a mechanism at `profile`.
    pub fn runs(self, profile: MessageProfile) -> bool {
        match (self, profile) {
            (_, MessageProfile::HH) => true,
            (Policy::AnyH, MessageProfile::HL) => true,
            _ => false,
        }
    }
}
