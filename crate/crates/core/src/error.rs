use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("value {value} outside support [{lo}, {hi}]")]
    OutOfSupport { value: f64, lo: f64, hi: f64 },

    #[error("truncation [{lo}, {hi}] carries no probability mass")]
    ZeroMass { lo: f64, hi: f64 },

    #[error("distribution is irregular (virtual value decreases near {at}); use the ironed machinery")]
    Irregular { at: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("entry subsidy factor is unbounded: F(tau) = 1")]
    InfiniteSubsidy,

    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
