use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// |P| >= 1 where a strictly sub-unit polarization is required.
    #[error("polarization {0} is outside the open interval (-1, 1)")]
    OutOfRange(f64),

    /// Zero polarization corresponds to an infinite spin temperature.
    #[error("zero polarization: spin temperature is infinite")]
    InfiniteTemperature,

    #[error("indeterminate input: {0}")]
    Indeterminate(String),

    #[error("grid spacing {spacing:.6e} rad/s exceeds the nuclear Larmor frequency {larmor:.6e} rad/s")]
    Resolution { spacing: f64, larmor: f64 },

    #[error("no root: stationarity condition does not change sign on [{lo:.6e}, {hi:.6e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("underdetermined fit: {points} usable points for {params} parameters")]
    Underdetermined { points: usize, params: usize },

    #[error("fit failed: {reason}")]
    FitFailure { reason: String, iterations: usize, cost: f64 },

    /// The enhancement implies |P_n| >= 1; usually a referencing mistake.
    #[error("unphysical enhancement: derived nuclear polarization {0} has |P| >= 1")]
    UnphysicalEnhancement(f64),

    #[error("profile has no sign change, cannot locate a zero crossing")]
    NoCrossing,

    #[error("no data: every cell of the grid failed")]
    NoData,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn fit(reason: impl Into<String>, iterations: usize, cost: f64) -> Self {
        Error::FitFailure { reason: reason.into(), iterations, cost }
    }
}
