use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every model in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Pressure outside the tabulated range while extrapolation is disabled.
    #[error("pressure {pressure_pa} Pa is outside the calibrated range [{min_pa}, {max_pa}] Pa")]
    OutOfCalibratedRange {
        pressure_pa: f64,
        min_pa: f64,
        max_pa: f64,
    },

    /// Structurally invalid input (violated invariants, malformed data).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    /// The muscle path cannot be constructed for the requested configuration.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A regime-specific formula was asked to evaluate outside its regime.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("no zero crossing: {0}")]
    NoCrossing(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("plant instability: |omega| = {omega} rad/s exceeds {limit} rad/s")]
    Instability { omega: f64, limit: f64 },
}
