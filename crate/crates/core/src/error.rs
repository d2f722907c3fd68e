//! Error type shared by the whole crate.

/// Errors produced by domain validation and numerical preconditions.
///
/// Scalar payloads are carried as `f64` regardless of the working
/// precision so that messages stay uniform.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor argument violates a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An intensity that must be strictly positive is not.
    #[error("intensity must be positive (got {0})")]
    NonPositiveIntensity(f64),

    /// Two-intensity estimators need strictly ordered positive intensities.
    #[error("intensities must satisfy 0 < low < high (got low = {low}, high = {high})")]
    IntensityOrder { low: f64, high: f64 },

    /// Signal and decoy intensities coincide, so nothing can be estimated.
    #[error("signal and decoy intensities are both {0}; the decoy method does not work")]
    EqualIntensities(f64),

    /// The uncertainty intervals of the two intensities overlap.
    #[error(
        "intensity intervals overlap (signal {signal} and decoy {decoy} with relative \
         uncertainty {epsilon}); the decoy method does not work"
    )]
    IndistinguishableIntensities {
        signal: f64,
        decoy: f64,
        epsilon: f64,
    },

    /// Binary entropy argument outside `[0, 1]`.
    #[error("binary entropy argument {0} is outside [0, 1]")]
    EntropyDomain(f64),

    /// The claimed single-photon plus vacuum contribution exceeds the
    /// detection rate, i.e. the multi-photon fraction would be negative.
    #[error("multi-photon fraction is negative (r = {r}); inputs are inconsistent")]
    NegativeMultiPhotonFraction { r: f64 },

    /// A truncated series cannot reach the required accuracy.
    #[error(
        "series truncated at order {order} is not accurate enough: \
         tail bound {tail_bound:e} exceeds {limit:e}; increase the truncation order"
    )]
    SeriesTruncation {
        order: usize,
        tail_bound: f64,
        limit: f64,
    },

    /// A minimax rectangle touches the line of equal intensities.
    #[error(
        "search rectangle crosses the equal-intensity diagonal \
         (signal [{signal_lo}, {signal_hi}], decoy [{decoy_lo}, {decoy_hi}])"
    )]
    RectangleOnDiagonal {
        signal_lo: f64,
        signal_hi: f64,
        decoy_lo: f64,
        decoy_hi: f64,
    },

    /// The closed form for the infinitesimal-decoy worst case only holds
    /// below a signal-intensity bound, and the given intensity exceeds it.
    #[error(
        "the infinitesimal-decoy closed form requires the nominal signal intensity \
         to be at most {bound}; got {value}"
    )]
    LimitConditionViolated { value: f64, bound: f64 },

    /// No part of the requested search bracket satisfies the
    /// infinitesimal-decoy feasibility bound.
    #[error(
        "no feasible signal intensity in [{lo}, {hi}]: the infinitesimal-decoy \
         closed form requires the nominal signal intensity to be at most {bound}"
    )]
    EmptyBracket { lo: f64, hi: f64, bound: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
