//! Asymptotic secure-key rates for decoy-state BB84 with a single decoy
//! intensity plus the vacuum pulse.
//!
//! The crate models a lossy channel with dark counts, bounds the
//! single-photon detection and phase-error rates from two pulse
//! intensities, and turns those bounds into key generation rates:
//!
//! * [`model`] — channel parameters and the observables they generate,
//! * [`estimators`] — single-photon rate estimates (direct closed forms
//!   and numerically stable series for small intensities),
//! * [`rates`] — key rates per sent signal pulse, their small-decoy
//!   limits, and worst-case rates when the source intensities are only
//!   known up to a relative uncertainty,
//! * [`optimize`] — rectangle minimax search and bounded scalar
//!   maximization over intensities,
//! * [`verify`] — numerical checks of the monotonicity and limit
//!   properties the rate formulas rely on.
//!
//! All numeric code is generic over the scalar type through the
//! [`Scalar`] trait; the type aliases at the crate root fix `f64`, which
//! is what the command-line frontend and the verification suite use.

pub mod error;
pub mod estimators;
pub mod grid;
pub mod model;
pub mod optimize;
pub mod rates;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use estimators::{SeriesConfig, SinglePhotonEstimates};
pub use model::{ChannelParams, IntensitySpec, PulseObservables};
pub use optimize::{Certificate, OptimizeConfig, RectOptimum, ScalarOptimum};
pub use rates::{IntensityPair, RateReport, WorstCaseReport};
pub use verify::CheckResult;

/// Channel parameters over `f64`.
pub type ChannelParams64 = ChannelParams<f64>;
/// Pulse observables over `f64`.
pub type PulseObservables64 = PulseObservables<f64>;
/// Intensity specification over `f64`.
pub type IntensitySpec64 = IntensitySpec<f64>;
/// Single-photon estimates over `f64`.
pub type SinglePhotonEstimates64 = SinglePhotonEstimates<f64>;
/// Series evaluation settings over `f64`.
pub type SeriesConfig64 = SeriesConfig<f64>;
/// Key-rate report over `f64`.
pub type RateReport64 = RateReport<f64>;
/// Worst-case rate report over `f64`.
pub type WorstCaseReport64 = WorstCaseReport<f64>;
/// Optimizer settings over `f64`.
pub type OptimizeConfig64 = OptimizeConfig<f64>;
/// Scalar optimum over `f64`.
pub type ScalarOptimum64 = ScalarOptimum<f64>;
/// Rectangle optimum over `f64`.
pub type RectOptimum64 = RectOptimum<f64>;
