//! Key generation rates per sent signal pulse, their small-decoy
//! limits, and worst-case rates under uncontrolled source intensities.
//!
//! The improved rate credits single photons with
//! `(c + b) * (1 - h(b / (c + b)))` where `b` and `c` estimate the
//! single-photon detections with and without a phase error; the
//! conventional rate uses `a * (1 - h(b / a))` with the plain detection
//! estimate. Both subtract the error-correction cost
//! `p_s * eta * h(e_s)` measured on the signal pulse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_controlled, estimate_from_observables, SinglePhotonEstimates,
};
use crate::model::{ChannelParams, IntensitySpec};
use crate::optimize::{minimize_rectangle, Certificate, OptimizeConfig, RectOptimum, Rectangle};
use crate::scalar::{as_f64, cast, Scalar};

/// Slack allowed on the multi-photon fraction before it counts as
/// negative; absorbs round-off in `exp(mu) * exp(-mu)`-type terms.
const MULTI_PHOTON_SLACK: f64 = 1e-12;

/// Binary entropy `-x log2 x - (1 - x) log2 (1 - x)` with
/// `0 log2 0 = 0`.
pub fn binary_entropy<T: Scalar>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::EntropyDomain(as_f64(x)));
    }
    Ok(entropy_unchecked(x))
}

fn entropy_unchecked<T: Scalar>(x: T) -> T {
    if x == T::zero() || x == T::one() {
        return T::zero();
    }
    let y = T::one() - x;
    -(x * x.log2()) - y * y.log2()
}

/// Single-photon key term `total * (1 - h(err / total))` with the
/// clamp convention: a ratio of at least 1/2 (or an empty total)
/// contributes nothing and raises the clamp flag.
fn clamped_key_term<T: Scalar>(total: T, err: T) -> (T, T, bool) {
    let half = cast(0.5);
    let ratio = if total > T::zero() { err / total } else { half };
    if ratio < half {
        (total * (T::one() - entropy_unchecked(ratio)), ratio, false)
    } else {
        (T::zero(), ratio, true)
    }
}

/// The two single-photon key terms derived from one estimate set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyTerms<T> {
    /// `(c + b) * (1 - h(b / (c + b)))`, clamped to zero at ratio >= 1/2.
    pub improved: T,
    /// `a * (1 - h(b / a))`, clamped to zero at ratio >= 1/2.
    pub conventional: T,
    /// Phase-error ratio `b / (c + b)` of the improved term.
    pub ratio_improved: T,
    /// Phase-error ratio `b / a` of the conventional term.
    pub ratio_conventional: T,
    /// True when either term was clamped.
    pub clamped: bool,
}

/// Computes both key terms from a set of single-photon estimates.
pub fn key_terms<T: Scalar>(est: &SinglePhotonEstimates<T>) -> KeyTerms<T> {
    let (improved, ratio_improved, clamp_i) =
        clamped_key_term(est.improved_total(), est.phase_error);
    let (conventional, ratio_conventional, clamp_c) =
        clamped_key_term(est.detection, est.phase_error);
    KeyTerms {
        improved,
        conventional,
        ratio_improved,
        ratio_conventional,
        clamped: clamp_i || clamp_c,
    }
}

/// Secure-key fraction per received matched-basis pulse.
///
/// `single_photon_rate` and `phase_error_rate` play the roles of the
/// single-photon detection rate and its phase-error fraction;
/// `p_s_plus` and `e_s_plus` are the measured signal detection rate and
/// bit error fraction. The result may be negative.
#[allow(clippy::too_many_arguments)]
pub fn gllp_rate<T: Scalar>(
    p0: T,
    single_photon_rate: T,
    phase_error_rate: T,
    mu_s: T,
    p_s_plus: T,
    e_s_plus: T,
    eta: T,
) -> Result<T> {
    if !(mu_s > T::zero()) {
        return Err(Error::NonPositiveIntensity(as_f64(mu_s)));
    }
    if !(p_s_plus > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "signal detection rate must be positive, got {}",
            as_f64(p_s_plus)
        )));
    }
    let h_phase = binary_entropy(phase_error_rate)?;
    let h_bit = binary_entropy(e_s_plus)?;
    let damp = (-mu_s).exp();
    let multi_photon = T::one() - (p0 + single_photon_rate * mu_s) * damp / p_s_plus;
    if multi_photon < -cast::<T>(MULTI_PHOTON_SLACK) {
        return Err(Error::NegativeMultiPhotonFraction {
            r: as_f64(multi_photon),
        });
    }
    Ok((p0 + single_photon_rate * mu_s * (T::one() - h_phase)) * damp / p_s_plus - eta * h_bit)
}

/// Key rates per sent signal pulse with all intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport<T> {
    /// Improved rate, from the error-split single-photon estimates.
    pub rate_improved: T,
    /// Conventional rate, from the plain detection estimate.
    pub rate_conventional: T,
    /// The single-photon estimates behind both rates.
    pub estimates: SinglePhotonEstimates<T>,
    /// Phase-error ratio of the improved rate.
    pub phase_error_ratio: T,
    /// Phase-error ratio of the conventional rate.
    pub phase_error_ratio_conventional: T,
    /// True when an entropy argument reached 1/2 and the single-photon
    /// contribution was dropped.
    pub clamped: bool,
}

fn report_from_estimates<T: Scalar>(
    params: &ChannelParams<T>,
    prefactor_mu_s: T,
    obs_signal_p: T,
    obs_signal_e: T,
    est: SinglePhotonEstimates<T>,
) -> RateReport<T> {
    let terms = key_terms(&est);
    let damp = (-prefactor_mu_s).exp();
    let ec_cost = obs_signal_p * params.eta_ec * entropy_unchecked(obs_signal_e);
    let base = damp * params.p0 - ec_cost;
    RateReport {
        rate_improved: prefactor_mu_s * damp * terms.improved + base,
        rate_conventional: prefactor_mu_s * damp * terms.conventional + base,
        estimates: est,
        phase_error_ratio: terms.ratio_improved,
        phase_error_ratio_conventional: terms.ratio_conventional,
        clamped: terms.clamped,
    }
}

/// Both key rates at controlled intensities, with intermediates.
pub fn rate_report<T: Scalar>(params: &ChannelParams<T>, mu_s: T, mu_d: T) -> Result<RateReport<T>> {
    for mu in [mu_s, mu_d] {
        if !(mu > T::zero()) {
            return Err(Error::NonPositiveIntensity(as_f64(mu)));
        }
    }
    if mu_s == mu_d {
        return Err(Error::EqualIntensities(as_f64(mu_s)));
    }
    let est = estimate_controlled(params, mu_s.min(mu_d), mu_s.max(mu_d))?;
    let obs_s = params.observables(mu_s)?;
    Ok(report_from_estimates(
        params,
        mu_s,
        obs_s.p_plus,
        obs_s.e_plus,
        est,
    ))
}

/// Improved key rate at controlled intensities.
pub fn rate_improved<T: Scalar>(params: &ChannelParams<T>, mu_s: T, mu_d: T) -> Result<T> {
    Ok(rate_report(params, mu_s, mu_d)?.rate_improved)
}

/// Conventional key rate at controlled intensities.
pub fn rate_conventional<T: Scalar>(params: &ChannelParams<T>, mu_s: T, mu_d: T) -> Result<T> {
    Ok(rate_report(params, mu_s, mu_d)?.rate_conventional)
}

fn limit_rate_core<T: Scalar>(params: &ChannelParams<T>, mu_s_nominal: T, epsilon: T) -> Result<T> {
    let scaled_alpha = params.alpha / (T::one() + epsilon);
    let (term, _, _) = clamped_key_term(
        scaled_alpha + params.p0,
        params.s * scaled_alpha + params.p0 / cast(2.0),
    );
    let prefactor = (T::one() - epsilon) * mu_s_nominal;
    let damp = (-prefactor).exp();
    let obs = params.observables(mu_s_nominal)?;
    Ok(prefactor * damp * term + damp * params.p0
        - obs.p_plus * params.eta_ec * entropy_unchecked(obs.e_plus))
}

/// Common limit of both rates as the decoy intensity tends to zero,
/// where the single-photon rates are estimated exactly.
pub fn rate_decoy_zero_limit<T: Scalar>(params: &ChannelParams<T>, mu_s: T) -> Result<T> {
    limit_rate_core(params, mu_s, T::zero())
}

/// A signal/decoy intensity pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityPair<T> {
    /// Signal intensity (mean photon number).
    pub signal: T,
    /// Decoy intensity (mean photon number).
    pub decoy: T,
}

/// Key rates when the estimation formulas assume `hypothesis`
/// intensities while the physics ran at `actual` ones.
///
/// Observables (including the error-correction cost) come from the
/// actual intensities; the estimation formulas and the Poisson
/// prefactors use the hypothesis values, which is what an observer who
/// believes the hypothesis would compute.
pub fn rate_uncontrolled_report<T: Scalar>(
    params: &ChannelParams<T>,
    hypothesis: IntensityPair<T>,
    actual: IntensityPair<T>,
) -> Result<RateReport<T>> {
    let obs_d = params.observables(actual.decoy)?;
    let obs_s = params.observables(actual.signal)?;
    let est = estimate_from_observables(
        &obs_d,
        &obs_s,
        hypothesis.decoy,
        hypothesis.signal,
        params.p0,
    )?;
    Ok(report_from_estimates(
        params,
        hypothesis.signal,
        obs_s.p_plus,
        obs_s.e_plus,
        est,
    ))
}

/// Improved and conventional uncontrolled-intensity rates.
pub fn rate_uncontrolled<T: Scalar>(
    params: &ChannelParams<T>,
    hypothesis: IntensityPair<T>,
    actual: IntensityPair<T>,
) -> Result<(T, T)> {
    let report = rate_uncontrolled_report(params, hypothesis, actual)?;
    Ok((report.rate_improved, report.rate_conventional))
}

/// Worst-case rates over the hypothesis rectangle, with the minimizers
/// that achieve them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseReport<T> {
    /// Minimum of the improved rate and its minimizer.
    pub improved: RectOptimum<T>,
    /// Minimum of the conventional rate and its minimizer.
    pub conventional: RectOptimum<T>,
    /// Full report at the improved-rate minimizer.
    pub minimizer_report: RateReport<T>,
}

/// Minimizes both uncontrolled rates over all hypothesis intensities
/// consistent with the uncertainty intervals, with the true intensities
/// at their nominal values.
pub fn rate_worst_case<T: Scalar>(
    params: &ChannelParams<T>,
    spec: &IntensitySpec<T>,
    cfg: &OptimizeConfig<T>,
) -> Result<WorstCaseReport<T>> {
    let spec = IntensitySpec::new(spec.mu_s, spec.mu_d, spec.epsilon)?;
    let actual = IntensityPair {
        signal: spec.mu_s,
        decoy: spec.mu_d,
    };
    if spec.epsilon == T::zero() {
        let report = rate_uncontrolled_report(params, actual, actual)?;
        let point = |value| RectOptimum {
            signal: spec.mu_s,
            decoy: spec.mu_d,
            value,
            certificate: Certificate::Corner,
        };
        return Ok(WorstCaseReport {
            improved: point(report.rate_improved),
            conventional: point(report.rate_conventional),
            minimizer_report: report,
        });
    }
    let rect = Rectangle::from_spec(&spec)?;
    let eval = |signal, decoy| {
        rate_uncontrolled(params, IntensityPair { signal, decoy }, actual)
            .expect("hypothesis rectangle stays off the equal-intensity diagonal")
    };
    let improved = minimize_rectangle(|ms, md| eval(ms, md).0, &rect, cfg)?;
    let conventional = minimize_rectangle(|ms, md| eval(ms, md).1, &rect, cfg)?;
    let minimizer_report = rate_uncontrolled_report(
        params,
        IntensityPair {
            signal: improved.signal,
            decoy: improved.decoy,
        },
        actual,
    )?;
    Ok(WorstCaseReport {
        improved,
        conventional,
        minimizer_report,
    })
}

fn validate_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if !(epsilon >= T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {}",
            as_f64(epsilon)
        )));
    }
    Ok(())
}

/// The single-photon key coefficient of the infinitesimal-decoy closed
/// form: `(alpha' + p0) * (1 - h((s alpha' + p0/2) / (alpha' + p0)))`
/// with `alpha' = alpha / (1 + epsilon)`, clamped to zero like every
/// other key term.
pub(crate) fn limit_key_coefficient<T: Scalar>(params: &ChannelParams<T>, epsilon: T) -> Result<T> {
    validate_epsilon(epsilon)?;
    let scaled_alpha = params.alpha / (T::one() + epsilon);
    let (term, _, _) = clamped_key_term(
        scaled_alpha + params.p0,
        params.s * scaled_alpha + params.p0 / cast(2.0),
    );
    Ok(term)
}

/// Largest nominal signal intensity for which the infinitesimal-decoy
/// closed form applies; may be `-inf` when dark counts swamp the
/// single-photon credit.
pub fn decoy_zero_signal_bound<T: Scalar>(params: &ChannelParams<T>, epsilon: T) -> Result<T> {
    validate_epsilon(epsilon)?;
    let one_plus = T::one() + epsilon;
    if params.p0 == T::zero() {
        return Ok(T::one() / one_plus);
    }
    let coefficient = limit_key_coefficient(params, epsilon)?;
    if !(coefficient > T::zero()) {
        return Ok(T::neg_infinity());
    }
    Ok((T::one() - params.p0 / coefficient) / one_plus)
}

/// Whether the nominal signal intensity satisfies the feasibility bound
/// of the infinitesimal-decoy closed form, i.e. whether
/// `mu * exp(-mu)`-type prefactors are still increasing across the
/// whole hypothesis interval.
pub fn decoy_zero_condition<T: Scalar>(
    params: &ChannelParams<T>,
    mu_s_nominal: T,
    epsilon: T,
) -> Result<bool> {
    if !(mu_s_nominal > T::zero()) {
        return Err(Error::NonPositiveIntensity(as_f64(mu_s_nominal)));
    }
    Ok(mu_s_nominal <= decoy_zero_signal_bound(params, epsilon)?)
}

/// Closed form of the worst-case rate in the limit of an infinitesimal
/// nominal decoy intensity.
///
/// Both the improved and the conventional worst-case rates share this
/// limit. The minimizing hypothesis sits at the low end of the signal
/// interval, which is what the feasibility condition guarantees; the
/// observables are taken at the nominal signal intensity.
pub fn rate_worst_case_decoy_zero<T: Scalar>(
    params: &ChannelParams<T>,
    mu_s_nominal: T,
    epsilon: T,
) -> Result<T> {
    if !decoy_zero_condition(params, mu_s_nominal, epsilon)? {
        return Err(Error::LimitConditionViolated {
            value: as_f64(mu_s_nominal),
            bound: as_f64(decoy_zero_signal_bound(params, epsilon)?),
        });
    }
    limit_rate_core(params, mu_s_nominal, epsilon)
}
