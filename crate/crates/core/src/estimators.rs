//! Single-photon rate estimators from two pulse intensities plus vacuum.
//!
//! Three generic estimators act on measured phase-basis observables; the
//! model-specialized entry points feed them with [`ChannelParams`]
//! observables. Each quantity also has a series form with nonnegative
//! coefficients that stays accurate where the direct closed forms lose
//! precision (small low intensity, nearly equal intensities) and is
//! regular at a vanishing low intensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, PulseObservables};
use crate::scalar::{as_f64, cast, Scalar};

/// Absolute limit on the series truncation tail bound.
const TAIL_LIMIT: f64 = 1e-15;

/// Positive part `max(x, 0)`.
///
/// Applied once, at the very end of each estimator, never to
/// intermediate terms.
pub fn positive_part<T: Scalar>(x: T) -> T {
    x.max(T::zero())
}

/// Estimated single-photon rates.
///
/// `detection` bounds the total single-photon detection rate,
/// `phase_error` the rate of single-photon detections with a phase
/// error, and `phase_correct` the rate of those without one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePhotonEstimates<T> {
    /// Estimate of the single-photon detection rate.
    pub detection: T,
    /// Estimate of the single-photon phase-error rate.
    pub phase_error: T,
    /// Estimate of the single-photon no-phase-error rate.
    pub phase_correct: T,
}

impl<T: Scalar> SinglePhotonEstimates<T> {
    /// Detection-rate bound used by the improved rate formula:
    /// `phase_correct + phase_error`.
    pub fn improved_total(&self) -> T {
        self.phase_correct + self.phase_error
    }
}

/// Controls the series evaluation of the model-specialized estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig<T> {
    /// Highest series index kept.
    pub truncation_order: usize,
    /// Low intensity below which the series replaces the direct closed
    /// forms, which lose all significant digits as the low intensity
    /// tends to zero.
    pub switch_threshold: T,
}

impl<T: Scalar> Default for SeriesConfig<T> {
    fn default() -> Self {
        Self {
            truncation_order: 40,
            switch_threshold: cast(1e-2),
        }
    }
}

impl<T: Scalar> SeriesConfig<T> {
    /// Checks the configuration invariants.
    pub fn validate(&self) -> Result<()> {
        if self.truncation_order < 5 {
            return Err(Error::InvalidParameter(format!(
                "truncation_order must be at least 5, got {}",
                self.truncation_order
            )));
        }
        if !(self.switch_threshold > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "switch_threshold must be positive, got {}",
                as_f64(self.switch_threshold)
            )));
        }
        Ok(())
    }
}

fn check_ordered_pair<T: Scalar>(mu_low: T, mu_high: T) -> Result<()> {
    if !(mu_low > T::zero() && mu_low < mu_high) {
        return Err(Error::IntensityOrder {
            low: as_f64(mu_low),
            high: as_f64(mu_high),
        });
    }
    Ok(())
}

/// Estimates the single-photon detection rate from the phase-basis
/// detection rates `p_low`, `p_high` measured at intensities
/// `mu_low < mu_high`, with vacuum rate `p0`.
pub fn detection_rate_estimate<T: Scalar>(
    p_low: T,
    p_high: T,
    mu_low: T,
    mu_high: T,
    p0: T,
) -> Result<T> {
    check_ordered_pair(mu_low, mu_high)?;
    let numerator = mu_high * mu_high * mu_low.exp() * (p_low - p0 * (-mu_low).exp())
        - mu_low * mu_low * mu_high.exp() * (p_high - p0 * (-mu_high).exp());
    Ok(positive_part(
        numerator / (mu_low * mu_high * (mu_high - mu_low)),
    ))
}

/// Estimates the single-photon phase-error rate from the error product
/// `e * p` measured at the lower intensity `mu_low`.
pub fn phase_error_rate_estimate<T: Scalar>(error_product_low: T, mu_low: T, p0: T) -> Result<T> {
    if !(mu_low > T::zero()) {
        return Err(Error::NonPositiveIntensity(as_f64(mu_low)));
    }
    Ok(positive_part(
        (error_product_low * mu_low.exp() - p0 / cast(2.0)) / mu_low,
    ))
}

/// Estimates the single-photon no-phase-error rate from the correct
/// products `(1 - e) * p` measured at intensities `mu_low < mu_high`.
pub fn correct_rate_estimate<T: Scalar>(
    correct_low: T,
    correct_high: T,
    mu_low: T,
    mu_high: T,
    p0: T,
) -> Result<T> {
    check_ordered_pair(mu_low, mu_high)?;
    let half_p0 = p0 / cast(2.0);
    let numerator = mu_high * mu_high * mu_low.exp() * (correct_low - half_p0 * (-mu_low).exp())
        - mu_low * mu_low * mu_high.exp() * (correct_high - half_p0 * (-mu_high).exp());
    Ok(positive_part(
        numerator / (mu_low * mu_high * (mu_high - mu_low)),
    ))
}

/// Applies the decoy/signal case split to measured observables.
///
/// The smaller of the two hypothesis intensities supplies the one-pulse
/// phase-error estimate; the two-pulse estimates order their arguments
/// the same way. Swapping both the observables and the intensities
/// therefore yields identical estimates.
pub fn estimate_from_observables<T: Scalar>(
    obs_decoy: &PulseObservables<T>,
    obs_signal: &PulseObservables<T>,
    mu_decoy: T,
    mu_signal: T,
    p0: T,
) -> Result<SinglePhotonEstimates<T>> {
    for mu in [mu_decoy, mu_signal] {
        if !(mu > T::zero()) {
            return Err(Error::NonPositiveIntensity(as_f64(mu)));
        }
    }
    if mu_decoy == mu_signal {
        return Err(Error::EqualIntensities(as_f64(mu_decoy)));
    }
    let (lo, hi, mu_low, mu_high) = if mu_decoy < mu_signal {
        (obs_decoy, obs_signal, mu_decoy, mu_signal)
    } else {
        (obs_signal, obs_decoy, mu_signal, mu_decoy)
    };
    Ok(SinglePhotonEstimates {
        detection: detection_rate_estimate(lo.p_times, hi.p_times, mu_low, mu_high, p0)?,
        phase_error: phase_error_rate_estimate(lo.error_product_times(), mu_low, p0)?,
        phase_correct: correct_rate_estimate(
            lo.correct_product_times(),
            hi.correct_product_times(),
            mu_low,
            mu_high,
            p0,
        )?,
    })
}

/// Model-specialized estimates at controlled intensities
/// `0 < mu_low < mu_high`, with the default series settings.
pub fn estimate_controlled<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    mu_high: T,
) -> Result<SinglePhotonEstimates<T>> {
    estimate_controlled_with(params, mu_low, mu_high, &SeriesConfig::default())
}

/// Model-specialized estimates with explicit series settings.
///
/// Below `cfg.switch_threshold` the low intensity forces the series
/// forms; above it the closed forms are evaluated on model observables.
pub fn estimate_controlled_with<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    mu_high: T,
    cfg: &SeriesConfig<T>,
) -> Result<SinglePhotonEstimates<T>> {
    check_ordered_pair(mu_low, mu_high)?;
    cfg.validate()?;
    if mu_low < cfg.switch_threshold {
        Ok(SinglePhotonEstimates {
            detection: detection_rate_series(params, mu_low, mu_high, cfg)?,
            phase_error: phase_error_rate_series(params, mu_low, cfg)?,
            phase_correct: correct_rate_series(params, mu_low, mu_high, cfg)?,
        })
    } else {
        let lo = params.observables(mu_low)?;
        let hi = params.observables(mu_high)?;
        estimate_from_observables(&lo, &hi, mu_low, mu_high, params.p0)
    }
}

/// Exact limits of the three estimates as the low intensity tends to
/// zero: `(alpha + p0, s * alpha + p0 / 2, (1 - s) * alpha + p0 / 2)`.
pub fn decoy_zero_estimates<T: Scalar>(params: &ChannelParams<T>) -> SinglePhotonEstimates<T> {
    let half_p0 = params.p0 / cast(2.0);
    SinglePhotonEstimates {
        detection: params.alpha + params.p0,
        phase_error: params.s * params.alpha + half_p0,
        phase_correct: (T::one() - params.s) * params.alpha + half_p0,
    }
}

/// Series form of the single-photon detection-rate estimate.
///
/// Valid for `0 <= mu_low < mu_high`; exact at `mu_low = 0`, where it
/// reduces to the leading term `alpha + p0`.
pub fn detection_rate_series<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    mu_high: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    series_pair_checks(mu_low, mu_high, cfg)?;
    let (value, tail) = difference_series(
        params.alpha,
        T::one(),
        params.p0,
        mu_low,
        mu_high,
        cfg.truncation_order,
    );
    guard_tail(tail, cfg.truncation_order)?;
    Ok(positive_part(value))
}

/// Series form of the single-photon no-phase-error-rate estimate.
pub fn correct_rate_series<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    mu_high: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    series_pair_checks(mu_low, mu_high, cfg)?;
    let (value, tail) = difference_series(
        params.alpha,
        T::one() - params.s,
        params.p0 / cast(2.0),
        mu_low,
        mu_high,
        cfg.truncation_order,
    );
    guard_tail(tail, cfg.truncation_order)?;
    Ok(positive_part(value))
}

/// Series form of the single-photon phase-error-rate estimate.
///
/// All series coefficients are nonnegative, so the value increases with
/// the low intensity and equals `s * alpha + p0 / 2` at zero.
pub fn phase_error_rate_series<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    if !(mu_low >= T::zero()) {
        return Err(Error::NonPositiveIntensity(as_f64(mu_low)));
    }
    cfg.validate()?;
    let w = params.s;
    let q = params.p0 / cast(2.0);
    let beta = T::one() - params.alpha;
    let order = cfg.truncation_order;

    let mut sum = w * params.alpha + q;
    // running mu_low^(n-1) / n! and (1 - alpha)^n, starting at n = 2
    let mut weight = mu_low / cast(2.0);
    let mut beta_pow = beta * beta;
    for n in 2..=order {
        sum = sum + (w * (T::one() - beta_pow) + q) * weight;
        weight = weight * mu_low / cast((n + 1) as f64);
        beta_pow = beta_pow * beta;
    }

    // tail_{n > order} <= (w + q) * mu^order / (order+1)! * geometric
    let tail = single_tail_bound(w + q, mu_low, order);
    guard_tail(tail, order)?;
    Ok(positive_part(sum))
}

fn series_pair_checks<T: Scalar>(mu_low: T, mu_high: T, cfg: &SeriesConfig<T>) -> Result<()> {
    if !(mu_low >= T::zero() && mu_low < mu_high) {
        return Err(Error::IntensityOrder {
            low: as_f64(mu_low),
            high: as_f64(mu_high),
        });
    }
    cfg.validate()
}

fn guard_tail<T: Scalar>(tail: T, order: usize) -> Result<()> {
    if !(tail < cast(TAIL_LIMIT)) {
        return Err(Error::SeriesTruncation {
            order,
            tail_bound: as_f64(tail),
            limit: TAIL_LIMIT,
        });
    }
    Ok(())
}

/// Evaluates `w*alpha + q - sum_{n=3}^{order} c_n * S_n` where
/// `c_n = (w*(1-(1-alpha)^n) + q) / n!` and `S_n` is the sum of all
/// monomials `mu_low^(m+1) * mu_high^(n-2-m)`. Every term is
/// nonnegative, so no cancellation occurs for any `0 <= mu_low <=
/// mu_high`. Returns the value and a bound on the dropped tail.
fn difference_series<T: Scalar>(
    alpha: T,
    w: T,
    q: T,
    mu_low: T,
    mu_high: T,
    order: usize,
) -> (T, T) {
    let beta = T::one() - alpha;
    let product = mu_low * mu_high;

    let mut sum = T::zero();
    // h_k is the complete homogeneous symmetric polynomial of degree k
    // in (mu_low, mu_high); S_n = mu_low * mu_high * h_{n-3}
    let mut hom = T::one();
    let mut mu_low_pow = T::one();
    let mut inv_fact = cast::<T>(1.0 / 6.0);
    let mut beta_pow = beta * beta * beta;
    for n in 3..=order {
        let coeff = w * (T::one() - beta_pow) + q;
        sum = sum + coeff * inv_fact * product * hom;
        mu_low_pow = mu_low_pow * mu_low;
        hom = mu_high * hom + mu_low_pow;
        beta_pow = beta_pow * beta;
        inv_fact = inv_fact / cast((n + 1) as f64);
    }

    // tail_{n > order} <= (w + q) * sum_{k >= order} mu_high^k / k!
    let tail = single_tail_bound(w + q, mu_high, order);
    (w * alpha + q - sum, tail)
}

/// Geometric bound on `scale * sum_{k >= order} mu^k / k!`:
/// `scale * (mu^order / order!) / (1 - mu / (order + 1))`,
/// infinite when `mu >= order + 1`.
fn single_tail_bound<T: Scalar>(scale: T, mu: T, order: usize) -> T {
    if mu <= T::zero() {
        return T::zero();
    }
    let next = cast::<T>((order + 1) as f64);
    if mu >= next {
        return T::infinity();
    }
    let mut lead = T::one();
    for k in 1..=order {
        lead = lead * mu / cast(k as f64);
    }
    scale * lead / (T::one() - mu / next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChannelParams;

    fn params(alpha: f64, s: f64, p0: f64) -> ChannelParams<f64> {
        ChannelParams::new(alpha, s, p0, 1.0).unwrap()
    }

    #[test]
    fn positive_part_clamps() {
        assert_eq!(positive_part(-3.0), 0.0);
        assert_eq!(positive_part(0.0), 0.0);
        assert_eq!(positive_part(2.5), 2.5);
    }

    #[test]
    fn vacuum_only_observables_give_zero() {
        let p0 = 1e-3f64;
        let (m1, m2) = (0.1f64, 0.5f64);
        let a =
            detection_rate_estimate(p0 * (-m1).exp(), p0 * (-m2).exp(), m1, m2, p0).unwrap();
        assert_eq!(a, 0.0);
        let b = phase_error_rate_estimate((p0 / 2.0) * (-0.2f64).exp(), 0.2, p0).unwrap();
        assert!(b.abs() < 1e-17);
        let c = correct_rate_estimate(
            (p0 / 2.0) * (-m1).exp(),
            (p0 / 2.0) * (-m2).exp(),
            m1,
            m2,
            p0,
        )
        .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn zero_errors_give_zero_phase_error_estimate() {
        assert_eq!(phase_error_rate_estimate(0.0, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dead_channel_gives_zero_estimates() {
        let est = estimate_controlled(&params(0.0, 0.3, 0.0), 0.1, 0.5).unwrap();
        assert_eq!(est.detection, 0.0);
        assert_eq!(est.phase_error, 0.0);
        assert_eq!(est.phase_correct, 0.0);
    }

    #[test]
    fn lossless_channel_matches_reference() {
        // high-precision reference evaluation of the closed forms
        let est = estimate_controlled(&params(1.0, 0.0, 0.0), 0.1, 0.5).unwrap();
        assert!((est.detection - 0.9902758405955312367).abs() < 1e-15);
        assert_eq!(est.phase_error, 0.0);
        assert!((est.phase_correct - est.detection).abs() < 1e-15);
    }

    #[test]
    fn noisy_channel_phase_error_matches_reference() {
        let est = estimate_controlled(&params(0.5, 0.03, 1e-5), 0.1, 0.5).unwrap();
        assert!((est.phase_error - 0.01617520505579085792).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_intensity_order() {
        assert!(matches!(
            detection_rate_estimate(0.1, 0.2, 0.5, 0.1, 0.0),
            Err(Error::IntensityOrder { .. })
        ));
        assert!(detection_rate_estimate(0.1, 0.2, 0.0, 0.1, 0.0).is_err());
        assert!(phase_error_rate_estimate(0.1, 0.0, 0.0).is_err());
        assert!(estimate_controlled(&params(0.1, 0.05, 1e-5), 0.5, 0.5).is_err());
    }

    #[test]
    fn equal_intensities_are_rejected() {
        let p = params(0.1, 0.05, 1e-5);
        let o = p.observables(0.3).unwrap();
        assert!(matches!(
            estimate_from_observables(&o, &o, 0.3, 0.3, p.p0),
            Err(Error::EqualIntensities(_))
        ));
    }

    #[test]
    fn observable_estimates_match_controlled_path() {
        let p = params(0.1, 0.05, 1e-5);
        let (mu_d, mu_s) = (0.1, 0.5);
        let od = p.observables(mu_d).unwrap();
        let os = p.observables(mu_s).unwrap();
        let from_obs = estimate_from_observables(&od, &os, mu_d, mu_s, p.p0).unwrap();
        let controlled = estimate_controlled(&p, mu_d, mu_s).unwrap();
        assert_eq!(from_obs, controlled);
    }

    #[test]
    fn role_swap_gives_identical_estimates() {
        let p = params(0.1, 0.05, 1e-5);
        let od = p.observables(0.1).unwrap();
        let os = p.observables(0.5).unwrap();
        let normal = estimate_from_observables(&od, &os, 0.1, 0.5, p.p0).unwrap();
        let swapped = estimate_from_observables(&os, &od, 0.5, 0.1, p.p0).unwrap();
        assert_eq!(normal, swapped);
    }

    #[test]
    fn hypothesis_intensities_shift_estimates() {
        // observables from true intensities (0.1, 0.5), estimation with a
        // 5% too-high decoy hypothesis; reference values from a
        // high-precision evaluation of the same composition
        let p = params(0.1, 0.05, 1e-5);
        let od = p.observables(0.1).unwrap();
        let os = p.observables(0.5).unwrap();
        let est = estimate_from_observables(&od, &os, 0.105, 0.5, p.p0).unwrap();
        assert!((est.detection - 0.09049470273497603391).abs() < 1e-15);
        assert!((est.phase_error - 0.005268012519351362354).abs() < 1e-16);
        assert!((est.phase_correct - 0.08596551360171812753).abs() < 1e-15);
    }

    #[test]
    fn small_intensity_estimates_approach_limits() {
        let p = params(0.1, 0.05, 1e-5);
        let est = estimate_controlled(&p, 1e-8, 0.5).unwrap();
        let lim = decoy_zero_estimates(&p);
        assert!((est.detection - lim.detection).abs() < 1e-6);
        assert!((est.phase_error - lim.phase_error).abs() < 1e-6);
        assert!((est.phase_correct - lim.phase_correct).abs() < 1e-6);
        assert!((est.detection - 0.1000099997336271023).abs() < 1e-13);
    }

    #[test]
    fn decoy_zero_limits_are_closed_form() {
        let lim = decoy_zero_estimates(&params(0.1, 0.05, 1e-5));
        assert!((lim.detection - 0.10001).abs() < 1e-16);
        assert!((lim.phase_error - 0.005005).abs() < 1e-17);
        assert!((lim.phase_correct - 0.095005).abs() < 1e-16);
        let sum = lim.phase_error + lim.phase_correct;
        assert!((lim.detection - sum).abs() <= 2.0 * f64::EPSILON * lim.detection);

        let dead = decoy_zero_estimates(&params(0.0, 0.0, 0.0));
        assert_eq!(
            (dead.detection, dead.phase_error, dead.phase_correct),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn series_is_exact_at_zero_low_intensity() {
        let p = params(0.1, 0.05, 1e-5);
        let cfg = SeriesConfig::default();
        let lim = decoy_zero_estimates(&p);
        assert_eq!(
            detection_rate_series(&p, 0.0, 0.5, &cfg).unwrap(),
            lim.detection
        );
        assert_eq!(
            phase_error_rate_series(&p, 0.0, &cfg).unwrap(),
            lim.phase_error
        );
        assert_eq!(
            correct_rate_series(&p, 0.0, 0.5, &cfg).unwrap(),
            lim.phase_correct
        );
    }

    #[test]
    fn series_matches_direct_forms() {
        let p = params(1.0, 0.0, 0.0);
        let cfg = SeriesConfig {
            truncation_order: 30,
            switch_threshold: 1e-2,
        };
        let direct = estimate_controlled(&p, 0.1, 0.5).unwrap();
        let series = detection_rate_series(&p, 0.1, 0.5, &cfg).unwrap();
        assert!((series - direct.detection).abs() < 1e-12);
    }

    #[test]
    fn too_small_truncation_order_reports_tail_bound() {
        let p = params(0.1, 0.05, 1e-5);
        let cfg = SeriesConfig {
            truncation_order: 5,
            switch_threshold: 1e-2,
        };
        match detection_rate_series(&p, 1e-3, 1.0, &cfg) {
            Err(Error::SeriesTruncation {
                order, tail_bound, ..
            }) => {
                assert_eq!(order, 5);
                assert!(tail_bound > 1e-15);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn config_invariants_are_enforced() {
        assert!(SeriesConfig::<f64> {
            truncation_order: 4,
            switch_threshold: 1e-2,
        }
        .validate()
        .is_err());
        assert!(SeriesConfig::<f64> {
            truncation_order: 40,
            switch_threshold: 0.0,
        }
        .validate()
        .is_err());
    }

    #[test]
    fn estimates_work_in_single_precision() {
        let p = ChannelParams::<f32>::new(0.1, 0.05, 1e-5, 1.0).unwrap();
        let est = estimate_controlled(&p, 0.1, 0.5).unwrap();
        assert!((est.detection - 0.097263).abs() < 1e-4);
    }
}
