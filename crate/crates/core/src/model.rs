//! Channel model: physical parameters and the observables they generate
//! in the absence of an eavesdropper.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{as_f64, cast, Scalar};

/// Physical channel and error-correction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams<T> {
    /// Total transmission probability for a single photon, detector
    /// efficiency included.
    pub alpha: T,
    /// Intrinsic optical error fraction of detected photons.
    pub s: T,
    /// Background (dark count) detection rate per pulse.
    pub p0: T,
    /// Error-correction efficiency factor; 1 is the Shannon limit,
    /// 1.1 a realistic code.
    pub eta_ec: T,
}

impl<T: Scalar> ChannelParams<T> {
    /// Validates and builds the parameter set.
    ///
    /// `alpha = 0` (a dead channel) is accepted: it is the natural
    /// degenerate case for limit checks even though no key can ever be
    /// generated through it.
    pub fn new(alpha: T, s: T, p0: T, eta_ec: T) -> Result<Self> {
        let zero = T::zero();
        let one = T::one();
        if !(alpha >= zero && alpha <= one) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                as_f64(alpha)
            )));
        }
        if !(s >= zero && s < cast(0.5)) {
            return Err(Error::InvalidParameter(format!(
                "s must lie in [0, 1/2), got {}",
                as_f64(s)
            )));
        }
        if !(p0 >= zero && p0 < one) {
            return Err(Error::InvalidParameter(format!(
                "p0 must lie in [0, 1), got {}",
                as_f64(p0)
            )));
        }
        if !(eta_ec >= one) {
            return Err(Error::InvalidParameter(format!(
                "eta_ec must be at least 1, got {}",
                as_f64(eta_ec)
            )));
        }
        Ok(Self {
            alpha,
            s,
            p0,
            eta_ec,
        })
    }

    /// Detection and error rates of a pulse with mean photon number `mu`
    /// when no eavesdropper acts on the channel.
    ///
    /// The detection rate is `1 - exp(-alpha * mu) + p0` in both bases,
    /// and the error product is `s * (1 - exp(-alpha * mu)) + p0 / 2`;
    /// dark counts are random, so half of them are errors.
    pub fn observables(&self, mu: T) -> Result<PulseObservables<T>> {
        if !(mu > T::zero()) {
            return Err(Error::NonPositiveIntensity(as_f64(mu)));
        }
        let signal_part = -(-self.alpha * mu).exp_m1();
        let p = signal_part + self.p0;
        let error_product = self.s * signal_part + self.p0 / cast(2.0);
        let e = error_fraction(error_product, p);
        Ok(PulseObservables {
            p_plus: p,
            p_times: p,
            e_plus: e,
            e_times: e,
        })
    }
}

/// Error fraction as the quotient of the error product by the detection
/// rate, with the random-outcome convention `e = 1/2` at zero rate.
pub(crate) fn error_fraction<T: Scalar>(error_product: T, rate: T) -> T {
    if rate > T::zero() {
        error_product / rate
    } else {
        cast(0.5)
    }
}

/// Measured detection and error rates for one pulse intensity.
///
/// `plus` is the bit basis (key generation), `times` the phase basis
/// (estimation). Under the no-eavesdropper model the two coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseObservables<T> {
    /// Bit-basis detection rate.
    pub p_plus: T,
    /// Phase-basis detection rate.
    pub p_times: T,
    /// Bit-basis error fraction.
    pub e_plus: T,
    /// Phase-basis error fraction.
    pub e_times: T,
}

impl<T: Scalar> PulseObservables<T> {
    /// Validates and builds the observable set.
    pub fn new(p_plus: T, p_times: T, e_plus: T, e_times: T) -> Result<Self> {
        for (name, v) in [
            ("p_plus", p_plus),
            ("p_times", p_times),
            ("e_plus", e_plus),
            ("e_times", e_times),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {}",
                    as_f64(v)
                )));
            }
        }
        Ok(Self {
            p_plus,
            p_times,
            e_plus,
            e_times,
        })
    }

    /// Phase-basis error product `e_times * p_times`.
    pub fn error_product_times(&self) -> T {
        self.e_times * self.p_times
    }

    /// Phase-basis correct product `(1 - e_times) * p_times`.
    pub fn correct_product_times(&self) -> T {
        (T::one() - self.e_times) * self.p_times
    }

    /// Bit-basis error product `e_plus * p_plus`.
    pub fn error_product_plus(&self) -> T {
        self.e_plus * self.p_plus
    }
}

/// Nominal signal and decoy intensities with their relative uncertainty.
///
/// The true intensities are only known to lie in
/// `[(1 - epsilon) * mu, (1 + epsilon) * mu]` around each nominal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensitySpec<T> {
    /// Nominal signal intensity (mean photon number).
    pub mu_s: T,
    /// Nominal decoy intensity (mean photon number).
    pub mu_d: T,
    /// Relative intensity uncertainty.
    pub epsilon: T,
}

impl<T: Scalar> IntensitySpec<T> {
    /// Validates and builds the intensity specification.
    ///
    /// The two uncertainty intervals must not overlap: otherwise the two
    /// kinds of pulses cannot be told apart and the decoy method does
    /// not work.
    pub fn new(mu_s: T, mu_d: T, epsilon: T) -> Result<Self> {
        if !(mu_s > T::zero()) {
            return Err(Error::NonPositiveIntensity(as_f64(mu_s)));
        }
        if !(mu_d > T::zero()) {
            return Err(Error::NonPositiveIntensity(as_f64(mu_d)));
        }
        if !(epsilon >= T::zero() && epsilon < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1), got {}",
                as_f64(epsilon)
            )));
        }
        let lo = mu_s.min(mu_d);
        let hi = mu_s.max(mu_d);
        if !((T::one() + epsilon) * lo < (T::one() - epsilon) * hi) {
            return Err(Error::IndistinguishableIntensities {
                signal: as_f64(mu_s),
                decoy: as_f64(mu_d),
                epsilon: as_f64(epsilon),
            });
        }
        Ok(Self {
            mu_s,
            mu_d,
            epsilon,
        })
    }

    /// Interval of possible true signal intensities.
    pub fn signal_interval(&self) -> (T, T) {
        let one = T::one();
        ((one - self.epsilon) * self.mu_s, (one + self.epsilon) * self.mu_s)
    }

    /// Interval of possible true decoy intensities.
    pub fn decoy_interval(&self) -> (T, T) {
        let one = T::one();
        ((one - self.epsilon) * self.mu_d, (one + self.epsilon) * self.mu_d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, s: f64, p0: f64) -> ChannelParams<f64> {
        ChannelParams::new(alpha, s, p0, 1.0).unwrap()
    }

    #[test]
    fn dark_channel_has_zero_rate_and_random_errors() {
        let obs = params(0.0, 0.0, 0.0).observables(0.5).unwrap();
        assert_eq!(obs.p_plus, 0.0);
        assert_eq!(obs.error_product_plus(), 0.0);
        assert_eq!(obs.e_plus, 0.5);
    }

    #[test]
    fn lossless_channel_matches_direct_evaluation() {
        let obs = params(1.0, 0.0, 0.0).observables(0.1).unwrap();
        // 1 - exp(-0.1), high-precision reference evaluation
        assert!((obs.p_plus - 0.09516258196404042684).abs() < 1e-16);
        assert_eq!(obs.e_plus, 0.0);
    }

    #[test]
    fn noisy_channel_matches_reference_values() {
        let obs = params(0.5, 0.03, 1e-5).observables(0.1).unwrap();
        assert!((obs.p_plus - 0.04878057549928599091).abs() < 1e-16);
        assert!((obs.error_product_plus() - 0.001468117264978579727).abs() < 1e-17);
        assert!((obs.e_plus - 0.03009634982678850918).abs() < 1e-16);
    }

    #[test]
    fn rejects_nonpositive_intensity() {
        assert!(matches!(
            params(0.1, 0.05, 1e-5).observables(0.0),
            Err(Error::NonPositiveIntensity(_))
        ));
        assert!(params(0.1, 0.05, 1e-5).observables(-0.1).is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ChannelParams::new(1.5, 0.0, 0.0, 1.0).is_err());
        assert!(ChannelParams::new(0.1, 0.5, 0.0, 1.0).is_err());
        assert!(ChannelParams::new(0.1, 0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(0.1, 0.0, 0.0, 0.9).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn detection_rate_increases_in_mu_and_alpha() {
        let p = params(0.3, 0.05, 1e-5);
        let mut last = 0.0;
        for i in 1..=120 {
            let mu = 1e-3 * (8.0f64).powf(i as f64 / 120.0);
            let rate = p.observables(mu).unwrap().p_plus;
            assert!(rate > last, "not increasing in mu at {mu}");
            last = rate;
        }
        let mut last = 0.0;
        for i in 1..=120 {
            let alpha = i as f64 / 120.0;
            let rate = params(alpha, 0.05, 1e-5).observables(0.4).unwrap().p_plus;
            assert!(rate > last, "not increasing in alpha at {alpha}");
            last = rate;
        }
    }

    #[test]
    fn error_product_at_most_half_detection_rate() {
        for &s in &[0.0, 0.1, 0.3, 0.49] {
            let p = params(0.4, s, 1e-4);
            for i in 1..=50 {
                let mu = 0.02 * i as f64;
                let obs = p.observables(mu).unwrap();
                assert!(obs.error_product_plus() <= obs.p_plus / 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn vacuum_limit_is_dark_counts_with_random_errors() {
        let obs = params(0.1, 0.05, 1e-5).observables(1e-12).unwrap();
        assert!((obs.p_plus - 1e-5).abs() < 1e-12);
        assert!((obs.e_plus - 0.5).abs() < 1e-7);
    }

    #[test]
    fn intensity_spec_identifiability() {
        assert!(IntensitySpec::new(0.5, 0.1, 0.05).is_ok());
        // (1 + eps) * 0.4 > (1 - eps) * 0.5 for eps = 0.2
        assert!(matches!(
            IntensitySpec::new(0.5, 0.4, 0.2),
            Err(Error::IndistinguishableIntensities { .. })
        ));
        assert!(matches!(
            IntensitySpec::new(0.5, 0.5, 0.0),
            Err(Error::IndistinguishableIntensities { .. })
        ));
        assert!(IntensitySpec::new(0.5, 0.1, 0.0).is_ok());
        assert!(IntensitySpec::new(0.1, 0.5, 0.05).is_ok());
    }

    #[test]
    fn works_in_single_precision() {
        let p = ChannelParams::<f32>::new(0.5, 0.03, 1e-5, 1.0).unwrap();
        let obs = p.observables(0.1).unwrap();
        assert!((obs.p_plus - 0.048780575).abs() < 1e-6);
    }
}
