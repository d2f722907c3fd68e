//! Cross-checks the estimators against an independent algebraic route.
//!
//! The library composes observables with the generic two-intensity
//! estimators. The oracle here evaluates the same quantities through a
//! rearranged form: a single difference quotient of
//! `g(mu) = (A e^mu - B e^((1-alpha) mu) - C) / mu^2`, which never
//! constructs the observables at all. Agreement between both routes is
//! evidence against algebra slips in either.

use decoykit::estimators::{estimate_controlled, positive_part};
use decoykit::model::ChannelParams;
use decoykit::rates::{rate_report, rate_uncontrolled};
use decoykit::IntensityPair;

/// Detection-rate estimate via the difference-quotient arrangement.
fn oracle_detection(p: &ChannelParams<f64>, mu1: f64, mu2: f64) -> f64 {
    let g = |mu: f64| ((1.0 + p.p0) * mu.exp() - ((1.0 - p.alpha) * mu).exp() - p.p0) / (mu * mu);
    positive_part(mu1 * mu2 * (g(mu1) - g(mu2)) / (mu2 - mu1))
}

/// No-phase-error-rate estimate via the same arrangement.
fn oracle_phase_correct(p: &ChannelParams<f64>, mu1: f64, mu2: f64) -> f64 {
    let w = 1.0 - p.s;
    let half = p.p0 / 2.0;
    let g = |mu: f64| ((w + half) * mu.exp() - w * ((1.0 - p.alpha) * mu).exp() - half) / (mu * mu);
    positive_part(mu1 * mu2 * (g(mu1) - g(mu2)) / (mu2 - mu1))
}

/// Phase-error-rate estimate without forming the error product first.
fn oracle_phase_error(p: &ChannelParams<f64>, mu1: f64) -> f64 {
    let num = p.s * (mu1.exp() - ((1.0 - p.alpha) * mu1).exp()) + p.p0 * (mu1.exp() - 1.0) / 2.0;
    positive_part(num / mu1)
}

fn channels() -> Vec<ChannelParams<f64>> {
    vec![
        ChannelParams::new(0.1, 0.05, 1e-5, 1.1).unwrap(),
        ChannelParams::new(1.0, 0.0, 0.0, 1.0).unwrap(),
        ChannelParams::new(0.5, 0.03, 1e-5, 1.0).unwrap(),
        ChannelParams::new(0.02, 0.12, 1e-4, 1.2).unwrap(),
        ChannelParams::new(0.9, 0.49, 1e-3, 1.05).unwrap(),
        ChannelParams::new(0.3, 0.0, 5e-7, 1.0).unwrap(),
    ]
}

#[test]
fn estimates_agree_with_difference_quotient_route() {
    let grid: Vec<f64> = (0..20)
        .map(|i| 1e-3 * (1000.0f64).powf(i as f64 / 19.0))
        .collect();
    for p in channels() {
        for (i, &mu1) in grid.iter().enumerate() {
            for &mu2 in &grid[i + 1..] {
                let est = estimate_controlled(&p, mu1, mu2).unwrap();
                let oa = oracle_detection(&p, mu1, mu2);
                let ob = oracle_phase_error(&p, mu1);
                let oc = oracle_phase_correct(&p, mu1, mu2);
                assert!(
                    (est.detection - oa).abs() < 1e-10,
                    "detection mismatch at ({mu1}, {mu2}): {} vs {oa}",
                    est.detection
                );
                assert!(
                    (est.phase_error - ob).abs() < 1e-10,
                    "phase_error mismatch at {mu1}: {} vs {ob}",
                    est.phase_error
                );
                assert!(
                    (est.phase_correct - oc).abs() < 1e-10,
                    "phase_correct mismatch at ({mu1}, {mu2}): {} vs {oc}",
                    est.phase_correct
                );
            }
        }
    }
}

#[test]
fn rates_agree_with_oracle_composition() {
    // rebuild both rates from the oracle estimates and the entropy
    // definition, then compare against the library reports
    let h = |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
        }
    };
    for p in channels() {
        for (mu_s, mu_d) in [(0.5, 0.1), (0.3, 0.05), (0.8, 0.4), (0.1, 0.5)] {
            let (lo, hi) = (f64::min(mu_s, mu_d), f64::max(mu_s, mu_d));
            let a = oracle_detection(&p, lo, hi);
            let b = oracle_phase_error(&p, lo);
            let c = oracle_phase_correct(&p, lo, hi);
            let sig = -(-p.alpha * mu_s).exp_m1();
            let p_plus = sig + p.p0;
            let e_plus = if p_plus > 0.0 {
                (p.s * sig + p.p0 / 2.0) / p_plus
            } else {
                0.5
            };
            let damp = (-mu_s).exp();
            let ec = p_plus * p.eta_ec * h(e_plus);
            let improved = if b / (c + b) < 0.5 {
                mu_s * damp * (c + b) * (1.0 - h(b / (c + b))) + damp * p.p0 - ec
            } else {
                damp * p.p0 - ec
            };
            let conventional = if b / a < 0.5 {
                mu_s * damp * a * (1.0 - h(b / a)) + damp * p.p0 - ec
            } else {
                damp * p.p0 - ec
            };

            let report = rate_report(&p, mu_s, mu_d).unwrap();
            assert!(
                (report.rate_improved - improved).abs() < 1e-12,
                "improved rate mismatch at ({mu_s}, {mu_d}): {} vs {improved}",
                report.rate_improved
            );
            assert!(
                (report.rate_conventional - conventional).abs() < 1e-12,
                "conventional rate mismatch at ({mu_s}, {mu_d})"
            );
        }
    }
}

#[test]
fn uncontrolled_rate_reduces_to_scaled_transmission_channel() {
    // when the hypothesis decoy intensity is (1+eps) times the true one,
    // the low-intensity estimates look like a channel with transmission
    // alpha/(1+eps); evaluate that equivalent channel directly
    let p = ChannelParams::new(0.1, 0.05, 1e-5, 1.0).unwrap();
    let eps = 0.05f64;
    let mu_s = 0.5f64;
    let mu_d_hyp = 1e-7f64;

    let hyp = IntensityPair {
        signal: mu_s,
        decoy: mu_d_hyp,
    };
    let actual = IntensityPair {
        signal: mu_s,
        decoy: mu_d_hyp / (1.0 + eps),
    };
    let (re, _) = rate_uncontrolled(&p, hyp, actual).unwrap();

    let scaled = p.alpha / (1.0 + eps);
    let total = scaled + p.p0;
    let err = p.s * scaled + p.p0 / 2.0;
    let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
    let sig = -(-p.alpha * mu_s).exp_m1();
    let p_plus = sig + p.p0;
    let e_plus = (p.s * sig + p.p0 / 2.0) / p_plus;
    let damp = (-mu_s).exp();
    let expected =
        mu_s * damp * total * (1.0 - h(err / total)) + damp * p.p0 - p_plus * p.eta_ec * h(e_plus);
    assert!(
        (re - expected).abs() < 1e-6,
        "limit route mismatch: {re} vs {expected}"
    );
}
