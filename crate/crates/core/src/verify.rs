//! Executable verification: turns the monotonicity and limit properties
//! behind the rate formulas into pass/fail numerical checks.
//!
//! Every check reports the largest observed violation and the inputs
//! achieving it. The grid-walking cores take the objective as a
//! closure, so the test suite can validate each checker against a
//! deliberately broken objective.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimators::{decoy_zero_estimates, estimate_controlled, estimate_from_observables};
use crate::grid::{lin_spaced, log_spaced};
use crate::model::{ChannelParams, IntensitySpec};
use crate::optimize::{maximize_scalar, OptimizeConfig};
use crate::rates::{
    decoy_zero_condition, key_terms, rate_report, rate_uncontrolled, rate_worst_case,
    rate_worst_case_decoy_zero, IntensityPair, KeyTerms,
};
use crate::scalar::{as_f64, Scalar};

/// Absolute tolerance on monotonicity violations; leaves headroom over
/// the ~1e-15 round-off of the exponential terms without masking real
/// defects.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Tolerance for the small-decoy limit comparison at `mu = 1e-8`.
pub const LIMIT_TOL: f64 = 1e-6;
/// Tolerance for the sup-over-decoy versus closed-form comparison.
pub const SUP_TOL: f64 = 1e-5;
/// Tolerance for the dense-grid versus corner comparison.
pub const CORNER_TOL: f64 = 1e-9;

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    /// Check identifier.
    pub name: String,
    /// Whether the worst violation stayed within tolerance.
    pub passed: bool,
    /// Magnitude of the largest observed violation.
    pub worst_violation: f64,
    /// Inputs achieving the worst violation, or a skip note.
    pub witness: String,
    /// Threshold the violation was compared against.
    pub tolerance: f64,
}

impl CheckResult {
    /// Builds a result; `passed` holds exactly when
    /// `worst_violation <= tolerance`.
    pub fn from_violation(
        name: impl Into<String>,
        worst_violation: f64,
        witness: impl Into<String>,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            passed: worst_violation <= tolerance,
            worst_violation,
            witness: witness.into(),
            tolerance,
        }
    }

    fn skipped(name: impl Into<String>, reason: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: true,
            worst_violation: 0.0,
            witness: reason.into(),
            tolerance,
        }
    }
}

/// Checks that `f` is nonincreasing along `xs`, skipping pairs where
/// the objective declines to produce a value.
pub fn check_nonincreasing<T: Scalar, F: Fn(T) -> Option<T>>(
    name: &str,
    xs: &[T],
    f: F,
    tol: f64,
) -> CheckResult {
    let mut worst = 0.0f64;
    let mut witness = String::from("no violation");
    let mut prev: Option<(T, T)> = None;
    for &x in xs {
        let Some(v) = f(x) else {
            prev = None;
            continue;
        };
        if let Some((px, pv)) = prev {
            let jump = as_f64(v - pv);
            if jump > worst {
                worst = jump;
                witness = format!("rise of {jump:e} from x = {} to x = {}", as_f64(px), as_f64(x));
            }
        }
        prev = Some((x, v));
    }
    CheckResult::from_violation(name, worst, witness, tol)
}

/// Checks that `f` is nondecreasing along `xs`.
pub fn check_nondecreasing<T: Scalar, F: Fn(T) -> Option<T>>(
    name: &str,
    xs: &[T],
    f: F,
    tol: f64,
) -> CheckResult {
    let mut result = check_nonincreasing(name, xs, |x| f(x).map(|v| -v), tol);
    result.witness = result.witness.replace("rise", "drop");
    result
}

fn merge(name: &str, parts: Vec<CheckResult>) -> CheckResult {
    let mut worst = 0.0f64;
    let mut witness = String::from("no violation");
    let tol = parts.first().map_or(MONOTONE_TOL, |p| p.tolerance);
    for p in parts {
        if p.worst_violation > worst {
            worst = p.worst_violation;
            witness = format!("[{}] {}", p.name, p.witness);
        }
    }
    CheckResult::from_violation(name, worst, witness, tol)
}

/// Both key rates are nonincreasing along an ascending decoy-intensity
/// grid (which must not contain the signal intensity itself).
pub fn check_rate_monotone_in_decoy<T: Scalar>(
    params: &ChannelParams<T>,
    mu_s: T,
    mu_d_grid: &[T],
) -> CheckResult {
    let improved = check_nonincreasing(
        "improved",
        mu_d_grid,
        |mu_d| Some(rate_report(params, mu_s, mu_d).expect("grid excludes mu_s").rate_improved),
        MONOTONE_TOL,
    );
    let conventional = check_nonincreasing(
        "conventional",
        mu_d_grid,
        |mu_d| {
            Some(
                rate_report(params, mu_s, mu_d)
                    .expect("grid excludes mu_s")
                    .rate_conventional,
            )
        },
        MONOTONE_TOL,
    );
    merge("rate_monotone_in_decoy", vec![improved, conventional])
}

fn controlled_terms<T: Scalar>(params: &ChannelParams<T>, lo: T, hi: T) -> KeyTerms<T> {
    key_terms(&estimate_controlled(params, lo, hi).expect("grid keeps 0 < lo < hi"))
}

/// The single-photon key terms are nonincreasing in both controlled
/// intensities wherever their phase-error ratios stay below 1/2.
pub fn check_key_terms_monotone<T: Scalar>(params: &ChannelParams<T>, grid: &[T]) -> CheckResult {
    let mut parts = Vec::new();
    for (i, &lo) in grid.iter().enumerate() {
        let his: Vec<T> = grid[i + 1..].to_vec();
        if his.len() < 2 {
            continue;
        }
        parts.push(check_nonincreasing(
            &format!("improved term in high intensity at low = {}", as_f64(lo)),
            &his,
            |hi| {
                let t = controlled_terms(params, lo, hi);
                (!t.clamped).then_some(t.improved)
            },
            MONOTONE_TOL,
        ));
        parts.push(check_nonincreasing(
            &format!("conventional term in high intensity at low = {}", as_f64(lo)),
            &his,
            |hi| {
                let t = controlled_terms(params, lo, hi);
                (!t.clamped).then_some(t.conventional)
            },
            MONOTONE_TOL,
        ));
    }
    for (i, &hi) in grid.iter().enumerate() {
        let los: Vec<T> = grid[..i].to_vec();
        if los.len() < 2 {
            continue;
        }
        parts.push(check_nonincreasing(
            &format!("improved term in low intensity at high = {}", as_f64(hi)),
            &los,
            |lo| {
                let t = controlled_terms(params, lo, hi);
                (!t.clamped).then_some(t.improved)
            },
            MONOTONE_TOL,
        ));
        parts.push(check_nonincreasing(
            &format!("conventional term in low intensity at high = {}", as_f64(hi)),
            &los,
            |lo| {
                let t = controlled_terms(params, lo, hi);
                (!t.clamped).then_some(t.conventional)
            },
            MONOTONE_TOL,
        ));
    }
    merge("key_terms_monotone", parts)
}

/// The controlled estimates at a tiny low intensity agree with their
/// closed-form limits.
pub fn check_decoy_zero_limits<T: Scalar>(params: &ChannelParams<T>) -> CheckResult {
    check_decoy_zero_limits_at(params, as_f64_cast(1e-8), LIMIT_TOL)
}

/// Limit comparison with an explicit probe intensity and tolerance;
/// tightening the tolerance without shrinking the probe documents the
/// convergence rate.
pub fn check_decoy_zero_limits_at<T: Scalar>(
    params: &ChannelParams<T>,
    mu_low: T,
    tol: f64,
) -> CheckResult {
    let est = estimate_controlled(params, mu_low, as_f64_cast(0.5))
        .expect("probe intensities are valid");
    let lim = decoy_zero_estimates(params);
    let diffs = [
        ("detection", as_f64(est.detection - lim.detection).abs()),
        ("phase_error", as_f64(est.phase_error - lim.phase_error).abs()),
        (
            "phase_correct",
            as_f64(est.phase_correct - lim.phase_correct).abs(),
        ),
    ];
    let (label, worst) = diffs
        .iter()
        .cloned()
        .fold(("none", 0.0), |acc, d| if d.1 > acc.1 { d } else { acc });
    CheckResult::from_violation(
        "decoy_zero_limits",
        worst,
        format!("component {label} at mu_low = {}", as_f64(mu_low)),
        tol,
    )
}

fn as_f64_cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant")
}

/// Monotonicity of the estimates and key terms in the *true* intensities
/// with the hypothesis intensities held fixed, one result per item:
///
/// (i) detection rises with the true decoy and falls with the true
/// signal; (ii) phase error rises with the true decoy; (iii) the correct
/// rate behaves like (i); (iv)/(v) both phase-error ratios fall with the
/// true decoy; (vi)/(vii) both key terms behave like (i).
pub fn check_true_intensity_monotonicity<T: Scalar>(
    params: &ChannelParams<T>,
    hypothesis: IntensityPair<T>,
    true_decoy_grid: &[T],
    true_signal_grid: &[T],
) -> Vec<CheckResult> {
    let est_at = |true_d: T, true_s: T| {
        let od = params.observables(true_d).expect("grid is positive");
        let os = params.observables(true_s).expect("grid is positive");
        estimate_from_observables(&od, &os, hypothesis.decoy, hypothesis.signal, params.p0)
            .expect("hypothesis intensities differ")
    };
    let along_decoy = |f: &dyn Fn(T) -> Option<T>, name: &str, rising: bool| {
        if rising {
            check_nondecreasing(name, true_decoy_grid, f, MONOTONE_TOL)
        } else {
            check_nonincreasing(name, true_decoy_grid, f, MONOTONE_TOL)
        }
    };
    let along_signal = |f: &dyn Fn(T) -> Option<T>, name: &str| {
        check_nonincreasing(name, true_signal_grid, f, MONOTONE_TOL)
    };

    let ts = hypothesis.signal;
    let td = hypothesis.decoy;
    vec![
        merge(
            "true_monotone_(i)_detection",
            vec![
                along_decoy(&|d| Some(est_at(d, ts).detection), "rising in true decoy", true),
                along_signal(&|s| Some(est_at(td, s).detection), "falling in true signal"),
            ],
        ),
        merge(
            "true_monotone_(ii)_phase_error",
            vec![along_decoy(
                &|d| Some(est_at(d, ts).phase_error),
                "rising in true decoy",
                true,
            )],
        ),
        merge(
            "true_monotone_(iii)_phase_correct",
            vec![
                along_decoy(&|d| Some(est_at(d, ts).phase_correct), "rising in true decoy", true),
                along_signal(&|s| Some(est_at(td, s).phase_correct), "falling in true signal"),
            ],
        ),
        merge(
            "true_monotone_(iv)_conventional_ratio",
            vec![along_decoy(
                &|d| {
                    let e = est_at(d, ts);
                    (e.detection > T::zero()).then(|| e.phase_error / e.detection)
                },
                "falling in true decoy",
                false,
            )],
        ),
        merge(
            "true_monotone_(v)_improved_ratio",
            vec![along_decoy(
                &|d| {
                    let e = est_at(d, ts);
                    (e.improved_total() > T::zero()).then(|| e.phase_error / e.improved_total())
                },
                "falling in true decoy",
                false,
            )],
        ),
        merge(
            "true_monotone_(vi)_conventional_term",
            vec![
                along_decoy(
                    &|d| {
                        let t = key_terms(&est_at(d, ts));
                        (!t.clamped).then_some(t.conventional)
                    },
                    "rising in true decoy",
                    true,
                ),
                along_signal(
                    &|s| {
                        let t = key_terms(&est_at(td, s));
                        (!t.clamped).then_some(t.conventional)
                    },
                    "falling in true signal",
                ),
            ],
        ),
        merge(
            "true_monotone_(vii)_improved_term",
            vec![
                along_decoy(
                    &|d| {
                        let t = key_terms(&est_at(d, ts));
                        (!t.clamped).then_some(t.improved)
                    },
                    "rising in true decoy",
                    true,
                ),
                along_signal(
                    &|s| {
                        let t = key_terms(&est_at(td, s));
                        (!t.clamped).then_some(t.improved)
                    },
                    "falling in true signal",
                ),
            ],
        ),
    ]
}

/// The numerically computed supremum over the nominal decoy intensity
/// of the worst-case rate agrees with the infinitesimal-decoy closed
/// form. Reports a skip (not a failure) when the feasibility condition
/// does not hold.
pub fn check_worst_case_sup_limit<T: Scalar>(
    params: &ChannelParams<T>,
    mu_s_nominal: T,
    epsilon: T,
    cfg: &OptimizeConfig<T>,
) -> CheckResult {
    let name = "worst_case_sup_limit";
    match decoy_zero_condition(params, mu_s_nominal, epsilon) {
        Ok(true) => {}
        Ok(false) => {
            return CheckResult::skipped(
                name,
                format!(
                    "feasibility condition not met at mu_s = {}, epsilon = {}; check skipped",
                    as_f64(mu_s_nominal),
                    as_f64(epsilon)
                ),
                SUP_TOL,
            );
        }
        Err(e) => return CheckResult::skipped(name, format!("precondition error: {e}"), SUP_TOL),
    }
    let limit = rate_worst_case_decoy_zero(params, mu_s_nominal, epsilon)
        .expect("condition verified above");

    let one = T::one();
    let ratio = (one - epsilon) / (one + epsilon);
    let hi = as_f64_cast::<T>(0.5) * ratio * mu_s_nominal;
    let lo = as_f64_cast::<T>(1e-6).min(hi / as_f64_cast(2.0));
    let objective = |mu_d: T| {
        let spec = IntensitySpec::new(mu_s_nominal, mu_d, epsilon)
            .expect("bracket keeps the intervals disjoint");
        rate_worst_case(params, &spec, cfg)
            .expect("valid spec")
            .improved
            .value
    };
    let sup = maximize_scalar(objective, lo, hi, cfg).expect("valid bracket");
    let violation = as_f64(sup.value - limit).abs();
    CheckResult::from_violation(
        name,
        violation,
        format!(
            "sup {} at nominal decoy {} ({}), closed form {}",
            as_f64(sup.value),
            as_f64(sup.argument),
            sup.certificate,
            as_f64(limit)
        ),
        SUP_TOL,
    )
}

/// A dense grid over the hypothesis rectangle finds no point
/// meaningfully below the predicted minimizing corner.
pub fn check_corner_minimizer<T: Scalar>(
    params: &ChannelParams<T>,
    spec: &IntensitySpec<T>,
    grid_points: usize,
) -> CheckResult {
    let name = "corner_minimizer";
    if spec.epsilon == T::zero() {
        return CheckResult::skipped(
            name,
            "degenerate rectangle (epsilon = 0); nothing to search",
            CORNER_TOL,
        );
    }
    let (s_lo, s_hi) = spec.signal_interval();
    let (d_lo, d_hi) = spec.decoy_interval();
    // the low-signal/high-decoy corner when the decoy is the weaker
    // pulse, mirrored otherwise
    let corner = if spec.mu_d < spec.mu_s {
        IntensityPair {
            signal: s_lo,
            decoy: d_hi,
        }
    } else {
        IntensityPair {
            signal: s_hi,
            decoy: d_lo,
        }
    };
    let actual = IntensityPair {
        signal: spec.mu_s,
        decoy: spec.mu_d,
    };
    let eval = |signal, decoy| {
        rate_uncontrolled(params, IntensityPair { signal, decoy }, actual)
            .expect("rectangle stays off the diagonal")
    };
    let corner_value = eval(corner.signal, corner.decoy);
    let mut worst = 0.0f64;
    let mut witness = format!(
        "corner ({}, {}) is the grid minimum",
        as_f64(corner.signal),
        as_f64(corner.decoy)
    );
    for &ms in &lin_spaced(s_lo, s_hi, grid_points) {
        for &md in &lin_spaced(d_lo, d_hi, grid_points) {
            let (ri, rc) = eval(ms, md);
            for (label, below) in [
                ("improved", as_f64(corner_value.0 - ri)),
                ("conventional", as_f64(corner_value.1 - rc)),
            ] {
                if below > worst {
                    worst = below;
                    witness = format!(
                        "{label} rate at ({}, {}) lies {below:e} below the corner",
                        as_f64(ms),
                        as_f64(md)
                    );
                }
            }
        }
    }
    CheckResult::from_violation(name, worst, witness, CORNER_TOL)
}

/// Runs the whole suite with default grids around the given
/// configuration.
pub fn run_all<T: Scalar>(params: &ChannelParams<T>, spec: &IntensitySpec<T>) -> Vec<CheckResult> {
    let mu_s = spec.mu_s;
    let exclusion = as_f64_cast::<T>(1e-9);
    let mu_d_grid: Vec<T> = log_spaced::<T>(as_f64_cast(1e-4), as_f64_cast(1.5), 100)
        .into_iter()
        .filter(|&x| (x - mu_s).abs() > exclusion)
        .collect();
    let term_grid = log_spaced(as_f64_cast(1e-3), as_f64_cast(1.0), 25);
    let hypothesis = IntensityPair {
        signal: spec.mu_s,
        decoy: spec.mu_d,
    };
    let half = as_f64_cast::<T>(0.5);
    let two = as_f64_cast::<T>(2.0);
    let true_decoy_grid = log_spaced(half * spec.mu_d, two * spec.mu_d, 30);
    let true_signal_grid = log_spaced(half * spec.mu_s, two * spec.mu_s, 30);

    let mut results = vec![
        check_rate_monotone_in_decoy(params, mu_s, &mu_d_grid),
        check_key_terms_monotone(params, &term_grid),
        check_decoy_zero_limits(params),
    ];
    results.extend(check_true_intensity_monotonicity(
        params,
        hypothesis,
        &true_decoy_grid,
        &true_signal_grid,
    ));
    results.push(check_worst_case_sup_limit(
        params,
        spec.mu_s,
        spec.epsilon,
        &OptimizeConfig::default(),
    ));
    results.push(check_corner_minimizer(params, spec, 200));
    results
}

/// Convenience: did every check pass?
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

impl From<Error> for CheckResult {
    fn from(e: Error) -> Self {
        CheckResult {
            name: "error".into(),
            passed: false,
            worst_violation: f64::INFINITY,
            witness: e.to_string(),
            tolerance: 0.0,
        }
    }
}
