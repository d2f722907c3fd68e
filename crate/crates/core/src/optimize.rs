//! Rectangle minimax search and bounded scalar maximization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::lin_spaced;
use crate::model::{ChannelParams, IntensitySpec};
use crate::rates;
use crate::scalar::{as_f64, cast, Scalar};

/// Settings for the grid scans and their local refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig<T> {
    /// Points per axis for the coarse scan.
    pub grid_points_per_axis: usize,
    /// Absolute tolerance on intensity arguments during refinement.
    pub refine_tolerance: T,
    /// Lower end of the signal-intensity search bracket.
    pub bracket_lo: T,
    /// Upper end of the signal-intensity search bracket.
    pub bracket_hi: T,
    /// Also evaluate the four rectangle corners and report when one wins.
    pub use_corner_heuristic: bool,
}

impl<T: Scalar> Default for OptimizeConfig<T> {
    fn default() -> Self {
        Self {
            grid_points_per_axis: 24,
            refine_tolerance: cast(1e-10),
            bracket_lo: cast(1e-3),
            bracket_hi: cast(1.0),
            use_corner_heuristic: true,
        }
    }
}

impl<T: Scalar> OptimizeConfig<T> {
    /// Checks the configuration invariants.
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_axis < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid_points_per_axis must be at least 8, got {}",
                self.grid_points_per_axis
            )));
        }
        if !(self.refine_tolerance > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "refine_tolerance must be positive, got {}",
                as_f64(self.refine_tolerance)
            )));
        }
        if !(T::zero() < self.bracket_lo && self.bracket_lo < self.bracket_hi) {
            return Err(Error::InvalidParameter(format!(
                "bracket must satisfy 0 < lo < hi, got [{}, {}]",
                as_f64(self.bracket_lo),
                as_f64(self.bracket_hi)
            )));
        }
        Ok(())
    }
}

/// Where an optimum was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    /// Both coordinates sit on rectangle bounds (or the search interval
    /// degenerated to a point).
    Corner,
    /// Exactly one coordinate sits on a bound, or a scalar optimum sits
    /// on an interval end.
    Boundary,
    /// The optimum is strictly inside the search domain.
    Interior,
}

impl core::fmt::Display for Certificate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Certificate::Corner => "corner",
            Certificate::Boundary => "boundary",
            Certificate::Interior => "interior",
        })
    }
}

/// Optimum of a scalar objective over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarOptimum<T> {
    /// Maximizing (or minimizing) argument.
    pub argument: T,
    /// Objective value at the argument.
    pub value: T,
    /// How the optimum was located.
    pub certificate: Certificate,
    /// True when a negative best rate was reported as zero.
    pub clamped: bool,
}

/// Minimum of an objective over an intensity rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectOptimum<T> {
    /// Signal-intensity coordinate of the minimizer.
    pub signal: T,
    /// Decoy-intensity coordinate of the minimizer.
    pub decoy: T,
    /// Objective value at the minimizer.
    pub value: T,
    /// How the minimizer was located.
    pub certificate: Certificate,
}

/// Axis-aligned hypothesis rectangle with signal and decoy intervals
/// that stay clear of the equal-intensity diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle<T> {
    pub signal_lo: T,
    pub signal_hi: T,
    pub decoy_lo: T,
    pub decoy_hi: T,
}

impl<T: Scalar> Rectangle<T> {
    /// Validates interval ordering and distance from the diagonal.
    pub fn new(signal: (T, T), decoy: (T, T)) -> Result<Self> {
        let r = Self {
            signal_lo: signal.0,
            signal_hi: signal.1,
            decoy_lo: decoy.0,
            decoy_hi: decoy.1,
        };
        r.validate()?;
        Ok(r)
    }

    /// The hypothesis rectangle spanned by an intensity specification.
    pub fn from_spec(spec: &IntensitySpec<T>) -> Result<Self> {
        Self::new(spec.signal_interval(), spec.decoy_interval())
    }

    /// Checks the rectangle invariants.
    pub fn validate(&self) -> Result<()> {
        if !(T::zero() < self.signal_lo
            && self.signal_lo <= self.signal_hi
            && T::zero() < self.decoy_lo
            && self.decoy_lo <= self.decoy_hi)
        {
            return Err(Error::InvalidParameter(format!(
                "rectangle bounds must satisfy 0 < lo <= hi on both axes, got \
                 signal [{}, {}], decoy [{}, {}]",
                as_f64(self.signal_lo),
                as_f64(self.signal_hi),
                as_f64(self.decoy_lo),
                as_f64(self.decoy_hi)
            )));
        }
        if self.signal_lo <= self.decoy_hi && self.decoy_lo <= self.signal_hi {
            return Err(Error::RectangleOnDiagonal {
                signal_lo: as_f64(self.signal_lo),
                signal_hi: as_f64(self.signal_hi),
                decoy_lo: as_f64(self.decoy_lo),
                decoy_hi: as_f64(self.decoy_hi),
            });
        }
        Ok(())
    }
}

/// Golden-section minimization on `[lo, hi]`; returns the midpoint of
/// the final bracket and the objective value there.
fn golden_min<T: Scalar, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, tol: T) -> (T, T) {
    // 1/phi and 1/phi^2
    let inv_phi: T = cast(0.618_033_988_749_894_9);
    let inv_phi2: T = cast(0.381_966_011_250_105_2);

    if !(hi > lo) {
        return (lo, f(lo));
    }
    let mut width = hi - lo;
    let mut a = lo + inv_phi2 * width;
    let mut b = lo + inv_phi * width;
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..200 {
        if width <= tol {
            break;
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            width = hi - lo;
            a = lo + inv_phi2 * width;
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            width = hi - lo;
            b = lo + inv_phi * width;
            fb = f(b);
        }
    }
    let mid = (lo + hi) / cast(2.0);
    (mid, f(mid))
}

/// Minimizes `objective` over the rectangle: coarse grid scan, then
/// coordinate-wise golden-section refinement down to
/// `refine_tolerance`. Corners are always part of the scan; ties prefer
/// smaller intensities.
pub fn minimize_rectangle<T: Scalar, F: Fn(T, T) -> T>(
    objective: F,
    rect: &Rectangle<T>,
    cfg: &OptimizeConfig<T>,
) -> Result<RectOptimum<T>> {
    cfg.validate()?;
    rect.validate()?;

    let n = cfg.grid_points_per_axis;
    let signals = lin_spaced(rect.signal_lo, rect.signal_hi, n);
    let decoys = lin_spaced(rect.decoy_lo, rect.decoy_hi, n);

    let mut best = (signals[0], decoys[0], objective(signals[0], decoys[0]));
    for &ms in &signals {
        for &md in &decoys {
            let v = objective(ms, md);
            if v < best.2 {
                best = (ms, md, v);
            }
        }
    }
    if cfg.use_corner_heuristic {
        for &ms in &[rect.signal_lo, rect.signal_hi] {
            for &md in &[rect.decoy_lo, rect.decoy_hi] {
                let v = objective(ms, md);
                if v < best.2 {
                    best = (ms, md, v);
                }
            }
        }
    }

    let (mut ms, mut md, mut val) = best;
    let tol = cfg.refine_tolerance;
    for _ in 0..64 {
        let (ns, vs) = golden_min(&|x| objective(x, md), rect.signal_lo, rect.signal_hi, tol);
        let moved_s = (ns - ms).abs();
        if vs < val {
            ms = ns;
            val = vs;
        }
        let (nd, vd) = golden_min(&|y| objective(ms, y), rect.decoy_lo, rect.decoy_hi, tol);
        let moved_d = (nd - md).abs();
        if vd < val {
            md = nd;
            val = vd;
        }
        if moved_s <= tol && moved_d <= tol {
            break;
        }
    }

    // snap to bounds within the refinement tolerance so corner wins are
    // reported (and re-evaluated) exactly
    ms = snap(ms, rect.signal_lo, rect.signal_hi, tol);
    md = snap(md, rect.decoy_lo, rect.decoy_hi, tol);
    let value = objective(ms, md);
    let value = if value <= best.2 {
        value
    } else {
        ms = best.0;
        md = best.1;
        objective(ms, md)
    };

    let on_s = ms == rect.signal_lo || ms == rect.signal_hi;
    let on_d = md == rect.decoy_lo || md == rect.decoy_hi;
    let certificate = match (on_s, on_d) {
        (true, true) => Certificate::Corner,
        (false, false) => Certificate::Interior,
        _ => Certificate::Boundary,
    };
    Ok(RectOptimum {
        signal: ms,
        decoy: md,
        value,
        certificate,
    })
}

fn snap<T: Scalar>(x: T, lo: T, hi: T, tol: T) -> T {
    if (x - lo).abs() <= tol {
        lo
    } else if (hi - x).abs() <= tol {
        hi
    } else {
        x
    }
}

/// Maximizes a scalar objective on `[lo, hi]`: coarse scan, then
/// golden-section refinement in the bracket around the best scan point.
/// Reports a boundary certificate when the maximum sits on an end.
pub fn maximize_scalar<T: Scalar, F: Fn(T) -> T>(
    objective: F,
    lo: T,
    hi: T,
    cfg: &OptimizeConfig<T>,
) -> Result<ScalarOptimum<T>> {
    cfg.validate()?;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "scalar search interval must satisfy lo < hi, got [{}, {}]",
            as_f64(lo),
            as_f64(hi)
        )));
    }
    let xs = lin_spaced(lo, hi, cfg.grid_points_per_axis.max(8));
    let mut best_i = 0;
    let mut best_v = objective(xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let v = objective(x);
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }

    let blo = xs[best_i.saturating_sub(1)];
    let bhi = xs[(best_i + 1).min(xs.len() - 1)];
    let tol = cfg.refine_tolerance;
    let (refined, neg) = golden_min(&|x| -objective(x), blo, bhi, tol);
    let arg = if best_v > -neg { xs[best_i] } else { refined };
    let arg = snap(arg, lo, hi, tol);
    let value = objective(arg);

    let certificate = if arg == lo || arg == hi {
        Certificate::Boundary
    } else {
        Certificate::Interior
    };
    Ok(ScalarOptimum {
        argument: arg,
        value,
        certificate,
        clamped: false,
    })
}

/// Maximizes the infinitesimal-decoy worst-case rate over the nominal
/// signal intensity.
///
/// The closed form only applies up to a signal-intensity bound; the
/// bracket is shrunk to the feasible part first. A channel that can
/// never yield a positive rate (for example `alpha = 0`) reports the
/// optimum as zero with the clamp flag set.
pub fn optimal_signal_intensity<T: Scalar>(
    params: &ChannelParams<T>,
    epsilon: T,
    cfg: &OptimizeConfig<T>,
) -> Result<ScalarOptimum<T>> {
    cfg.validate()?;
    if rates::limit_key_coefficient(params, epsilon)? <= T::zero() {
        // no single-photon credit at any intensity: rate <= 0 everywhere
        return Ok(ScalarOptimum {
            argument: cfg.bracket_lo,
            value: T::zero(),
            certificate: Certificate::Boundary,
            clamped: true,
        });
    }
    let bound = rates::decoy_zero_signal_bound(params, epsilon)?;
    let hi = cfg.bracket_hi.min(bound);
    if hi < cfg.bracket_lo {
        return Err(Error::EmptyBracket {
            lo: as_f64(cfg.bracket_lo),
            hi: as_f64(cfg.bracket_hi),
            bound: as_f64(bound),
        });
    }
    let objective = |mu: T| {
        rates::rate_worst_case_decoy_zero(params, mu, epsilon)
            .expect("bracket was restricted to the feasible range")
    };
    let opt = if hi == cfg.bracket_lo {
        ScalarOptimum {
            argument: hi,
            value: objective(hi),
            certificate: Certificate::Boundary,
            clamped: false,
        }
    } else {
        maximize_scalar(objective, cfg.bracket_lo, hi, cfg)?
    };
    if opt.value < T::zero() {
        Ok(ScalarOptimum {
            value: T::zero(),
            clamped: true,
            ..opt
        })
    } else {
        Ok(opt)
    }
}
