//! Sweeps of the monodromy class over the length parameter and bisection of
//! the regime boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BicycleError, Result};
use crate::geometry::{Polygon, Tolerance};
use crate::mobius::{
    classify, fixed_directions, monodromy_product, FixedSet, Mobius2,
    MonodromyClass,
};

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// The `L` actually used (nudged off side lengths where needed).
    pub length: f64,
    pub class: MonodromyClass,
    pub trace_sq_over_det: f64,
    pub normalized_discriminant: f64,
    /// Multipliers at the two fixed directions, attracting first, for
    /// hyperbolic and parabolic monodromy.
    pub multipliers: Option<(f64, f64)>,
}

/// Monodromy at `length`, moved up by a relative `1e-7` when `length`
/// coincides with a side length (where the determinant vanishes exactly).
/// Nearby points may still classify as degenerate; they are reported as such.
fn nudged_monodromy(v: &Polygon, length: f64) -> Result<(f64, Mobius2)> {
    let hits = v
        .side_lengths()
        .iter()
        .any(|a| (a - length).abs() <= 1e-12 * length);
    let l = if hits { length * (1.0 + 1e-7) } else { length };
    Ok((l, monodromy_product(v, l)?))
}

pub fn scan_row(v: &Polygon, length: f64, tol: &Tolerance) -> Result<ScanRow> {
    let (length, m) = nudged_monodromy(v, length)?;
    let class = classify(&m, tol);
    let multipliers = match fixed_directions(&m, tol) {
        Ok(FixedSet::Points(p)) => Some((p[0].multiplier, p[p.len() - 1].multiplier)),
        _ => None,
    };
    Ok(ScanRow {
        length,
        class,
        trace_sq_over_det: m.trace_sq_over_det(),
        normalized_discriminant: m.normalized_discriminant(),
        multipliers,
    })
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || steps < 2 {
        return Err(BicycleError::InvalidParameter(format!(
            "need 0 < min < max and at least 2 steps, got {lo}:{hi}:{steps}"
        )));
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// Classifies the monodromy at `steps` equally spaced lengths in `[lo, hi]`.
/// Points are evaluated in parallel; rows come back in grid order.
pub fn scan(v: &Polygon, lo: f64, hi: f64, steps: usize, tol: &Tolerance) -> Result<Vec<ScanRow>> {
    v.require_dim(2)?;
    grid(lo, hi, steps)?
        .into_par_iter()
        .map(|l| scan_row(v, l, tol))
        .collect()
}

fn disc_sign(v: &Polygon, length: f64) -> f64 {
    monodromy_product(v, length)
        .map(|m| m.normalized_discriminant().signum())
        .unwrap_or(0.0)
}

/// Bisects a sign change of `Tr^2 - 4 det` inside `[lo, hi]` down to
/// floating-point resolution.
pub fn bisect_boundary(v: &Polygon, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (s_lo, s_hi) = (disc_sign(v, lo), disc_sign(v, hi));
    if s_lo * s_hi >= 0.0 {
        return Err(BicycleError::InvalidParameter(format!(
            "no discriminant sign change in [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = disc_sign(v, mid);
        if s == 0.0 {
            return Ok(mid);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The parabolic lengths in `[lo, hi]` found by a scan with `steps` points
/// followed by bisection of every sign change of the discriminant. Grid
/// points with identity monodromy are skipped.
pub fn regime_boundaries(v: &Polygon, lo: f64, hi: f64, steps: usize, tol: &Tolerance) -> Result<Vec<f64>> {
    let rows = scan(v, lo, hi, steps, tol)?;
    let signed: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.class != MonodromyClass::Identity)
        .map(|r| (r.length, r.normalized_discriminant.signum()))
        .filter(|(_, s)| *s != 0.0)
        .collect();
    signed
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| bisect_boundary(v, w[0].0, w[1].0))
        .collect()
}
