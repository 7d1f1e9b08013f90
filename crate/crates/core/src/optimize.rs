//! One-dimensional minimization over the closed unit interval.

use crate::error::{invalid, Error, Result};

/// Number of points in the coarse scan that seeds the golden-section search.
pub const COARSE_GRID: usize = 65;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Values to use at `s = 0` and `s = 1` when the objective is only defined
/// there as a limit. `None` means the objective is evaluated directly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EndpointLimits {
    pub at_zero: Option<f64>,
    pub at_one: Option<f64>,
}

impl EndpointLimits {
    pub fn new(at_zero: f64, at_one: f64) -> Self {
        Self {
            at_zero: Some(at_zero),
            at_one: Some(at_one),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitMinimum {
    pub s: f64,
    pub value: f64,
}

fn checked(s: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: s })
    }
}

/// Global minimizer of `f` on `[0, 1]`.
///
/// A 65-point scan (endpoints replaced by `limits` where given) picks the best
/// cell, golden-section search refines inside the neighbouring cells to `tol`,
/// and the smallest of the refined point and the endpoint values wins.
pub fn minimize_unit_interval<F>(f: F, limits: EndpointLimits, tol: f64) -> Result<UnitMinimum>
where
    F: Fn(f64) -> f64,
{
    minimize_unit_interval_with_margin(f, limits, tol, 0.0)
}

/// As [`minimize_unit_interval`], but the refinement never evaluates `f`
/// closer than `margin` to either endpoint.
pub fn minimize_unit_interval_with_margin<F>(
    f: F,
    limits: EndpointLimits,
    tol: f64,
    margin: f64,
) -> Result<UnitMinimum>
where
    F: Fn(f64) -> f64,
{
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tol", tol, "must be positive"));
    }
    if !(0.0..0.5 / (COARSE_GRID - 1) as f64).contains(&margin) {
        return Err(invalid("margin", margin, "must lie inside the first grid cell"));
    }
    let last = COARSE_GRID - 1;
    let mut grid = Vec::with_capacity(COARSE_GRID);
    for i in 0..COARSE_GRID {
        let s = i as f64 / last as f64;
        let v = match i {
            0 => limits.at_zero.unwrap_or_else(|| f(0.0)),
            i if i == last => limits.at_one.unwrap_or_else(|| f(1.0)),
            _ => f(s),
        };
        grid.push(checked(s, v)?);
    }
    let (best, _) = grid
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, &v)| {
            if v < acc.1 {
                (i, v)
            } else {
                acc
            }
        });

    let mut lo = (best.saturating_sub(1) as f64 / last as f64).max(margin);
    let mut hi = ((best + 1).min(last) as f64 / last as f64).min(1.0 - margin);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = checked(x1, f(x1))?;
    let mut f2 = checked(x2, f(x2))?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = checked(x1, f(x1))?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = checked(x2, f(x2))?;
        }
    }
    let (mut s, mut value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for (i, v) in [(0usize, grid[0]), (last, grid[last])] {
        if v <= value {
            s = i as f64 / last as f64;
            value = v;
        }
    }
    if grid[best] < value {
        s = best as f64 / last as f64;
        value = grid[best];
    }
    Ok(UnitMinimum { s, value })
}

/// Global maximizer of `f` on `[0, 1]`; see [`minimize_unit_interval`].
pub fn maximize_unit_interval<F>(f: F, limits: EndpointLimits, tol: f64) -> Result<UnitMinimum>
where
    F: Fn(f64) -> f64,
{
    let negated = EndpointLimits {
        at_zero: limits.at_zero.map(|v| -v),
        at_one: limits.at_one.map(|v| -v),
    };
    let m = minimize_unit_interval(|s| -f(s), negated, tol)?;
    Ok(UnitMinimum {
        s: m.s,
        value: -m.value,
    })
}
