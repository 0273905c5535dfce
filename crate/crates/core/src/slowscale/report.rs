//! Gap between lower and upper value sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::GridValueFn;

use super::SlowValueSeq;

/// Floor of the denominator in relative gaps.
pub const GAP_EPS: f64 = 1e-9;
/// Relative slack before `lower > upper` counts as a violation.
pub const SANDWICH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayGap {
    pub day: usize,
    pub max_rel_gap: f64,
    pub gap_at_x0: f64,
    pub lower_x0: f64,
    pub upper_x0: f64,
    /// Grid points where the lower value exceeds the upper one.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub x0: Vec<f64>,
    pub days: Vec<DayGap>,
}

impl BoundReport {
    pub fn total_violations(&self) -> usize {
        self.days.iter().map(|d| d.violations).sum()
    }

    pub fn max_rel_gap(&self) -> f64 {
        self.days.iter().map(|d| d.max_rel_gap).fold(0.0, f64::max)
    }
}

/// `(upper - lower) / max(|lower|, eps)`, with exact ties (including equal
/// infinities) giving 0.
pub fn relative_gap(lower: ExtReal, upper: ExtReal) -> f64 {
    if lower == upper {
        return 0.0;
    }
    if !lower.is_finite() || !upper.is_finite() {
        return if upper > lower { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    (upper.value() - lower.value()) / lower.value().abs().max(GAP_EPS)
}

fn violates(lower: ExtReal, upper: ExtReal) -> bool {
    if lower <= upper {
        return false;
    }
    if !lower.is_finite() || !upper.is_finite() {
        return true;
    }
    let scale = lower.value().abs().max(upper.value().abs());
    lower.value() - upper.value() > SANDWICH_TOL * scale
}

pub fn check_sandwich(lower: &SlowValueSeq, upper: &SlowValueSeq, x0: &[f64]) -> Result<BoundReport> {
    if lower.values.len() != upper.values.len() {
        return Err(Error::Incompatible(format!(
            "{} lower days vs {} upper days",
            lower.values.len(),
            upper.values.len()
        )));
    }
    let mut days = Vec::with_capacity(lower.values.len());
    for (d, (l, u)) in lower.values.iter().zip(&upper.values).enumerate() {
        if l.grid() != u.grid() {
            return Err(Error::Incompatible(format!("grids differ on day {d}")));
        }
        let mut max_gap = 0.0f64;
        let mut violations = 0;
        for (lv, uv) in l.values().iter().zip(u.values()) {
            max_gap = max_gap.max(relative_gap(*lv, *uv));
            if violates(*lv, *uv) {
                violations += 1;
            }
        }
        let (lx, ux) = (l.eval(x0)?, u.eval(x0)?);
        days.push(DayGap {
            day: d,
            max_rel_gap: max_gap,
            gap_at_x0: relative_gap(lx, ux),
            lower_x0: lx.value(),
            upper_x0: ux.value(),
            violations,
        });
    }
    Ok(BoundReport {
        x0: x0.to_vec(),
        days,
    })
}

/// Relative slack before an increase along an axis counts.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Adjacent pairs along `axis` where `f` increases by more than
/// `MONOTONE_TOL * max(1, |f|)`.
pub fn count_increases(f: &GridValueFn, axis: usize) -> usize {
    let grid = f.grid();
    let stride = grid.strides()[axis];
    let n = grid.shape()[axis];
    let mut count = 0;
    for k in 0..grid.len() {
        if (k / stride) % n + 1 == n {
            continue;
        }
        let (a, b) = (f.at_flat(k), f.at_flat(k + stride));
        if b <= a {
            continue;
        }
        if !a.is_finite() || !b.is_finite() || b.value() - a.value() > MONOTONE_TOL * a.value().abs().max(1.0) {
            count += 1;
        }
    }
    count
}
