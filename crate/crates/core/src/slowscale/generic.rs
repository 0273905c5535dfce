//! Recursions on generic finite problems.

use crate::conjugate::fenchel_conjugate;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridValueFn, Interp};
use crate::intraday::fastdp::solve_fast_dp;
use crate::problem::{DayDynamics, FiniteProblem};

use super::{BoundKind, SlowValueSeq};

fn on_states(p: &FiniteProblem, values: Vec<ExtReal>) -> GridValueFn {
    GridValueFn::new(p.state_grid(), values, Interp::Nearest).expect("one value per state")
}

fn final_values(p: &FiniteProblem) -> Vec<ExtReal> {
    p.final_cost.iter().map(|v| ExtReal::new(*v)).collect()
}

/// `V_d(x) = min_r l(x, r) + V_{d+1}(r)`; `l` is indexed `[x][r]`.
pub fn resource_backup(l: &[Vec<ExtReal>], next: &[ExtReal]) -> Vec<ExtReal> {
    l.iter()
        .map(|row| {
            row.iter()
                .zip(next)
                .map(|(a, b)| *a + *b)
                .min()
                .unwrap_or(ExtReal::INFINITY)
        })
        .collect()
}

/// `V_d(x) = max_p l(x, p) + (-V*_{d+1}(p))`; `l` is indexed `[x][p]`.
pub fn price_backup(l: &[Vec<ExtReal>], conj_next: &[ExtReal]) -> Vec<ExtReal> {
    l.iter()
        .map(|row| {
            row.iter()
                .zip(conj_next)
                .map(|(a, c)| *a + (-*c))
                .max()
                .unwrap_or(ExtReal::NEG_INFINITY)
        })
        .collect()
}

/// Bellman recursion by time blocks: each day is solved by the fast engine
/// with the next day's value function as terminal cost. Under inequality
/// dynamics the terminal cost is `min_{x' <= y} V_{d+1}(x')`.
pub fn block_recursion(p: &FiniteProblem, dynamics: DayDynamics) -> Result<SlowValueSeq> {
    p.validate()?;
    let mut seq = vec![on_states(p, final_values(p))];
    for d in (0..=p.last_day()).rev() {
        let next = seq.last().expect("final cost pushed").values().to_vec();
        let end = match dynamics {
            DayDynamics::Equality => next,
            DayDynamics::Inequality => prefix_min(&next),
        };
        let sol = solve_fast_dp(&p.day_stages(d), &on_states(p, end))?;
        seq.push(sol.values[0].clone());
    }
    seq.reverse();
    Ok(SlowValueSeq {
        kind: BoundKind::ExactOracle,
        values: seq,
    })
}

pub(crate) fn prefix_min(v: &[ExtReal]) -> Vec<ExtReal> {
    let mut out = Vec::with_capacity(v.len());
    let mut best = ExtReal::INFINITY;
    for x in v {
        best = best.min(*x);
        out.push(best);
    }
    out
}

/// Upper bound: targets `r` on the state grid, each day must end at or
/// above its target.
pub fn generic_resource_recursion(p: &FiniteProblem) -> Result<SlowValueSeq> {
    p.validate()?;
    let n = p.states.len();
    let mut seq = vec![on_states(p, final_values(p))];
    for d in (0..=p.last_day()).rev() {
        let stages = p.day_stages(d);
        let mut l = vec![vec![ExtReal::INFINITY; n]; n];
        for r in 0..n {
            let target: Vec<ExtReal> = (0..n)
                .map(|y| if y >= r { ExtReal::ZERO } else { ExtReal::INFINITY })
                .collect();
            let sol = solve_fast_dp(&stages, &on_states(p, target))?;
            for (x, row) in l.iter_mut().enumerate() {
                row[r] = sol.values[0].at_flat(x);
            }
        }
        let next = seq.last().expect("final cost pushed").values().to_vec();
        seq.push(on_states(p, resource_backup(&l, &next)));
    }
    seq.reverse();
    Ok(SlowValueSeq {
        kind: BoundKind::ResourceUpper,
        values: seq,
    })
}

/// Lower bound: deterministic nonpositive prices on the end-of-day state.
pub fn generic_price_recursion(p: &FiniteProblem, prices: &Grid) -> Result<SlowValueSeq> {
    p.validate()?;
    if prices.ndim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: prices.ndim(),
        });
    }
    if prices.axis(0).iter().any(|q| *q > 0.0) {
        return Err(Error::Config("prices must be nonpositive".into()));
    }
    let n = p.states.len();
    let mut seq = vec![on_states(p, final_values(p))];
    for d in (0..=p.last_day()).rev() {
        let stages = p.day_stages(d);
        let mut l = vec![Vec::with_capacity(prices.len()); n];
        for &q in prices.axis(0) {
            let terminal: Vec<ExtReal> = p.states.iter().map(|y| ExtReal::new(q * y)).collect();
            let sol = solve_fast_dp(&stages, &on_states(p, terminal))?;
            for (x, row) in l.iter_mut().enumerate() {
                row.push(sol.values[0].at_flat(x));
            }
        }
        let next = seq.last().expect("final cost pushed");
        let conj = fenchel_conjugate(next, prices)?;
        seq.push(on_states(p, price_backup(&l, conj.values())));
    }
    seq.reverse();
    Ok(SlowValueSeq {
        kind: BoundKind::PriceLower,
        values: seq,
    })
}
