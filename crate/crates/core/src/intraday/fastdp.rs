//! Backward dynamic programming over the fast steps of one day.

use rayon::prelude::*;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridValueFn, MAX_DIM};

/// Below this many state points a sweep runs on the calling thread.
const PAR_THRESHOLD: usize = 256;

/// One fast step: state grid, indexed controls, noise law, cost and dynamics.
///
/// `cost` returns `+inf` for infeasible `(x, control)` pairs. `next_state`
/// writes the successor into `out`; the solver clamps it to the next grid.
pub trait FastStage: Sync {
    type Noise: Sync;

    fn state_grid(&self) -> &Grid;

    fn control_grid(&self) -> &Grid;

    fn noise(&self) -> &DiscreteDist<Self::Noise>;

    fn cost(&self, x: &[f64], k: usize, w: &Self::Noise) -> ExtReal;

    fn next_state(&self, x: &[f64], k: usize, w: &Self::Noise, out: &mut [f64]);

    /// True when `next_state` ignores the noise, which lets the solver
    /// evaluate the continuation once per control instead of once per atom.
    fn noise_free_dynamics(&self) -> bool {
        false
    }

    fn num_controls(&self) -> usize {
        self.control_grid().len()
    }
}

/// Value functions `V_0 .. V_{M+1}` of a fast-scale problem; the last entry is
/// the terminal function.
#[derive(Debug, Clone, PartialEq)]
pub struct FastDpSolution {
    pub values: Vec<GridValueFn>,
}

impl FastDpSolution {
    pub fn initial(&self) -> &GridValueFn {
        &self.values[0]
    }

    /// Minimizing control at step `m`, grid point `flat`, noise atom `atom`.
    pub fn argmin<S: FastStage>(
        &self,
        stages: &[S],
        m: usize,
        flat: usize,
        atom: usize,
    ) -> Option<usize> {
        let stage = &stages[m];
        let x = stage.state_grid().point(flat);
        let w = &stage.noise().support()[atom];
        greedy_control(stage, &self.values[m + 1], &x, w, |_| true).map(|(k, _)| k)
    }
}

/// Best control at `x` for a realized noise `w`, among controls accepted by
/// `allow`. Ties go to the smallest control index; `None` when every allowed
/// control has infinite cost.
pub fn greedy_control<S: FastStage + ?Sized>(
    stage: &S,
    next: &GridValueFn,
    x: &[f64],
    w: &S::Noise,
    allow: impl Fn(usize) -> bool,
) -> Option<(usize, ExtReal)> {
    let mut y = [0.0; MAX_DIM];
    let y = &mut y[..next.grid().ndim()];
    let mut best: Option<(usize, ExtReal)> = None;
    for k in 0..stage.num_controls() {
        if !allow(k) {
            continue;
        }
        let c = stage.cost(x, k, w);
        if c.is_pos_inf() {
            continue;
        }
        stage.next_state(x, k, w, y);
        let v = c + next.eval_clamped(y);
        if v.is_pos_inf() {
            continue;
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    best
}

fn stage_value<S: FastStage>(stage: &S, next: &GridValueFn, x: &[f64], cont: &mut Vec<ExtReal>) -> ExtReal {
    let nc = stage.num_controls();
    let noise = stage.noise();
    let mut y = [0.0; MAX_DIM];
    let y = &mut y[..next.grid().ndim()];
    if stage.noise_free_dynamics() {
        cont.clear();
        let w0 = &noise.support()[0];
        for k in 0..nc {
            stage.next_state(x, k, w0, y);
            cont.push(next.eval_clamped(y));
        }
        noise.expectation(|w| {
            let mut best = ExtReal::INFINITY;
            for (k, nv) in cont.iter().enumerate() {
                if nv.is_pos_inf() {
                    continue;
                }
                best = best.min(stage.cost(x, k, w) + *nv);
            }
            best
        })
    } else {
        noise.expectation(|w| {
            let mut best = ExtReal::INFINITY;
            for k in 0..nc {
                let c = stage.cost(x, k, w);
                if c.is_pos_inf() {
                    continue;
                }
                stage.next_state(x, k, w, y);
                best = best.min(c + next.eval_clamped(y));
            }
            best
        })
    }
}

/// One backward step: `V_m` from `V_{m+1}`.
pub fn backward_step<S: FastStage>(stage: &S, next: &GridValueFn) -> GridValueFn {
    let grid = stage.state_grid();
    let eval = |k: usize, x: &mut Vec<f64>, cont: &mut Vec<ExtReal>| {
        grid.point_into(k, x);
        stage_value(stage, next, x, cont)
    };
    let values: Vec<ExtReal> = if grid.len() < PAR_THRESHOLD {
        let mut x = vec![0.0; grid.ndim()];
        let mut cont = Vec::new();
        (0..grid.len()).map(|k| eval(k, &mut x, &mut cont)).collect()
    } else {
        (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; grid.ndim()], Vec::new()),
                |(x, cont), k| eval(k, x, cont),
            )
            .collect()
    };
    GridValueFn::new(grid.clone(), values, next.interp()).expect("length matches grid")
}

/// `V_m(x) = E_w[min_u cost(x,u,w) + V_{m+1}(dyn(x,u,w))]` for every stage,
/// backwards from `terminal`.
pub fn solve_fast_dp<S: FastStage>(stages: &[S], terminal: &GridValueFn) -> Result<FastDpSolution> {
    for (m, s) in stages.iter().enumerate() {
        let next_dim = stages
            .get(m + 1)
            .map_or(terminal.grid().ndim(), |n| n.state_grid().ndim());
        if s.state_grid().ndim() > MAX_DIM || next_dim > MAX_DIM {
            return Err(Error::InvalidGrid("state dimension too large".into()));
        }
        if s.num_controls() == 0 {
            return Err(Error::InvalidGrid(format!("stage {m} has no controls")));
        }
    }
    let mut values = Vec::with_capacity(stages.len() + 1);
    values.push(terminal.clone());
    for stage in stages.iter().rev() {
        let next = values.last().expect("terminal pushed");
        let v = backward_step(stage, next);
        values.push(v);
    }
    values.reverse();
    Ok(FastDpSolution { values })
}
