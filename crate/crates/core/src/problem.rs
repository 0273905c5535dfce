//! Generic finite two-scale problems: finitely many states, controls and
//! noise atoms per step, with one state space shared by all steps.

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::Grid;
use crate::intraday::fastdp::FastStage;

/// Whether the day-to-day transition is `x_{d+1} = y` or `x_{d+1} <= y`,
/// `y` being the state reached at the end of day `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayDynamics {
    Equality,
    Inequality,
}

/// One step with tabulated cost and transition, indexed
/// `[state][control][atom]` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub n_controls: usize,
    /// Law of the atom index.
    pub noise: DiscreteDist<usize>,
    pub cost: Vec<f64>,
    pub next: Vec<usize>,
}

impl StepSpec {
    #[inline]
    pub fn offset(&self, x: usize, k: usize, a: usize) -> usize {
        (x * self.n_controls + k) * self.noise.len() + a
    }

    #[inline]
    pub fn cost_at(&self, x: usize, k: usize, a: usize) -> f64 {
        self.cost[self.offset(x, k, a)]
    }

    #[inline]
    pub fn next_at(&self, x: usize, k: usize, a: usize) -> usize {
        self.next[self.offset(x, k, a)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteProblem {
    /// Strictly increasing state values; index order is the state order.
    pub states: Vec<f64>,
    /// Steps of each day `0..=D`, all days of equal length.
    pub days: Vec<Vec<StepSpec>>,
    /// Final cost `K` per state.
    pub final_cost: Vec<f64>,
}

impl FiniteProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        Grid::one_dim(self.states.clone())?;
        if self.days.is_empty() {
            return Err(Error::Config("problem has no day".into()));
        }
        let steps = self.days[0].len();
        if steps == 0 || self.days.iter().any(|d| d.len() != steps) {
            return Err(Error::Config("days must have the same positive number of steps".into()));
        }
        if self.final_cost.len() != n || self.final_cost.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("final cost must give one value per state".into()));
        }
        for (d, day) in self.days.iter().enumerate() {
            for (m, s) in day.iter().enumerate() {
                let len = n * s.n_controls * s.noise.len();
                if s.n_controls == 0 || s.cost.len() != len || s.next.len() != len {
                    return Err(Error::Config(format!("step ({d}, {m}) tables have the wrong size")));
                }
                if s.noise.support().iter().enumerate().any(|(i, a)| *a != i) {
                    return Err(Error::Config(format!("step ({d}, {m}) noise must index its atoms")));
                }
                if s.cost.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
                    return Err(Error::Config(format!("step ({d}, {m}) has an invalid cost")));
                }
                if s.next.iter().any(|j| *j >= n) {
                    return Err(Error::Config(format!("step ({d}, {m}) leaves the state space")));
                }
            }
        }
        Ok(())
    }

    /// Index of the last day `D`.
    pub fn last_day(&self) -> usize {
        self.days.len() - 1
    }

    pub fn steps_per_day(&self) -> usize {
        self.days[0].len()
    }

    pub fn state_grid(&self) -> Grid {
        Grid::one_dim(self.states.clone()).expect("validated states")
    }

    /// Fast stages of day `d`.
    pub fn day_stages(&self, d: usize) -> Vec<FiniteStage<'_>> {
        let grid = self.state_grid();
        let controls = self.days[d]
            .iter()
            .map(|s| Grid::one_dim((0..s.n_controls).map(|k| k as f64).collect()).expect("n_controls > 0"))
            .collect::<Vec<_>>();
        self.days[d]
            .iter()
            .zip(controls)
            .map(|(spec, controls)| FiniteStage {
                spec,
                states: &self.states,
                grid: grid.clone(),
                controls,
            })
            .collect()
    }
}

/// A [`StepSpec`] seen as a fast stage; the state coordinate is the state
/// value and must lie on the grid.
pub struct FiniteStage<'a> {
    spec: &'a StepSpec,
    states: &'a [f64],
    grid: Grid,
    controls: Grid,
}

impl FiniteStage<'_> {
    fn index(&self, x: f64) -> usize {
        self.grid.nearest_on_axis(0, x)
    }
}

impl FastStage for FiniteStage<'_> {
    type Noise = usize;

    fn state_grid(&self) -> &Grid {
        &self.grid
    }

    fn control_grid(&self) -> &Grid {
        &self.controls
    }

    fn noise(&self) -> &DiscreteDist<usize> {
        &self.spec.noise
    }

    fn cost(&self, x: &[f64], k: usize, w: &usize) -> ExtReal {
        ExtReal::new(self.spec.cost_at(self.index(x[0]), k, *w))
    }

    fn next_state(&self, x: &[f64], k: usize, w: &usize, out: &mut [f64]) {
        out[0] = self.states[self.spec.next_at(self.index(x[0]), k, *w)];
    }
}
