//! Optimization over the full scenario tree: every node is a noise history,
//! and decisions may depend on the whole history.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::problem::DayDynamics;

use super::tiny::TinyProblem;

/// Largest number of tree nodes explored.
pub const MAX_TREE_NODES: u64 = 1_000_000;

struct Tree<'a> {
    t: &'a TinyProblem,
    dynamics: DayDynamics,
    steps_per_day: usize,
    memo: HashMap<(usize, u64, usize), f64>,
}

impl Tree<'_> {
    fn step_at(&self, t: usize) -> &crate::problem::StepSpec {
        let p = self.t.problem();
        &p.days[t / self.steps_per_day][t % self.steps_per_day]
    }

    /// Optimal cost-to-go from node `(t, history)` entering in state `x`.
    fn value(&mut self, t: usize, history: u64, x: usize) -> f64 {
        let total = self.t.flat_steps();
        if t == total {
            return self.t.problem().final_cost[x];
        }
        if let Some(v) = self.memo.get(&(t, history, x)) {
            return *v;
        }
        let step = self.step_at(t).clone();
        let day_ends = (t + 1).is_multiple_of(self.steps_per_day);
        let atoms = step.noise.len() as u64;
        let mut acc = 0.0;
        for (a, pa) in step.noise.probs().iter().enumerate() {
            if *pa == 0.0 {
                continue;
            }
            let child = history * atoms + a as u64;
            let mut best = f64::INFINITY;
            for k in 0..step.n_controls {
                let c = step.cost_at(x, k, a);
                if c == f64::INFINITY {
                    continue;
                }
                let y = step.next_at(x, k, a);
                let cont = if day_ends && self.dynamics == DayDynamics::Inequality {
                    (0..=y)
                        .map(|z| self.value(t + 1, child, z))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    self.value(t + 1, child, y)
                };
                best = best.min(c + cont);
            }
            acc += pa * best;
        }
        self.memo.insert((t, history, x), acc);
        acc
    }
}

/// Number of nodes of the scenario tree (one per noise history prefix).
pub fn tree_nodes(t: &TinyProblem) -> u64 {
    let p = t.problem();
    let mut nodes = 1u64;
    let mut width = 1u64;
    for step in p.days.iter().flatten() {
        width = width.saturating_mul(step.noise.len() as u64);
        nodes = nodes.saturating_add(width);
    }
    nodes
}

/// Minimal expected cost from state index `x0` over history-dependent
/// policies.
pub fn enumerate_tree(t: &TinyProblem, dynamics: DayDynamics, x0: usize) -> Result<f64> {
    let nodes = tree_nodes(t);
    if nodes > MAX_TREE_NODES {
        return Err(Error::TreeTooLarge {
            nodes,
            limit: MAX_TREE_NODES,
        });
    }
    if x0 >= t.problem().states.len() {
        return Err(Error::Config(format!("initial state {x0} out of range")));
    }
    let mut tree = Tree {
        t,
        dynamics,
        steps_per_day: t.problem().steps_per_day(),
        memo: HashMap::new(),
    };
    Ok(tree.value(0, 0, x0))
}
