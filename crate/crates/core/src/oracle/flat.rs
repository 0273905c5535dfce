//! Backward dynamic programming over every step of the horizon at once.

use crate::problem::DayDynamics;

use super::tiny::TinyProblem;

/// `min_{x' <= y} v(x')` for every `y`.
fn relax(v: &[f64]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    v.iter()
        .map(|x| {
            best = best.min(*x);
            best
        })
        .collect()
}

/// Value at the first step for every initial state. Under inequality
/// dynamics each day may end in any state below the one reached, which is a
/// nonnegative slack on the day-to-day transition.
pub fn flat_dp_solve(t: &TinyProblem, dynamics: DayDynamics) -> Vec<f64> {
    let p = t.problem();
    let n = p.states.len();
    let mut v = p.final_cost.clone();
    for day in p.days.iter().rev() {
        if dynamics == DayDynamics::Inequality {
            v = relax(&v);
        }
        for step in day.iter().rev() {
            let mut out = vec![0.0; n];
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (a, pa) in step.noise.probs().iter().enumerate() {
                    if *pa == 0.0 {
                        continue;
                    }
                    let mut best = f64::INFINITY;
                    for k in 0..step.n_controls {
                        let c = step.cost_at(x, k, a) + v[step.next_at(x, k, a)];
                        if c < best {
                            best = c;
                        }
                    }
                    acc += pa * best;
                }
                *o = acc;
            }
            v = out;
        }
    }
    v
}
