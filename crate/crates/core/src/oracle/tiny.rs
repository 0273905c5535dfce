//! Desk-scale instances small enough for brute force.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::problem::{FiniteProblem, StepSpec};

pub const MAX_DAYS: usize = 4;
pub const MAX_STEPS: usize = 4;
pub const MAX_STATES: usize = 4;
pub const MAX_ATOMS: usize = 3;

/// A [`FiniteProblem`] with at most 4 days of at most 4 steps, 4 states and
/// 3 noise atoms per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyProblem {
    problem: FiniteProblem,
}

impl TinyProblem {
    pub fn new(problem: FiniteProblem) -> Result<Self> {
        problem.validate()?;
        let too_big = problem.days.len() > MAX_DAYS
            || problem.steps_per_day() > MAX_STEPS
            || problem.states.len() > MAX_STATES
            || problem
                .days
                .iter()
                .flatten()
                .any(|s| s.noise.len() > MAX_ATOMS);
        if too_big {
            return Err(Error::Config("instance exceeds tiny-problem limits".into()));
        }
        Ok(Self { problem })
    }

    pub fn problem(&self) -> &FiniteProblem {
        &self.problem
    }

    /// Total number of steps over the horizon.
    pub fn flat_steps(&self) -> usize {
        self.problem.days.len() * self.problem.steps_per_day()
    }
}

/// Size ranges of random instances (inclusive upper bounds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TinyShape {
    pub max_days: usize,
    pub max_steps: usize,
    pub max_states: usize,
    pub max_controls: usize,
    pub max_atoms: usize,
    /// Chance that a `(control, atom)` pair is forbidden on low states.
    pub infeasible_prob: f64,
}

impl Default for TinyShape {
    /// `D, M <= 2`, at most 3 states and 2 atoms.
    fn default() -> Self {
        Self {
            max_days: 3,
            max_steps: 3,
            max_states: 3,
            max_controls: 3,
            max_atoms: 2,
            infeasible_prob: 0.15,
        }
    }
}

fn random_noise(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteDist<usize> {
    let n = rng.random_range(1..=max_atoms);
    if n == 1 {
        return DiscreteDist::point(0);
    }
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut probs: Vec<f64> = w.iter().map(|v| v / total).collect();
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    DiscreteDist::new((0..n).collect(), probs).expect("normalized")
}

/// Values nonincreasing in the state index: a top value plus cumulative
/// nonnegative increments going down.
fn nonincreasing(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[n - 1] = rng.random_range(0.0..3.0);
    for i in (0..n - 1).rev() {
        v[i] = v[i + 1] + rng.random_range(0.0..2.0);
    }
    v
}

fn sizes(rng: &mut ChaCha8Rng, shape: &TinyShape) -> (usize, usize, usize) {
    (
        rng.random_range(1..=shape.max_days.min(MAX_DAYS)),
        rng.random_range(1..=shape.max_steps.min(MAX_STEPS)),
        rng.random_range(2..=shape.max_states.clamp(2, MAX_STATES)),
    )
}

/// Costs nonincreasing and transitions nondecreasing in the state, final
/// cost nonincreasing: relaxing the day-to-day dynamics changes nothing.
pub fn random_monotone(seed: u64, shape: &TinyShape) -> TinyProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_days, n_steps, n) = sizes(&mut rng, shape);
    let mut days = Vec::with_capacity(n_days);
    for _ in 0..n_days {
        let mut steps = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let nc = rng.random_range(1..=shape.max_controls.max(1));
            let noise = random_noise(&mut rng, shape.max_atoms.min(MAX_ATOMS));
            let na = noise.len();
            let mut cost = vec![0.0; n * nc * na];
            let mut next = vec![0usize; n * nc * na];
            for k in 0..nc {
                for a in 0..na {
                    let shift: i64 = rng.random_range(-1..=1);
                    let col = nonincreasing(&mut rng, n);
                    let forbid_below = if rng.random_bool(shape.infeasible_prob) {
                        rng.random_range(1..n)
                    } else {
                        0
                    };
                    for x in 0..n {
                        let o = (x * nc + k) * na + a;
                        cost[o] = if x < forbid_below { f64::INFINITY } else { col[x] };
                        next[o] = (x as i64 + shift).clamp(0, n as i64 - 1) as usize;
                    }
                }
            }
            steps.push(StepSpec {
                n_controls: nc,
                noise,
                cost,
                next,
            });
        }
        days.push(steps);
    }
    let problem = FiniteProblem {
        states: (0..n).map(|i| i as f64).collect(),
        days,
        final_cost: nonincreasing(&mut rng, n),
    };
    TinyProblem::new(problem).expect("generator respects limits")
}

/// Unstructured costs, transitions and final cost.
pub fn random_arbitrary(seed: u64, shape: &TinyShape) -> TinyProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_days, n_steps, n) = sizes(&mut rng, shape);
    let mut days = Vec::with_capacity(n_days);
    for _ in 0..n_days {
        let mut steps = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let nc = rng.random_range(1..=shape.max_controls.max(1));
            let noise = random_noise(&mut rng, shape.max_atoms.min(MAX_ATOMS));
            let len = n * nc * noise.len();
            let cost = (0..len)
                .map(|_| {
                    if rng.random_bool(shape.infeasible_prob) {
                        f64::INFINITY
                    } else {
                        rng.random_range(0.0..5.0)
                    }
                })
                .collect();
            let next = (0..len).map(|_| rng.random_range(0..n)).collect();
            steps.push(StepSpec {
                n_controls: nc,
                noise,
                cost,
                next,
            });
        }
        days.push(steps);
    }
    let problem = FiniteProblem {
        states: (0..n).map(|i| i as f64).collect(),
        days,
        final_cost: (0..n).map(|_| rng.random_range(0.0..6.0)).collect(),
    };
    TinyProblem::new(problem).expect("generator respects limits")
}

/// Deterministic instance where every step costs 1 whatever the control.
pub fn unit_cost_problem(n_days: usize, n_steps: usize, n_states: usize, final_cost: f64) -> TinyProblem {
    let step = StepSpec {
        n_controls: 2,
        noise: DiscreteDist::point(0),
        cost: vec![1.0; n_states * 2],
        next: (0..n_states).flat_map(|x| [x, (x + 1) % n_states]).collect(),
    };
    let problem = FiniteProblem {
        states: (0..n_states).map(|i| i as f64).collect(),
        days: vec![vec![step; n_steps]; n_days],
        final_cost: vec![final_cost; n_states],
    };
    TinyProblem::new(problem).expect("within limits")
}
