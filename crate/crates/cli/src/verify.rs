//! Property table over seeded tiny instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use twoscale_core::grid::Grid;
use twoscale_core::oracle::{
    enumerate_tree, flat_dp_solve, random_arbitrary, random_monotone, TinyProblem, TinyShape,
};
use twoscale_core::problem::DayDynamics;
use twoscale_core::slowscale::{block_recursion, generic_price_recursion, generic_resource_recursion};
use twoscale_core::ExtReal;

pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub property: String,
    pub instances: usize,
    pub failures: usize,
    /// Seeds of the failing instances, for replay.
    pub failing_seeds: Vec<u64>,
    /// Largest violation seen (0 when everything holds).
    pub worst: f64,
}

impl PropertyRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `a <= b + tol`, with `inf <= inf`.
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b || a - b <= EXACT_TOL
}

pub fn eq_tol(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EXACT_TOL
}

fn excess(a: f64, b: f64) -> f64 {
    if a <= b {
        0.0
    } else if a.is_finite() && b.is_finite() {
        a - b
    } else {
        f64::INFINITY
    }
}

fn ext(v: ExtReal) -> f64 {
    v.value()
}

/// Lower-bound price grid shared by the sandwich checks.
pub fn sandwich_prices() -> Grid {
    Grid::one_dim((0..=16).map(|i| -0.5 * (16 - i) as f64).collect()).expect("increasing")
}

fn row(property: &str, seeds: &[u64], check: impl Fn(u64) -> f64 + Sync) -> PropertyRow {
    let results: Vec<(u64, f64)> = seeds.par_iter().map(|s| (*s, check(*s))).collect();
    let failing: Vec<u64> = results.iter().filter(|(_, e)| *e > EXACT_TOL).map(|(s, _)| *s).collect();
    PropertyRow {
        property: property.to_string(),
        instances: seeds.len(),
        failures: failing.len(),
        failing_seeds: failing,
        worst: results.iter().map(|(_, e)| *e).fold(0.0, f64::max),
    }
}

fn flat_vs_tree(t: &TinyProblem, dynamics: DayDynamics) -> f64 {
    let flat = flat_dp_solve(t, dynamics);
    let mut worst = 0.0f64;
    for (x, f) in flat.iter().enumerate() {
        let e = match enumerate_tree(t, dynamics, x) {
            Ok(v) if eq_tol(v, *f) => 0.0,
            Ok(v) => excess(v, *f).max(excess(*f, v)),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(e);
    }
    worst
}

fn block_vs_flat(t: &TinyProblem, dynamics: DayDynamics) -> f64 {
    let flat = flat_dp_solve(t, dynamics);
    let Ok(seq) = block_recursion(t.problem(), dynamics) else {
        return f64::INFINITY;
    };
    flat.iter()
        .zip(seq.day(0).values())
        .map(|(f, b)| {
            let b = ext(*b);
            if eq_tol(*f, b) {
                0.0
            } else {
                excess(*f, b).max(excess(b, *f))
            }
        })
        .fold(0.0, f64::max)
}

fn sandwich(t: &TinyProblem) -> f64 {
    let exact = flat_dp_solve(t, DayDynamics::Inequality);
    let (Ok(lower), Ok(upper)) = (
        generic_price_recursion(t.problem(), &sandwich_prices()),
        generic_resource_recursion(t.problem()),
    ) else {
        return f64::INFINITY;
    };
    let mut worst = 0.0f64;
    for (x, v) in exact.iter().enumerate() {
        let lo = ext(lower.day(0).at_flat(x));
        let up = ext(upper.day(0).at_flat(x));
        if !le_tol(lo, *v) {
            worst = worst.max(excess(lo, *v));
        }
        if !le_tol(*v, up) {
            worst = worst.max(excess(*v, up));
        }
    }
    worst
}

/// Runs every property on `n` instances starting at `first_seed`.
pub fn run_suite(first_seed: u64, n: usize) -> Vec<PropertyRow> {
    let shape = TinyShape::default();
    let seeds: Vec<u64> = (first_seed..first_seed + n as u64).collect();
    vec![
        row("oracle_equivalence_equality", &seeds, |s| {
            flat_vs_tree(&random_arbitrary(s, &shape), DayDynamics::Equality)
        }),
        row("oracle_equivalence_inequality", &seeds, |s| {
            flat_vs_tree(&random_arbitrary(s, &shape), DayDynamics::Inequality)
        }),
        row("block_decomposition", &seeds, |s| {
            let t = random_arbitrary(s, &shape);
            block_vs_flat(&t, DayDynamics::Equality).max(block_vs_flat(&t, DayDynamics::Inequality))
        }),
        row("monotone_equal_dynamics", &seeds, |s| {
            let t = random_monotone(s, &shape);
            let eq = flat_dp_solve(&t, DayDynamics::Equality);
            let ineq = flat_dp_solve(&t, DayDynamics::Inequality);
            eq.iter()
                .zip(&ineq)
                .map(|(a, b)| if eq_tol(*a, *b) { 0.0 } else { excess(*a, *b).max(excess(*b, *a)) })
                .fold(0.0, f64::max)
        }),
        row("relaxed_below_equality", &seeds, |s| {
            let t = random_arbitrary(s, &shape);
            let eq = flat_dp_solve(&t, DayDynamics::Equality);
            let ineq = flat_dp_solve(&t, DayDynamics::Inequality);
            ineq.iter().zip(&eq).map(|(i, e)| excess(*i, *e)).fold(0.0, f64::max)
        }),
        row("sandwich", &seeds, |s| sandwich(&random_monotone(s, &shape))),
    ]
}

pub fn format_table(rows: &[PropertyRow]) -> String {
    let mut out = format!(
        "{:<32} {:>9} {:>8} {:>12}  {}\n",
        "property", "instances", "failures", "worst", "status"
    );
    for r in rows {
        let status = if r.passed() {
            "PASS".to_string()
        } else {
            format!("FAIL seeds {:?}", r.failing_seeds)
        };
        out.push_str(&format!(
            "{:<32} {:>9} {:>8} {:>12.3e}  {}\n",
            r.property, r.instances, r.failures, r.worst, status
        ));
    }
    out
}
