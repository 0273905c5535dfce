//! Daily slow-scale decisions read off the value functions.

use crate::extreal::ExtReal;
use crate::grid::GridValueFn;
use crate::slowscale::battery::{price_objective, resource_objective, SlowGrids};

/// Aging-price index maximizing `L^P(c, pi) + inner(c, pi) - pi h`; ties go
/// to the smallest price.
pub fn select_price(l_p: &GridValueFn, inner: &[ExtReal], h: f64, ci: usize) -> usize {
    let n_pi = l_p.grid().axis(1).len();
    let mut best = (0, price_objective(l_p, inner, h, ci, 0));
    for pj in 1..n_pi {
        let v = price_objective(l_p, inner, h, ci, pj);
        if v > best.1 {
            best = (pj, v);
        }
    }
    best.0
}

/// Health-grid index of the end-of-day target minimizing
/// `L^R(h - h', c) + G^R(h', c)` over `h' <= min(h, h_max)`; ties go to the
/// largest target (least aging).
pub fn select_resource(
    l_r: &GridValueFn,
    g: &GridValueFn,
    slow: &SlowGrids,
    h: f64,
    h_max: f64,
    ci: usize,
) -> usize {
    let c = slow.capacity[ci];
    let mut best: Option<(usize, ExtReal)> = None;
    for j in slow.health_upto(h.min(h_max)) {
        let v = resource_objective(l_r, g, h, c, j, ci);
        if best.is_none_or(|(_, b)| v <= b) {
            best = Some((j, v));
        }
    }
    best.map_or(0, |(j, _)| j)
}
