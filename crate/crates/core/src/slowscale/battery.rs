//! Battery recursions on the slow state `(h, c)`; the state of charge is
//! pinned to 0 at day boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::model::BatteryConfig;
use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridValueFn, Interp};
use crate::intraday::battery::{IntradayPriceTable, IntradayResourceTable};
use crate::intraday::classes::PeriodicityClassMap;

use super::{BoundKind, SlowValueSeq};

const H_TOL: f64 = 1e-9;

/// Slow state grid: exchangeable energy and capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowGrids {
    pub health: Vec<f64>,
    pub capacity: Vec<f64>,
}

impl SlowGrids {
    /// Health from 0 to the largest new-battery health with step `step`.
    pub fn uniform(cfg: &BatteryConfig, capacity: Vec<f64>, step: f64) -> Self {
        let top = cfg.max_health();
        let n = (top / step).round() as usize + 1;
        Self {
            health: Grid::uniform_axis(0.0, top, n.max(1)),
            capacity,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(vec![self.health.clone(), self.capacity.clone()])
    }

    pub fn validate(&self, cfg: &BatteryConfig) -> Result<()> {
        self.grid()?;
        if self.health[0] != 0.0 {
            return Err(Error::Config("health grid must start at 0".into()));
        }
        for r in &cfg.renewal_grid {
            let h = cfg.health_of_renewal(*r);
            if !self.health.contains(&h) {
                return Err(Error::Config(format!(
                    "renewal health {h} of size {r} is not on the health grid"
                )));
            }
            if !self.capacity.contains(r) {
                return Err(Error::Config(format!("renewal size {r} is not on the capacity grid")));
            }
        }
        Ok(())
    }

    /// Health indices `j` with `health[j] <= bound`.
    pub fn health_upto(&self, bound: f64) -> std::ops::Range<usize> {
        0..self.health.partition_point(|h| *h <= bound + H_TOL)
    }
}

/// Best renewal after a day ending at `(h, c)` when the battery price is
/// `price`: minimizes `price r + gamma V_{d+1}(psi(h, c, r))`. Ties keep the
/// battery (r = 0), then favour the smaller purchase.
pub fn renewal_decision(v_next: &GridValueFn, cfg: &BatteryConfig, price: f64, h: f64, c: f64) -> (f64, ExtReal) {
    let gamma = cfg.discount;
    let mut best = (0.0, v_next.eval_clamped(&[h, c]).scale(gamma));
    for &r in &cfg.renewal_grid {
        if r <= 0.0 {
            continue;
        }
        let v = ExtReal::new(price * r) + v_next.eval_clamped(&[cfg.health_of_renewal(r), r]).scale(gamma);
        if v < best.1 {
            best = (r, v);
        }
    }
    best
}

/// `G(h', c) = E_p[min_r p r + gamma V_{d+1}(psi(h', c, r))]` on the slow grid,
/// the renewal being chosen after the price is revealed.
pub fn continuation(v_next: &GridValueFn, law: &DiscreteDist, cfg: &BatteryConfig) -> GridValueFn {
    let gamma = cfg.discount;
    // cost of the best purchase for each price atom, independent of (h', c)
    let buy: Vec<ExtReal> = law
        .support()
        .iter()
        .map(|p| {
            cfg.renewal_grid
                .iter()
                .filter(|r| **r > 0.0)
                .map(|r| {
                    ExtReal::new(p * r)
                        + v_next.eval_clamped(&[cfg.health_of_renewal(*r), *r]).scale(gamma)
                })
                .min()
                .unwrap_or(ExtReal::INFINITY)
        })
        .collect();
    let values = v_next
        .values()
        .iter()
        .map(|v| {
            let keep = v.scale(gamma);
            law.probs()
                .iter()
                .zip(&buy)
                .filter(|(p, _)| **p > 0.0)
                .fold(ExtReal::ZERO, |acc, (p, b)| acc + keep.min(*b).scale(*p))
        })
        .collect();
    GridValueFn::new(v_next.grid().clone(), values, v_next.interp()).expect("same grid")
}

fn check_inputs(
    n_tables: usize,
    classes: &PeriodicityClassMap,
    price_laws: &[DiscreteDist],
    slow: &SlowGrids,
    cfg: &BatteryConfig,
) -> Result<()> {
    if n_tables != classes.num_classes() {
        return Err(Error::Incompatible(format!(
            "{n_tables} intraday tables for {} classes",
            classes.num_classes()
        )));
    }
    if price_laws.len() < classes.num_days() {
        return Err(Error::Incompatible(format!(
            "{} battery-price laws for {} days",
            price_laws.len(),
            classes.num_days()
        )));
    }
    slow.validate(cfg)
}

fn final_values(slow: &SlowGrids, cfg: &BatteryConfig) -> Result<GridValueFn> {
    Ok(GridValueFn::from_fn(slow.grid()?, Interp::Multilinear, |x| {
        ExtReal::new(cfg.final_cost.eval(x[0], x[1]))
    }))
}

/// Resource objective for one candidate end-of-day health `h_next`.
#[inline]
pub fn resource_objective(l_r: &GridValueFn, g: &GridValueFn, h: f64, c: f64, j: usize, ci: usize) -> ExtReal {
    let h_next = g.grid().axis(0)[j];
    l_r.eval_clamped(&[h - h_next, c]) + g.at(&[j, ci])
}

/// `V^R_d(h, c) = min_{h' <= min(h, N(c)c)} L^R(h - h', c) + G^R(h', c)`.
pub fn resource_day(l_r: &GridValueFn, g: &GridValueFn, slow: &SlowGrids, cfg: &BatteryConfig) -> GridValueFn {
    let grid = g.grid().clone();
    let nc = slow.capacity.len();
    let values: Vec<ExtReal> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (hi, ci) = (k / nc, k % nc);
            let (h, c) = (slow.health[hi], slow.capacity[ci]);
            slow.health_upto(h.min(cfg.health_max(c)))
                .map(|j| resource_objective(l_r, g, h, c, j, ci))
                .min()
                .unwrap_or(ExtReal::INFINITY)
        })
        .collect();
    GridValueFn::new(grid, values, Interp::Multilinear).expect("same grid")
}

/// `min_{h' <= N(c)c} G^P(h', c) + pi h'` for every `(c, pi)`, row-major.
pub fn price_inner(g: &GridValueFn, slow: &SlowGrids, cfg: &BatteryConfig, pis: &[f64]) -> Vec<ExtReal> {
    let mut out = Vec::with_capacity(slow.capacity.len() * pis.len());
    for (ci, &c) in slow.capacity.iter().enumerate() {
        let range = slow.health_upto(cfg.health_max(c));
        for &pi in pis {
            let v = range
                .clone()
                .map(|j| g.at(&[j, ci]) + ExtReal::new(pi * slow.health[j]))
                .min()
                .unwrap_or(ExtReal::INFINITY);
            out.push(v);
        }
    }
    out
}

/// Price objective `L^P(c, pi) + inner(c, pi) - pi h` at aging price index `pj`.
#[inline]
pub fn price_objective(l_p: &GridValueFn, inner: &[ExtReal], h: f64, ci: usize, pj: usize) -> ExtReal {
    let pis = l_p.grid().axis(1);
    l_p.at(&[ci, pj]) + inner[ci * pis.len() + pj] + ExtReal::new(-pis[pj] * h)
}

/// `V^P_d(h, c) = max_pi L^P(c, pi) + inner(c, pi) - pi h`.
pub fn price_day(l_p: &GridValueFn, inner: &[ExtReal], slow: &SlowGrids) -> Result<GridValueFn> {
    let grid = slow.grid()?;
    let nc = slow.capacity.len();
    let n_pi = l_p.grid().axis(1).len();
    let values: Vec<ExtReal> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (hi, ci) = (k / nc, k % nc);
            (0..n_pi)
                .map(|pj| price_objective(l_p, inner, slow.health[hi], ci, pj))
                .max()
                .unwrap_or(ExtReal::NEG_INFINITY)
        })
        .collect();
    GridValueFn::new(grid, values, Interp::Multilinear)
}

/// Upper bound by resource decomposition, backwards from `K`.
pub fn resource_bellman_recursion(
    tables: &[IntradayResourceTable],
    classes: &PeriodicityClassMap,
    price_laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    slow: &SlowGrids,
) -> Result<SlowValueSeq> {
    check_inputs(tables.len(), classes, price_laws, slow, cfg)?;
    for t in tables {
        if t.table.grid().axis(1) != slow.capacity.as_slice() {
            return Err(Error::Incompatible("resource table capacities differ from the slow grid".into()));
        }
    }
    let mut seq = vec![final_values(slow, cfg)?];
    for d in (0..classes.num_days()).rev() {
        let next = seq.last().expect("final cost pushed");
        let g = continuation(next, &price_laws[d], cfg);
        let l_r = &tables[classes.class_of(d) - 1].table;
        seq.push(resource_day(l_r, &g, slow, cfg));
    }
    seq.reverse();
    Ok(SlowValueSeq {
        kind: BoundKind::ResourceUpper,
        values: seq,
    })
}

/// Lower bound by price decomposition, backwards from `K`.
pub fn price_bellman_recursion(
    tables: &[IntradayPriceTable],
    classes: &PeriodicityClassMap,
    price_laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    slow: &SlowGrids,
) -> Result<SlowValueSeq> {
    check_inputs(tables.len(), classes, price_laws, slow, cfg)?;
    for t in tables {
        if t.table.grid().axis(0) != slow.capacity.as_slice() {
            return Err(Error::Incompatible("price table capacities differ from the slow grid".into()));
        }
    }
    let mut seq = vec![final_values(slow, cfg)?];
    for d in (0..classes.num_days()).rev() {
        let next = seq.last().expect("final cost pushed");
        let g = continuation(next, &price_laws[d], cfg);
        let l_p = &tables[classes.class_of(d) - 1].table;
        let inner = price_inner(&g, slow, cfg, l_p.grid().axis(1));
        seq.push(price_day(l_p, &inner, slow)?);
    }
    seq.reverse();
    Ok(SlowValueSeq {
        kind: BoundKind::PriceLower,
        values: seq,
    })
}
