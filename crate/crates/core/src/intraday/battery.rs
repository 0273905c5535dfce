//! Battery intraday problems: resource table `L^R(dh, c)` and price table
//! `L^P(c, pi)`, both starting from an empty battery.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::model::BatteryConfig;
use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridValueFn, Interp};

use super::fastdp::{solve_fast_dp, FastDpSolution, FastStage};

const FAST_MAGIC: &[u8; 4] = b"FDP1";

/// Discretization of the intraday tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntradayGrids {
    /// Capacities, kWh. Must be a subset of the renewal grid.
    pub capacity: Vec<f64>,
    /// Exchangeable-energy budgets, kWh.
    pub health_budget: Vec<f64>,
    /// Nonnegative aging prices, $/kWh.
    pub aging_price: Vec<f64>,
    pub soc_points: usize,
    pub control_points: usize,
}

impl Default for IntradayGrids {
    fn default() -> Self {
        Self {
            capacity: (0..=15).map(|i| 100.0 * i as f64).collect(),
            health_budget: Grid::uniform_axis(0.0, 3000.0, 61),
            aging_price: vec![0.0, 0.05, 0.10, 0.15, 0.20],
            soc_points: 51,
            control_points: 21,
        }
    }
}

impl IntradayGrids {
    pub fn validate(&self, cfg: &BatteryConfig) -> Result<()> {
        Grid::one_dim(self.capacity.clone())?;
        Grid::one_dim(self.health_budget.clone())?;
        Grid::one_dim(self.aging_price.clone())?;
        if self.health_budget[0] != 0.0 {
            return Err(Error::Config("health budget grid must start at 0".into()));
        }
        if self.aging_price.iter().any(|p| *p < 0.0) {
            return Err(Error::Config("aging prices are stored as nonnegative magnitudes".into()));
        }
        if self.capacity.iter().any(|c| !cfg.renewal_grid.contains(c)) {
            return Err(Error::Config("capacity grid must be a subset of the renewal grid".into()));
        }
        if cfg.renewal_grid.iter().any(|r| !self.capacity.contains(r)) {
            return Err(Error::Config("every renewal size needs an intraday row".into()));
        }
        if self.soc_points == 0 || self.control_points == 0 {
            return Err(Error::Config("SOC and control grids need at least one point".into()));
        }
        Ok(())
    }
}

/// Charging and SOC feasibility shared by both intraday problems.
#[derive(Debug, Clone)]
struct Physics {
    rho_c: f64,
    rho_d: f64,
    s_max: f64,
    tol: f64,
}

impl Physics {
    fn new(cfg: &BatteryConfig, c: f64) -> Self {
        let s_max = cfg.soc_max(c);
        Self {
            rho_c: cfg.rho_charge,
            rho_d: cfg.rho_discharge,
            s_max,
            tol: 1e-9 * (1.0 + s_max),
        }
    }

    #[inline]
    fn next_soc(&self, s: f64, u: f64) -> f64 {
        if u >= 0.0 {
            s + self.rho_c * u
        } else {
            s + self.rho_d * u
        }
    }

    #[inline]
    fn soc_ok(&self, s: f64) -> bool {
        s >= -self.tol && s <= self.s_max + self.tol
    }
}

/// Fast step of the resource problem; state `(s, remaining budget)`.
#[derive(Debug, Clone)]
pub struct ResourceStage {
    grid: Grid,
    controls: Grid,
    noise: DiscreteDist,
    rate: f64,
    phys: Physics,
}

impl ResourceStage {
    pub fn control_value(&self, k: usize) -> f64 {
        self.controls.axis(0)[k]
    }
}

impl FastStage for ResourceStage {
    type Noise = f64;

    fn state_grid(&self) -> &Grid {
        &self.grid
    }

    fn control_grid(&self) -> &Grid {
        &self.controls
    }

    fn noise(&self) -> &DiscreteDist {
        &self.noise
    }

    #[inline]
    fn cost(&self, x: &[f64], k: usize, w: &f64) -> ExtReal {
        let u = self.controls.axis(0)[k];
        if !self.phys.soc_ok(self.phys.next_soc(x[0], u)) || x[1] - u.abs() < -self.phys.tol {
            return ExtReal::INFINITY;
        }
        ExtReal::new(self.rate * (w + u).max(0.0))
    }

    #[inline]
    fn next_state(&self, x: &[f64], k: usize, _w: &f64, out: &mut [f64]) {
        let u = self.controls.axis(0)[k];
        out[0] = self.phys.next_soc(x[0], u).clamp(0.0, self.phys.s_max);
        out[1] = (x[1] - u.abs()).max(0.0);
    }

    fn noise_free_dynamics(&self) -> bool {
        true
    }
}

/// Fast step of the price problem; state `s`, aging surcharge `pi |u|`.
#[derive(Debug, Clone)]
pub struct PriceStage {
    grid: Grid,
    controls: Grid,
    noise: DiscreteDist,
    rate: f64,
    pi: f64,
    phys: Physics,
}

impl PriceStage {
    pub fn control_value(&self, k: usize) -> f64 {
        self.controls.axis(0)[k]
    }
}

impl FastStage for PriceStage {
    type Noise = f64;

    fn state_grid(&self) -> &Grid {
        &self.grid
    }

    fn control_grid(&self) -> &Grid {
        &self.controls
    }

    fn noise(&self) -> &DiscreteDist {
        &self.noise
    }

    #[inline]
    fn cost(&self, x: &[f64], k: usize, w: &f64) -> ExtReal {
        let u = self.controls.axis(0)[k];
        if !self.phys.soc_ok(self.phys.next_soc(x[0], u)) {
            return ExtReal::INFINITY;
        }
        ExtReal::new(self.rate * (w + u).max(0.0) + self.pi * u.abs())
    }

    #[inline]
    fn next_state(&self, x: &[f64], k: usize, _w: &f64, out: &mut [f64]) {
        let u = self.controls.axis(0)[k];
        out[0] = self.phys.next_soc(x[0], u).clamp(0.0, self.phys.s_max);
    }

    fn noise_free_dynamics(&self) -> bool {
        true
    }
}

fn check_laws(laws: &[DiscreteDist], cfg: &BatteryConfig) -> Result<()> {
    if laws.len() != cfg.tariff.slots() {
        return Err(Error::Incompatible(format!(
            "{} netload laws for a {}-slot tariff",
            laws.len(),
            cfg.tariff.slots()
        )));
    }
    Ok(())
}

/// Stages of the resource problem at capacity `c`.
pub fn resource_stages(
    laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    grids: &IntradayGrids,
    c: f64,
) -> Result<Vec<ResourceStage>> {
    check_laws(laws, cfg)?;
    let phys = Physics::new(cfg, c);
    let grid = Grid::new(vec![cfg.soc_values(c, grids.soc_points), grids.health_budget.clone()])?;
    let controls = Grid::one_dim(cfg.control_values(c, grids.control_points))?;
    laws.iter()
        .enumerate()
        .map(|(m, law)| {
            Ok(ResourceStage {
                grid: grid.clone(),
                controls: controls.clone(),
                noise: law.clone(),
                rate: cfg.tariff.rate(m)?,
                phys: phys.clone(),
            })
        })
        .collect()
}

/// Stages of the price problem at capacity `c` and aging price `pi`.
pub fn price_stages(
    laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    grids: &IntradayGrids,
    c: f64,
    pi: f64,
) -> Result<Vec<PriceStage>> {
    check_laws(laws, cfg)?;
    let phys = Physics::new(cfg, c);
    let grid = Grid::one_dim(cfg.soc_values(c, grids.soc_points))?;
    let controls = Grid::one_dim(cfg.control_values(c, grids.control_points))?;
    laws.iter()
        .enumerate()
        .map(|(m, law)| {
            Ok(PriceStage {
                grid: grid.clone(),
                controls: controls.clone(),
                noise: law.clone(),
                rate: cfg.tariff.rate(m)?,
                pi,
                phys: phys.clone(),
            })
        })
        .collect()
}

/// `L^R(dh, c)` for one class, with the fast value functions of every
/// capacity row kept for policy replay.
#[derive(Debug, Clone, PartialEq)]
pub struct IntradayResourceTable {
    pub class: usize,
    /// Axes `(dh, c)`.
    pub table: GridValueFn,
    /// Fast value functions over `(s, budget)`, one solution per capacity.
    pub cells: Vec<FastDpSolution>,
}

/// `L^P(c, pi)` for one class, with fast value functions per `(c, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntradayPriceTable {
    pub class: usize,
    /// Axes `(c, pi)`.
    pub table: GridValueFn,
    /// Fast value functions over `s`, row-major over `(c, pi)`.
    pub cells: Vec<FastDpSolution>,
}

impl IntradayPriceTable {
    pub fn cell(&self, ci: usize, pj: usize) -> &FastDpSolution {
        &self.cells[ci * self.table.grid().axis(1).len() + pj]
    }
}

pub fn compute_resource_intraday(
    class: usize,
    laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    grids: &IntradayGrids,
) -> Result<IntradayResourceTable> {
    let dh = grids.health_budget.clone();
    let cells = grids
        .capacity
        .par_iter()
        .map(|&c| {
            let stages = resource_stages(laws, cfg, grids, c)?;
            let terminal = GridValueFn::constant(stages[0].grid.clone(), ExtReal::ZERO, Interp::Multilinear);
            solve_fast_dp(&stages, &terminal)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_dh = dh.len();
    let n_c = grids.capacity.len();
    let mut values = vec![ExtReal::ZERO; n_dh * n_c];
    for (ci, sol) in cells.iter().enumerate() {
        for j in 0..n_dh {
            // s = 0 is index 0 on the SOC axis
            values[j * n_c + ci] = sol.initial().at(&[0, j]);
        }
    }
    let grid = Grid::new(vec![dh, grids.capacity.clone()])?;
    Ok(IntradayResourceTable {
        class,
        table: GridValueFn::new(grid, values, Interp::Multilinear)?,
        cells,
    })
}

pub fn compute_price_intraday(
    class: usize,
    laws: &[DiscreteDist],
    cfg: &BatteryConfig,
    grids: &IntradayGrids,
) -> Result<IntradayPriceTable> {
    let n_pi = grids.aging_price.len();
    let pairs: Vec<(f64, f64)> = grids
        .capacity
        .iter()
        .flat_map(|c| grids.aging_price.iter().map(move |p| (*c, *p)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(c, pi)| {
            let stages = price_stages(laws, cfg, grids, c, pi)?;
            let terminal = GridValueFn::constant(stages[0].grid.clone(), ExtReal::ZERO, Interp::Multilinear);
            solve_fast_dp(&stages, &terminal)
        })
        .collect::<Result<Vec<_>>>()?;
    let values = cells.iter().map(|s| s.initial().at_flat(0)).collect();
    let grid = Grid::new(vec![grids.capacity.clone(), grids.aging_price.clone()])?;
    debug_assert_eq!(grid.len(), n_pi * grids.capacity.len());
    Ok(IntradayPriceTable {
        class,
        table: GridValueFn::new(grid, values, Interp::Multilinear)?,
        cells,
    })
}

/// Binary container of fast value functions: magic, count, then each step
/// count followed by the binary tables.
pub fn write_fast_tables<W: Write>(w: &mut W, cells: &[FastDpSolution]) -> Result<()> {
    w.write_all(FAST_MAGIC)?;
    w.write_all(&(cells.len() as u64).to_le_bytes())?;
    for sol in cells {
        w.write_all(&(sol.values.len() as u64).to_le_bytes())?;
        for v in &sol.values {
            v.write_binary(w)?;
        }
    }
    Ok(())
}

pub fn read_fast_tables<R: Read>(r: &mut R) -> Result<Vec<FastDpSolution>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FAST_MAGIC {
        return Err(Error::InvalidGrid("bad fast-table header".into()));
    }
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    let mut cells = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        r.read_exact(&mut b)?;
        let steps = u64::from_le_bytes(b) as usize;
        let values = (0..steps)
            .map(|_| GridValueFn::read_binary(r))
            .collect::<Result<Vec<_>>>()?;
        cells.push(FastDpSolution { values });
    }
    Ok(cells)
}
