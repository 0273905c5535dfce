//! Monte Carlo replay of the price and resource policies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::fit::NetloadLaws;
use crate::battery::model::{fast_dynamics, renewal_dynamics, BatteryConfig, BatteryState};
use crate::battery::scenarios::ScenarioSet;
use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::GridValueFn;
use crate::intraday::battery::{
    price_stages, resource_stages, IntradayGrids, IntradayPriceTable, IntradayResourceTable,
    PriceStage, ResourceStage,
};
use crate::intraday::classes::PeriodicityClassMap;
use crate::intraday::fastdp::greedy_control;
use crate::slowscale::battery::{continuation, price_inner, renewal_decision, SlowGrids};
use crate::slowscale::SlowValueSeq;

use super::select::{select_price, select_resource};

const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    Price,
    Resource,
}

impl PolicyMode {
    pub fn name(self) -> &'static str {
        match self {
            PolicyMode::Price => "price",
            PolicyMode::Resource => "resource",
        }
    }
}

/// Model data shared by both policies.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInputs<'a> {
    pub cfg: &'a BatteryConfig,
    pub grids: &'a IntradayGrids,
    pub slow: &'a SlowGrids,
    pub classes: &'a PeriodicityClassMap,
    pub price_laws: &'a [DiscreteDist],
    pub netload_laws: &'a NetloadLaws,
}

impl PolicyInputs<'_> {
    fn capacity_index(&self, c: f64) -> Result<usize> {
        self.slow
            .capacity
            .iter()
            .position(|v| (v - c).abs() <= STATE_TOL * (1.0 + c))
            .ok_or_else(|| Error::Incompatible(format!("capacity {c} is not on the grid")))
    }

    fn check(&self) -> Result<()> {
        if self.grids.capacity != self.slow.capacity {
            return Err(Error::Incompatible("intraday and slow capacity grids differ".into()));
        }
        if self.price_laws.len() < self.classes.num_days() {
            return Err(Error::Incompatible("fewer battery-price laws than days".into()));
        }
        if self.netload_laws.num_classes() != self.classes.num_classes() {
            return Err(Error::Incompatible("netload laws and class map disagree".into()));
        }
        Ok(())
    }
}

/// Everything the price policy needs, precomputed per day.
pub struct PricePolicy {
    tables: Vec<IntradayPriceTable>,
    values: SlowValueSeq,
    /// `min_{h'} G^P(h', c) + pi h'` per day, row-major over `(c, pi)`.
    inner: Vec<Vec<ExtReal>>,
    /// Replay stages per `(class, c, pi)`.
    stages: Vec<Vec<PriceStage>>,
}

impl PricePolicy {
    pub fn new(inputs: &PolicyInputs<'_>, tables: Vec<IntradayPriceTable>, values: SlowValueSeq) -> Result<Self> {
        inputs.check()?;
        let days = inputs.classes.num_days();
        if values.values.len() != days + 1 {
            return Err(Error::Incompatible("price values do not match the horizon".into()));
        }
        let pis = inputs.grids.aging_price.clone();
        let inner = (0..days)
            .into_par_iter()
            .map(|d| {
                let g = continuation(values.day(d + 1), &inputs.price_laws[d], inputs.cfg);
                price_inner(&g, inputs.slow, inputs.cfg, &pis)
            })
            .collect();
        let mut stages = Vec::new();
        for class in 1..=inputs.classes.num_classes() {
            let laws = inputs.netload_laws.class_laws(class);
            for &c in &inputs.grids.capacity {
                for &pi in &pis {
                    stages.push(price_stages(laws, inputs.cfg, inputs.grids, c, pi)?);
                }
            }
        }
        Ok(Self {
            tables,
            values,
            inner,
            stages,
        })
    }

    /// Aging-price index chosen on day `d` in state `(h, c)`.
    pub fn select(&self, inputs: &PolicyInputs<'_>, h: f64, ci: usize, d: usize) -> usize {
        let table = &self.tables[inputs.classes.class_of(d) - 1].table;
        select_price(table, &self.inner[d], h, ci)
    }
}

/// Everything the resource policy needs, precomputed per day.
pub struct ResourcePolicy {
    tables: Vec<IntradayResourceTable>,
    values: SlowValueSeq,
    /// Continuation `G^R_d` over `(h', c)`.
    cont: Vec<GridValueFn>,
    /// Replay stages per `(class, c)`.
    stages: Vec<Vec<ResourceStage>>,
}

impl ResourcePolicy {
    pub fn new(inputs: &PolicyInputs<'_>, tables: Vec<IntradayResourceTable>, values: SlowValueSeq) -> Result<Self> {
        inputs.check()?;
        let days = inputs.classes.num_days();
        if values.values.len() != days + 1 {
            return Err(Error::Incompatible("resource values do not match the horizon".into()));
        }
        let cont = (0..days)
            .into_par_iter()
            .map(|d| continuation(values.day(d + 1), &inputs.price_laws[d], inputs.cfg))
            .collect();
        let mut stages = Vec::new();
        for class in 1..=inputs.classes.num_classes() {
            let laws = inputs.netload_laws.class_laws(class);
            for &c in &inputs.grids.capacity {
                stages.push(resource_stages(laws, inputs.cfg, inputs.grids, c)?);
            }
        }
        Ok(Self {
            tables,
            values,
            cont,
            stages,
        })
    }

    /// Health-grid index of the end-of-day target chosen on day `d`.
    pub fn select(&self, inputs: &PolicyInputs<'_>, h: f64, ci: usize, d: usize) -> usize {
        let table = &self.tables[inputs.classes.class_of(d) - 1].table;
        let h_max = inputs.cfg.health_max(inputs.slow.capacity[ci]);
        select_resource(table, &self.cont[d], inputs.slow, h, h_max, ci)
    }
}

pub enum Policy {
    Price(PricePolicy),
    Resource(ResourcePolicy),
}

impl Policy {
    pub fn mode(&self) -> PolicyMode {
        match self {
            Policy::Price(_) => PolicyMode::Price,
            Policy::Resource(_) => PolicyMode::Resource,
        }
    }

    fn values(&self) -> &SlowValueSeq {
        match self {
            Policy::Price(p) => &p.values,
            Policy::Resource(r) => &r.values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalEvent {
    pub day: usize,
    pub size: f64,
    pub price: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationDiagnostics {
    /// Steps where a bound of the state or control was violated.
    pub admissibility_violations: usize,
    /// Renewals not followed by `(0, N(r) r, r)`.
    pub renewal_violations: usize,
    /// Days without renewal where the health increased.
    pub health_increases: usize,
    /// States pulled back into their bounds after rounding drift.
    pub clamped_states: usize,
    /// Steps where no replayed control was feasible and 0 was applied.
    pub fallback_controls: usize,
}

impl SimulationDiagnostics {
    fn absorb(&mut self, o: &SimulationDiagnostics) {
        self.admissibility_violations += o.admissibility_violations;
        self.renewal_violations += o.renewal_violations;
        self.health_increases += o.health_increases;
        self.clamped_states += o.clamped_states;
        self.fallback_controls += o.fallback_controls;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub scenario: usize,
    pub total_cost: f64,
    /// State at the start of every day `0..=D+1`.
    pub states: Vec<BatteryState>,
    pub renewals: Vec<RenewalEvent>,
    /// Undiscounted energy bill of every day.
    pub daily_bills: Vec<f64>,
    pub diagnostics: SimulationDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub mode: PolicyMode,
    pub scenarios: usize,
    pub mean_cost: f64,
    pub std_error: f64,
    pub min_cost: f64,
    pub max_cost: f64,
    pub mean_renewals: f64,
    pub diagnostics: SimulationDiagnostics,
}

pub fn summarize(mode: PolicyMode, records: &[SimulationRecord]) -> SimulationSummary {
    let n = records.len();
    let costs: Vec<f64> = records.iter().map(|r| r.total_cost).collect();
    let mean = costs.iter().sum::<f64>() / n.max(1) as f64;
    let var = if n > 1 {
        costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mut diagnostics = SimulationDiagnostics::default();
    for r in records {
        diagnostics.absorb(&r.diagnostics);
    }
    SimulationSummary {
        mode,
        scenarios: n,
        mean_cost: mean,
        std_error: (var / n.max(1) as f64).sqrt(),
        min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
        max_cost: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_renewals: records.iter().map(|r| r.renewals.len()).sum::<usize>() as f64 / n.max(1) as f64,
        diagnostics,
    }
}

/// Replays `policy` on every scenario from `x0`. Each day the slow decision
/// is taken from the value functions, the fast controls from the intraday
/// tables against the realized netload, and the renewal against the battery
/// price atom nearest the realized price.
pub fn simulate_policy(
    scenarios: &ScenarioSet,
    policy: &Policy,
    inputs: &PolicyInputs<'_>,
    x0: BatteryState,
) -> Result<(Vec<SimulationRecord>, SimulationSummary)> {
    let days = inputs.classes.num_days();
    if scenarios.num_days() < days {
        return Err(Error::ScenarioTooShort {
            scenario: 0,
            got: scenarios.num_days(),
            needed: days,
        });
    }
    if scenarios.slots() != inputs.cfg.tariff.slots() {
        return Err(Error::Incompatible(format!(
            "scenarios have {} slots, tariff has {}",
            scenarios.slots(),
            inputs.cfg.tariff.slots()
        )));
    }
    if !x0.is_admissible(inputs.cfg) {
        return Err(Error::Config("initial state violates the battery bounds".into()));
    }
    inputs.capacity_index(x0.c)?;
    let records = (0..scenarios.num_scenarios())
        .into_par_iter()
        .map(|i| simulate_one(scenarios, i, policy, inputs, x0))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(policy.mode(), &records);
    Ok((records, summary))
}

fn simulate_one(
    scenarios: &ScenarioSet,
    i: usize,
    policy: &Policy,
    inputs: &PolicyInputs<'_>,
    x0: BatteryState,
) -> Result<SimulationRecord> {
    let cfg = inputs.cfg;
    let days = inputs.classes.num_days();
    let n_pi = inputs.grids.aging_price.len();
    let n_c = inputs.grids.capacity.len();
    let values = policy.values();
    let mut diag = SimulationDiagnostics::default();
    let mut x = x0;
    let mut states = Vec::with_capacity(days + 1);
    let mut renewals = Vec::new();
    let mut daily_bills = Vec::with_capacity(days);
    let mut total = 0.0;
    let mut discount = 1.0;

    for d in 0..days {
        states.push(x);
        let ci = inputs.capacity_index(x.c)?;
        let class = inputs.classes.class_of(d);
        let h_start = x.h;
        let mut bill = 0.0;
        match policy {
            Policy::Price(p) => {
                let pj = p.select(inputs, x.h, ci, d);
                let table = &p.tables[class - 1];
                let cell = table.cell(ci, pj);
                let stages = &p.stages[((class - 1) * n_c + ci) * n_pi + pj];
                for (m, stage) in stages.iter().enumerate() {
                    let w = scenarios.netload(i, d, m);
                    let h_left = x.h;
                    let k = greedy_control(stage, &cell.values[m + 1], &[x.s], &w, |k| {
                        stage.control_value(k).abs() <= h_left + STATE_TOL
                    })
                    .map(|(k, _)| k);
                    let u = match k {
                        Some(k) => stage.control_value(k),
                        None => {
                            diag.fallback_controls += 1;
                            0.0
                        }
                    };
                    bill += step(cfg, &mut x, u, w, m, &mut diag)?;
                }
            }
            Policy::Resource(r) => {
                let j = r.select(inputs, x.h, ci, d);
                let target = inputs.slow.health[j];
                let mut budget = (x.h - target).max(0.0);
                let table = &r.tables[class - 1];
                let cell = &table.cells[ci];
                let stages = &r.stages[(class - 1) * n_c + ci];
                for (m, stage) in stages.iter().enumerate() {
                    let w = scenarios.netload(i, d, m);
                    let k = greedy_control(stage, &cell.values[m + 1], &[x.s, budget], &w, |_| true)
                        .map(|(k, _)| k);
                    let u = match k {
                        Some(k) => stage.control_value(k),
                        None => {
                            diag.fallback_controls += 1;
                            0.0
                        }
                    };
                    budget = (budget - u.abs()).max(0.0);
                    bill += step(cfg, &mut x, u, w, m, &mut diag)?;
                }
            }
        }
        if x.h > h_start + STATE_TOL {
            diag.health_increases += 1;
        }

        // renewal on the atom nearest the realized price, paid at the realized price
        let observed = scenarios.price(i, d);
        let law = &inputs.price_laws[d];
        let atom = law.support()[law.nearest_atom(observed)];
        let (r, _) = renewal_decision(values.day(d + 1), cfg, atom, x.h, x.c);
        if !cfg.renewal_grid.contains(&r) {
            diag.admissibility_violations += 1;
        }
        x = renewal_dynamics(cfg, x, r);
        if r > 0.0 {
            renewals.push(RenewalEvent {
                day: d,
                size: r,
                price: observed,
            });
            if x != (BatteryState { s: 0.0, h: cfg.health_of_renewal(r), c: r }) {
                diag.renewal_violations += 1;
            }
        }
        total += discount * (bill + observed * r);
        discount *= cfg.discount;
        daily_bills.push(bill);
    }
    states.push(x);
    total += discount * cfg.final_cost.eval(x.h, x.c);
    Ok(SimulationRecord {
        scenario: i,
        total_cost: total,
        states,
        renewals,
        daily_bills,
        diagnostics: diag,
    })
}

/// Applies control `u` against netload `w` in slot `m`; returns the bill.
fn step(
    cfg: &BatteryConfig,
    x: &mut BatteryState,
    u: f64,
    w: f64,
    m: usize,
    diag: &mut SimulationDiagnostics,
) -> Result<f64> {
    if u < cfg.u_min - STATE_TOL || u > cfg.u_max + STATE_TOL {
        diag.admissibility_violations += 1;
    }
    let bill = crate::battery::model::stage_cost(&cfg.tariff, u, w, m)?;
    let mut next = fast_dynamics(cfg, *x, u);
    if !next.is_admissible(cfg) {
        diag.admissibility_violations += 1;
    }
    let s_max = cfg.soc_max(next.c);
    let clamped_s = next.s.clamp(0.0, s_max);
    let clamped_h = next.h.max(0.0);
    if clamped_s != next.s || clamped_h != next.h {
        diag.clamped_states += 1;
        next.s = clamped_s;
        next.h = clamped_h;
    }
    *x = next;
    Ok(bill)
}
