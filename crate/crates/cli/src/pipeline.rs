//! Pipeline stages: fit, intraday, bellman, simulate, report, verify and
//! complexity. Each stage reads what earlier stages recorded in the manifest.

use std::fmt::Write as _;
use std::io::Cursor;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use twoscale_core::battery::{
    fit_netload_distributions, fit_price_laws, gen_battery_price_scenarios, white_noise_resample,
    NetloadLaws, ScenarioSet,
};
use twoscale_core::grid::GridValueFn;
use twoscale_core::intraday::battery::{read_fast_tables, write_fast_tables};
use twoscale_core::intraday::{
    build_periodicity_classes, compute_price_intraday, compute_resource_intraday, IntradayPriceTable,
    IntradayResourceTable, PeriodicityClassMap,
};
use twoscale_core::oracle::{complexity_estimate, ComplexityEstimate, VariableDims};
use twoscale_core::policy::{
    simulate_policy, Policy, PolicyInputs, PricePolicy, ResourcePolicy, SimulationRecord,
    SimulationSummary,
};
use twoscale_core::slowscale::{
    check_sandwich, count_increases, price_bellman_recursion, resource_bellman_recursion, BoundKind,
    BoundReport, SlowValueSeq,
};
use twoscale_core::DiscreteDist;

use crate::artifacts::{read_bytes, read_json, write_bytes, write_json, Decomposition, Layout, Manifest};
use crate::config::{ModeSelection, RunConfig, ScenarioSource, SeedStream};
use crate::error::CliError;
use crate::verify::{format_table, run_suite, PropertyRow};

pub const STAGE_FIT: &str = "fit";
pub const STAGE_INTRADAY: &str = "intraday";
pub const STAGE_BELLMAN: &str = "bellman";
pub const STAGE_SIMULATE: &str = "simulate";
pub const STAGE_REPORT: &str = "report";

/// Fitted laws and the periodicity classes.
#[derive(Debug, Clone)]
pub struct FitData {
    pub classes: PeriodicityClassMap,
    pub netload: NetloadLaws,
    pub price_laws: Vec<DiscreteDist>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IntradayFile {
    class: usize,
    kind: Decomposition,
    table: GridValueFn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BellmanFile {
    kind: BoundKind,
    day: usize,
    value: GridValueFn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationStats {
    pub summary: SimulationSummary,
    pub totals: Vec<f64>,
    /// Price lower bound at `x0`, for comparison with the mean.
    pub lower_bound_x0: f64,
    pub upper_bound_x0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub x0: Vec<f64>,
    pub lower_x0: f64,
    pub upper_x0: f64,
    pub gap_at_x0: f64,
    pub max_rel_gap: f64,
    pub sandwich_violations: usize,
    pub monotone_violations_price: usize,
    pub monotone_violations_resource: usize,
    pub simulations: Vec<SimulationSummary>,
}

/// Outcome of one `simulate` mode, kept in memory for callers.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub kind: Decomposition,
    pub records: Vec<SimulationRecord>,
    pub stats: SimulationStats,
}

pub struct Pipeline {
    cfg: RunConfig,
    layout: Layout,
    force: bool,
    trajectories: bool,
}

impl Pipeline {
    pub fn new(cfg: RunConfig, out: impl Into<PathBuf>) -> Result<Self, CliError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            layout: Layout::new(out),
            force: false,
            trajectories: false,
        })
    }

    /// Accept artifacts produced under a different config.
    pub fn force(mut self, force: bool) -> Self {
        self.force = force;
        self
    }

    /// Also dump the full simulation records.
    pub fn trajectories(mut self, on: bool) -> Self {
        self.trajectories = on;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    fn manifest(&self) -> Result<Manifest, CliError> {
        Manifest::load_or_fresh(&self.layout, &self.cfg)
    }

    fn finish(&self, m: &mut Manifest, stage: &str, outputs: &[PathBuf], timings: &[(&str, f64)]) -> Result<(), CliError> {
        m.record(stage, &self.layout, outputs);
        for (k, v) in timings {
            m.metadata.timings.insert((*k).to_string(), *v);
        }
        m.save(&self.layout)
    }

    /// Raw scenarios: the configured CSV files or synthetic data.
    pub fn raw_data(&self) -> Result<ScenarioSet, CliError> {
        let cfg = &self.cfg;
        let days = cfg.horizon.last_day + 1;
        let set = match (&cfg.data.netload_csv, &cfg.data.price_csv) {
            (Some(n), Some(p)) => ScenarioSet::read_csv(n, p)?,
            _ => {
                let n = cfg.data.raw_scenarios;
                let seed = cfg.seed_for(SeedStream::Data);
                let slots = cfg.horizon.steps_per_day;
                let netload = cfg.data.synthetic.generate(n, days, slots, seed);
                let prices = gen_battery_price_scenarios(
                    &cfg.data.price_forecast,
                    cfg.data.price_sigma,
                    cfg.data.price_floor,
                    n,
                    days,
                    seed,
                )
                .map_err(|e| CliError::Config(e.to_string()))?;
                ScenarioSet::new(n, days, slots, netload, prices)?
            }
        };
        if set.slots() != cfg.horizon.steps_per_day {
            return Err(CliError::Config(format!(
                "scenario data has {} slots per day, config has {}",
                set.slots(),
                cfg.horizon.steps_per_day
            )));
        }
        Ok(set)
    }

    pub fn fit(&self) -> Result<FitData, CliError> {
        let t0 = Instant::now();
        let cfg = &self.cfg;
        let mut m = self.manifest()?;
        let raw = self.raw_data()?;
        let classes = build_periodicity_classes(cfg.horizon.last_day, cfg.classes.count, &cfg.classes.scheme)?;
        let seed = cfg.seed_for(SeedStream::Fit);
        let netload = fit_netload_distributions(&raw, &classes, cfg.fit.netload_atoms, seed)?;
        let price_laws = fit_price_laws(&raw, classes.num_days(), cfg.fit.price_atoms, seed)?;

        let mut outputs = vec![self.layout.classes(), self.layout.price_law()];
        write_json(&self.layout.classes(), &classes)?;
        write_json(&self.layout.price_law(), &price_laws)?;
        for class in 1..=classes.num_classes() {
            for slot in 0..netload.slots() {
                let p = self.layout.noise_law(class, slot);
                write_json(&p, netload.law(class, slot))?;
                outputs.push(p);
            }
        }
        self.finish(&mut m, STAGE_FIT, &outputs, &[("fit", t0.elapsed().as_secs_f64())])?;
        Ok(FitData {
            classes,
            netload,
            price_laws,
        })
    }

    pub fn load_fit(&self) -> Result<FitData, CliError> {
        self.manifest()?.require(STAGE_FIT, "fitted laws", &self.layout, self.force)?;
        let classes: PeriodicityClassMap = read_json(&self.layout.classes(), "periodicity classes")?;
        let price_laws: Vec<DiscreteDist> = read_json(&self.layout.price_law(), "battery-price laws")?;
        let slots = self.cfg.horizon.steps_per_day;
        let mut laws = Vec::with_capacity(classes.num_classes() * slots);
        for class in 1..=classes.num_classes() {
            for slot in 0..slots {
                laws.push(read_json(&self.layout.noise_law(class, slot), "netload law")?);
            }
        }
        if classes.num_days() != self.cfg.horizon.last_day + 1 {
            return Err(CliError::Config("fitted classes do not match the horizon".into()));
        }
        Ok(FitData {
            classes,
            netload: NetloadLaws::new(slots, laws)?,
            price_laws,
        })
    }

    /// Computes and stores both intraday tables for every class.
    pub fn intraday(&self) -> Result<(Vec<IntradayResourceTable>, Vec<IntradayPriceTable>), CliError> {
        let fit = self.load_fit()?;
        let mut m = self.manifest()?;
        let cfg = &self.cfg;
        let mut outputs = Vec::new();

        let t0 = Instant::now();
        let mut resource = Vec::new();
        for class in 1..=fit.classes.num_classes() {
            let t = compute_resource_intraday(class, fit.netload.class_laws(class), &cfg.battery, &cfg.grids)?;
            outputs.extend(self.store_intraday(Decomposition::Resource, class, &t.table, &t.cells)?);
            resource.push(t);
        }
        let t_resource = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let mut price = Vec::new();
        for class in 1..=fit.classes.num_classes() {
            let t = compute_price_intraday(class, fit.netload.class_laws(class), &cfg.battery, &cfg.grids)?;
            outputs.extend(self.store_intraday(Decomposition::Price, class, &t.table, &t.cells)?);
            price.push(t);
        }
        let t_price = t1.elapsed().as_secs_f64();

        self.finish(
            &mut m,
            STAGE_INTRADAY,
            &outputs,
            &[
                ("intraday_resource", t_resource),
                ("intraday_price", t_price),
                ("intraday", t_resource + t_price),
            ],
        )?;
        Ok((resource, price))
    }

    fn store_intraday(
        &self,
        kind: Decomposition,
        class: usize,
        table: &GridValueFn,
        cells: &[twoscale_core::intraday::FastDpSolution],
    ) -> Result<Vec<PathBuf>, CliError> {
        let json = self.layout.intraday_table(kind, class);
        write_json(
            &json,
            &IntradayFile {
                class,
                kind,
                table: table.clone(),
            },
        )?;
        let bin = self.layout.intraday_fast(kind, class);
        let mut buf = Vec::new();
        write_fast_tables(&mut buf, cells)?;
        write_bytes(&bin, &buf)?;
        Ok(vec![json, bin])
    }

    fn load_intraday_table(&self, kind: Decomposition, class: usize) -> Result<GridValueFn, CliError> {
        let f: IntradayFile = read_json(&self.layout.intraday_table(kind, class), "intraday tables")?;
        if f.class != class || f.kind != kind {
            return Err(CliError::Config(format!("intraday file for class {class} is mislabelled")));
        }
        Ok(f.table)
    }

    fn load_fast(&self, kind: Decomposition, class: usize) -> Result<Vec<twoscale_core::intraday::FastDpSolution>, CliError> {
        let bytes = read_bytes(&self.layout.intraday_fast(kind, class), "intraday tables")?;
        Ok(read_fast_tables(&mut Cursor::new(bytes))?)
    }

    /// Intraday tables; the fast value functions are loaded only when
    /// `with_cells` is set.
    pub fn load_intraday(
        &self,
        fit: &FitData,
        with_cells: bool,
    ) -> Result<(Vec<IntradayResourceTable>, Vec<IntradayPriceTable>), CliError> {
        self.manifest()?.require(STAGE_INTRADAY, "intraday tables", &self.layout, self.force)?;
        let mut resource = Vec::new();
        let mut price = Vec::new();
        for class in 1..=fit.classes.num_classes() {
            resource.push(IntradayResourceTable {
                class,
                table: self.load_intraday_table(Decomposition::Resource, class)?,
                cells: if with_cells {
                    self.load_fast(Decomposition::Resource, class)?
                } else {
                    Vec::new()
                },
            });
            price.push(IntradayPriceTable {
                class,
                table: self.load_intraday_table(Decomposition::Price, class)?,
                cells: if with_cells {
                    self.load_fast(Decomposition::Price, class)?
                } else {
                    Vec::new()
                },
            });
        }
        Ok((resource, price))
    }

    /// Both slow recursions; returns `(lower, upper)`.
    pub fn bellman(&self) -> Result<(SlowValueSeq, SlowValueSeq), CliError> {
        let fit = self.load_fit()?;
        let (resource, price) = self.load_intraday(&fit, false)?;
        let mut m = self.manifest()?;
        let cfg = &self.cfg;
        let slow = cfg.slow_grids();

        let t0 = Instant::now();
        let upper = resource_bellman_recursion(&resource, &fit.classes, &fit.price_laws, &cfg.battery, &slow)?;
        let t_resource = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let lower = price_bellman_recursion(&price, &fit.classes, &fit.price_laws, &cfg.battery, &slow)?;
        let t_price = t1.elapsed().as_secs_f64();

        let mut outputs = Vec::new();
        for (kind, seq) in [(Decomposition::Price, &lower), (Decomposition::Resource, &upper)] {
            for (day, value) in seq.values.iter().enumerate() {
                let p = self.layout.bellman(kind, day);
                write_json(
                    &p,
                    &BellmanFile {
                        kind: seq.kind,
                        day,
                        value: value.clone(),
                    },
                )?;
                outputs.push(p);
            }
        }
        self.finish(
            &mut m,
            STAGE_BELLMAN,
            &outputs,
            &[("bellman_resource", t_resource), ("bellman_price", t_price)],
        )?;
        Ok((lower, upper))
    }

    fn load_seq(&self, kind: Decomposition) -> Result<SlowValueSeq, CliError> {
        let days = self.cfg.horizon.last_day + 2;
        let mut values = Vec::with_capacity(days);
        let mut bound = None;
        for day in 0..days {
            let f: BellmanFile = read_json(&self.layout.bellman(kind, day), "value functions")?;
            if f.day != day {
                return Err(CliError::Config(format!("value file for day {day} is mislabelled")));
            }
            bound = Some(f.kind);
            values.push(f.value);
        }
        Ok(SlowValueSeq {
            kind: bound.expect("at least one day"),
            values,
        })
    }

    /// `(lower, upper)` from disk.
    pub fn load_bellman(&self) -> Result<(SlowValueSeq, SlowValueSeq), CliError> {
        self.manifest()?.require(STAGE_BELLMAN, "value functions", &self.layout, self.force)?;
        Ok((self.load_seq(Decomposition::Price)?, self.load_seq(Decomposition::Resource)?))
    }

    /// Scenarios replayed by `simulate`.
    pub fn simulation_scenarios(&self, fit: &FitData) -> Result<ScenarioSet, CliError> {
        match self.cfg.simulate.source {
            ScenarioSource::WhiteNoise => Ok(white_noise_resample(
                &fit.netload,
                &fit.classes,
                &fit.price_laws,
                self.cfg.simulate.scenarios,
                self.cfg.seed_for(SeedStream::Simulate),
            )?),
            ScenarioSource::Original => self.raw_data(),
        }
    }

    pub fn simulate(&self, mode: ModeSelection) -> Result<Vec<SimulationOutcome>, CliError> {
        let fit = self.load_fit()?;
        let (resource, price) = self.load_intraday(&fit, true)?;
        let (lower, upper) = self.load_bellman()?;
        let mut m = self.manifest()?;
        let cfg = &self.cfg;
        let slow = cfg.slow_grids();
        let inputs = PolicyInputs {
            cfg: &cfg.battery,
            grids: &cfg.grids,
            slow: &slow,
            classes: &fit.classes,
            price_laws: &fit.price_laws,
            netload_laws: &fit.netload,
        };
        let scenarios = self.simulation_scenarios(&fit)?;
        let x0 = cfg.simulate.x0;
        let at_x0 = |s: &SlowValueSeq| -> Result<f64, CliError> { Ok(s.day(0).eval(&[x0.h, x0.c])?.value()) };
        let (lower_x0, upper_x0) = (at_x0(&lower)?, at_x0(&upper)?);

        let kinds: &[Decomposition] = match mode {
            ModeSelection::Price => &[Decomposition::Price],
            ModeSelection::Resource => &[Decomposition::Resource],
            ModeSelection::Both => &[Decomposition::Price, Decomposition::Resource],
        };
        let mut outputs = Vec::new();
        let mut timings = Vec::new();
        let mut outcomes = Vec::new();
        for &kind in kinds {
            let t0 = Instant::now();
            let policy = match kind {
                Decomposition::Price => Policy::Price(PricePolicy::new(&inputs, price.clone(), lower.clone())?),
                Decomposition::Resource => {
                    Policy::Resource(ResourcePolicy::new(&inputs, resource.clone(), upper.clone())?)
                }
            };
            let (records, summary) = simulate_policy(&scenarios, &policy, &inputs, x0)?;
            let stats = SimulationStats {
                summary,
                totals: records.iter().map(|r| r.total_cost).collect(),
                lower_bound_x0: lower_x0,
                upper_bound_x0: upper_x0,
            };
            let csv = self.layout.simulation_csv(kind);
            write_bytes(&csv, simulation_csv(&records).as_bytes())?;
            let json = self.layout.simulation_json(kind);
            write_json(&json, &stats)?;
            outputs.extend([csv, json]);
            if self.trajectories {
                let p = self
                    .layout
                    .simulate_dir()
                    .join(format!("trajectories_{}.json", kind.name()));
                write_json(&p, &records)?;
                outputs.push(p);
            }
            timings.push((kind, t0.elapsed().as_secs_f64()));
            outcomes.push(SimulationOutcome { kind, records, stats });
        }
        // keep outputs of a previous run in the other mode
        if let Some(prev) = m.stages.get(STAGE_SIMULATE) {
            for o in &prev.outputs {
                let p = self.layout.root().join(o);
                if !outputs.contains(&p) && p.exists() {
                    outputs.push(p);
                }
            }
        }
        let named: Vec<(String, f64)> = timings
            .iter()
            .map(|(k, t)| (format!("simulate_{}", k.name()), *t))
            .collect();
        let named_ref: Vec<(&str, f64)> = named.iter().map(|(k, t)| (k.as_str(), *t)).collect();
        self.finish(&mut m, STAGE_SIMULATE, &outputs, &named_ref)?;
        Ok(outcomes)
    }

    /// Sandwich, gaps and monotonicity of the stored value functions.
    pub fn report(&self) -> Result<RunReport, CliError> {
        let (lower, upper) = self.load_bellman()?;
        let mut m = self.manifest()?;
        let x0 = self.cfg.simulate.x0;
        let bounds = check_sandwich(&lower, &upper, &[x0.h, x0.c])?;
        let mono = |s: &SlowValueSeq| s.values.iter().map(|v| count_increases(v, 0)).sum::<usize>();
        let mut simulations = Vec::new();
        if m.stages.contains_key(STAGE_SIMULATE) {
            for kind in [Decomposition::Price, Decomposition::Resource] {
                let p = self.layout.simulation_json(kind);
                if p.exists() {
                    let s: SimulationStats = read_json(&p, "simulation statistics")?;
                    simulations.push(s.summary);
                }
            }
        }
        let first = &bounds.days[0];
        let report = RunReport {
            x0: bounds.x0.clone(),
            lower_x0: first.lower_x0,
            upper_x0: first.upper_x0,
            gap_at_x0: first.gap_at_x0,
            max_rel_gap: bounds.max_rel_gap(),
            sandwich_violations: bounds.total_violations(),
            monotone_violations_price: mono(&lower),
            monotone_violations_resource: mono(&upper),
            simulations,
        };
        let json = self.layout.report_json();
        write_json(&json, &report)?;
        let csv = self.layout.report_csv();
        write_bytes(&csv, gap_csv(&bounds).as_bytes())?;
        self.finish(&mut m, STAGE_REPORT, &[json, csv], &[])?;
        Ok(report)
    }

    pub fn verify(&self) -> Result<Vec<PropertyRow>, CliError> {
        let rows = run_suite(self.cfg.verify.first_seed, self.cfg.verify.instances);
        write_json(&self.layout.verify_json(), &rows)?;
        Ok(rows)
    }

    /// fit, intraday, bellman, simulate and report in sequence.
    pub fn run_all(&self) -> Result<RunReport, CliError> {
        self.fit()?;
        self.intraday()?;
        self.bellman()?;
        self.simulate(self.cfg.simulate.mode)?;
        self.report()
    }
}

/// `scenario_id,total_cost,renewal_days,renewal_sizes`, lists joined by `;`.
pub fn simulation_csv(records: &[SimulationRecord]) -> String {
    let mut out = String::from("scenario_id,total_cost,renewal_days,renewal_sizes\n");
    for r in records {
        let days: Vec<String> = r.renewals.iter().map(|e| e.day.to_string()).collect();
        let sizes: Vec<String> = r.renewals.iter().map(|e| format!("{}", e.size)).collect();
        let _ = writeln!(out, "{},{},{},{}", r.scenario, r.total_cost, days.join(";"), sizes.join(";"));
    }
    out
}

pub fn gap_csv(report: &BoundReport) -> String {
    let mut out = String::from("day,lower_x0,upper_x0,gap_at_x0,max_rel_gap,violations\n");
    for d in &report.days {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            d.day, d.lower_x0, d.upper_x0, d.gap_at_x0, d.max_rel_gap, d.violations
        );
    }
    out
}

pub fn complexity(d: u64, m: u64, i: u64) -> Result<ComplexityEstimate, CliError> {
    complexity_estimate(d, m, i, VariableDims::default()).map_err(|e| CliError::Config(e.to_string()))
}

pub fn format_complexity(d: u64, m: u64, i: u64, c: &ComplexityEstimate) -> String {
    format!(
        "D = {d}, M = {m}, I = {i}\n\
         flat DP ops          {:.3e}\n\
         resource ops         {:.3e} (intraday {:.3e}, recursion {:.3e})\n\
         price ops            {:.3e} (intraday {:.3e}, recursion {:.3e})\n\
         R^R = I/D + 1/M      {:.4} (1/{:.0})\n\
         R^P = I/D + 10/M     {:.4} (1/{:.0})\n",
        c.flat_ops,
        c.resource_intraday_ops + c.resource_recursion_ops,
        c.resource_intraday_ops,
        c.resource_recursion_ops,
        c.price_intraday_ops + c.price_recursion_ops,
        c.price_intraday_ops,
        c.price_recursion_ops,
        c.ratio_resource,
        1.0 / c.ratio_resource,
        c.ratio_price,
        1.0 / c.ratio_price,
    )
}

pub fn verification_error(rows: &[PropertyRow]) -> Option<CliError> {
    if rows.iter().all(|r| r.passed()) {
        None
    } else {
        Some(CliError::Verification(format_table(rows)))
    }
}
