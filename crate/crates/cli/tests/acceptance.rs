//! Acceptance criteria on the desk-scale synthetic instance. Prints one
//! PASS/FAIL line per criterion and fails if any criterion fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use twoscale_cli::config::ModeSelection;
use twoscale_cli::pipeline::{complexity, RunReport, SimulationOutcome};
use twoscale_cli::verify::run_suite;
use twoscale_cli::{Pipeline, RunConfig};
use twoscale_core::battery::BatteryState;
use twoscale_core::intraday::battery::write_fast_tables;
use twoscale_core::intraday::{compute_price_intraday, compute_resource_intraday};

const ORACLE_INSTANCES: usize = 50;
const ORACLE_SECONDS: f64 = 60.0;
const GAP_THRESHOLD: f64 = 0.15;
const SE_MULTIPLIER: f64 = 3.0;
const COMPLEXITY_TOL: f64 = 0.10;
const PIPELINE_SECONDS: f64 = 15.0 * 60.0;
const SCALING_THREADS: usize = 8;
const SCALING_MIN: f64 = 3.0;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(o: &Outcome) {
    // written straight to the handle so the lines survive output capture
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "ACCEPTANCE {:>2} {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn desk_config() -> RunConfig {
    let cfg = RunConfig::default();
    assert_eq!(cfg.horizon.last_day, 365);
    assert_eq!(cfg.horizon.steps_per_day, 48);
    assert_eq!(cfg.classes.count, 4);
    assert_eq!(cfg.grids.capacity.len(), 16);
    assert_eq!(cfg.grids.aging_price.len(), 5);
    assert_eq!(cfg.grids.health_budget.len(), 61);
    assert_eq!((cfg.grids.soc_points, cfg.grids.control_points), (51, 21));
    assert_eq!(cfg.simulate.scenarios, 100);
    assert_eq!(cfg.simulate.x0, BatteryState::EMPTY);
    cfg
}

struct DeskRun {
    report: RunReport,
    sims: Vec<SimulationOutcome>,
    seconds: f64,
}

fn desk_run(out: &Path) -> DeskRun {
    let p = Pipeline::new(desk_config(), out).unwrap();
    let t0 = Instant::now();
    p.fit().unwrap();
    p.intraday().unwrap();
    p.bellman().unwrap();
    let sims = p.simulate(ModeSelection::Both).unwrap();
    let report = p.report().unwrap();
    DeskRun {
        report,
        sims,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

/// First differing file between two artifact directories, if any.
fn first_difference(a: &Path, b: &Path) -> Option<String> {
    let (fa, fb) = (files_under(a), files_under(b));
    if fa.len() != fb.len() {
        return Some(format!("{} vs {} files in {}", fa.len(), fb.len(), a.display()));
    }
    for (x, y) in fa.iter().zip(&fb) {
        if x.file_name() != y.file_name() || std::fs::read(x).unwrap() != std::fs::read(y).unwrap() {
            return Some(x.display().to_string());
        }
    }
    None
}

fn oracle_criteria() -> Vec<Outcome> {
    let t0 = Instant::now();
    let rows = run_suite(0, ORACLE_INSTANCES);
    let secs = t0.elapsed().as_secs_f64();
    let get = |name: &str| rows.iter().find(|r| r.property == name).unwrap();
    let describe = |names: &[&str]| {
        names
            .iter()
            .map(|n| {
                let r = get(n);
                format!("{n} {}/{} ok (worst {:.1e})", r.instances - r.failures, r.instances, r.worst)
            })
            .collect::<Vec<_>>()
            .join("; ")
    };
    let ok = |names: &[&str]| names.iter().all(|n| get(n).passed() && get(n).instances >= ORACLE_INSTANCES);
    let eq = ["oracle_equivalence_equality", "oracle_equivalence_inequality"];
    vec![
        Outcome {
            id: 1,
            pass: ok(&eq) && secs < ORACLE_SECONDS,
            detail: format!("flat DP = tree enumeration: {}; suite {secs:.2}s (< {ORACLE_SECONDS}s)", describe(&eq)),
        },
        Outcome {
            id: 2,
            pass: ok(&["block_decomposition"]),
            detail: format!("block recursion = flat DP: {}", describe(&["block_decomposition"])),
        },
        Outcome {
            id: 3,
            pass: ok(&["monotone_equal_dynamics", "relaxed_below_equality"]),
            detail: format!(
                "dynamic monotonicity: {}",
                describe(&["monotone_equal_dynamics", "relaxed_below_equality"])
            ),
        },
        Outcome {
            id: 4,
            pass: ok(&["sandwich"]),
            detail: format!("price <= oracle <= resource: {}", describe(&["sandwich"])),
        },
    ]
}

fn periodicity_criterion(out: &Path) -> Outcome {
    let p = Pipeline::new(desk_config(), out).unwrap();
    let fit = p.load_fit().unwrap();
    let cfg = p.config();
    let class = 1;
    let mut days = fit.classes.days_of(class);
    let (d1, d2) = (days.next().unwrap(), days.last().unwrap());
    let bytes = |d: usize| {
        let c = fit.classes.class_of(d);
        let laws = fit.netload.class_laws(c);
        let r = compute_resource_intraday(c, laws, &cfg.battery, &cfg.grids).unwrap();
        let pr = compute_price_intraday(c, laws, &cfg.battery, &cfg.grids).unwrap();
        let mut buf = Vec::new();
        r.table.write_binary(&mut buf).unwrap();
        pr.table.write_binary(&mut buf).unwrap();
        write_fast_tables(&mut buf, &r.cells).unwrap();
        write_fast_tables(&mut buf, &pr.cells).unwrap();
        buf
    };
    let (a, b) = (bytes(d1), bytes(d2));
    Outcome {
        id: 5,
        pass: a == b,
        detail: format!("days {d1} and {d2} of class {class}: {} bytes each, identical = {}", a.len(), a == b),
    }
}

fn simulation_criterion(run: &DeskRun, cfg: &RunConfig) -> Outcome {
    let battery = &cfg.battery;
    let mut pass = true;
    let mut parts = Vec::new();
    for o in &run.sims {
        let s = &o.stats.summary;
        let floor = o.stats.lower_bound_x0 - SE_MULTIPLIER * s.std_error;
        let d = &s.diagnostics;
        let mut bad_states = 0;
        let mut bad_renewals = 0;
        for rec in &o.records {
            bad_states += rec.states.iter().filter(|x| !x.is_admissible(battery)).count();
            for e in &rec.renewals {
                let x = rec.states[e.day + 1];
                let want = BatteryState {
                    s: 0.0,
                    h: battery.health_of_renewal(e.size),
                    c: e.size,
                };
                if x != want {
                    bad_renewals += 1;
                }
            }
        }
        let ok = s.scenarios == cfg.simulate.scenarios
            && s.mean_cost >= floor
            && d.admissibility_violations == 0
            && d.renewal_violations == 0
            && d.health_increases == 0
            && bad_states == 0
            && bad_renewals == 0;
        pass &= ok;
        parts.push(format!(
            "{} mean {:.2} +- {:.2} vs lower - 3se {:.2}, renewals/scenario {:.2}, violations adm {} ren {} states {} post {}",
            o.kind.name(),
            s.mean_cost,
            s.std_error,
            floor,
            s.mean_renewals,
            d.admissibility_violations,
            d.renewal_violations,
            bad_states,
            bad_renewals
        ));
    }
    pass &= run.sims.len() == 2;
    Outcome {
        id: 8,
        pass,
        detail: parts.join("; "),
    }
}

fn complexity_criterion() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, m, i, target) in [(7300u64, 48u64, 4u64, 1.0 / 50.0), (1040, 336, 4, 1.0 / 150.0)] {
        let c = complexity(d, m, i).unwrap();
        let rel = |v: f64| (v - target).abs() / target;
        pass &= rel(c.ratio_resource) <= COMPLEXITY_TOL && rel(c.exact_ratio_resource) <= COMPLEXITY_TOL;
        parts.push(format!(
            "({d},{m},{i}) R^R = 1/{:.1} (exact 1/{:.1}) vs 1/{:.0}",
            1.0 / c.ratio_resource,
            1.0 / c.exact_ratio_resource,
            1.0 / target
        ));
    }
    Outcome {
        id: 9,
        pass,
        detail: parts.join("; "),
    }
}

fn scaling(out: &Path) -> (f64, f64) {
    let time_with = |threads: usize| {
        let dir = out.join(format!("threads{threads}"));
        let p = Pipeline::new(desk_config(), &dir).unwrap();
        p.fit().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let t0 = Instant::now();
        pool.install(|| p.intraday().unwrap());
        t0.elapsed().as_secs_f64()
    };
    (time_with(1), time_with(SCALING_THREADS))
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outcomes = oracle_criteria();
    outcomes.iter().for_each(line);

    let a = tmp.path().join("run_a");
    let run = desk_run(&a);

    let o = periodicity_criterion(&a);
    line(&o);
    outcomes.push(o);

    let r = &run.report;
    let o = Outcome {
        id: 6,
        pass: r.monotone_violations_price == 0 && r.monotone_violations_resource == 0,
        detail: format!(
            "increases in h beyond 1e-9 over all days: price {}, resource {}",
            r.monotone_violations_price, r.monotone_violations_resource
        ),
    };
    line(&o);
    outcomes.push(o);

    let o = Outcome {
        id: 7,
        pass: r.sandwich_violations == 0 && r.lower_x0 <= r.upper_x0 && r.gap_at_x0 <= GAP_THRESHOLD,
        detail: format!(
            "lower {:.2} <= upper {:.2} at x0, gap {:.3}% (<= {}%), max relative gap {:.3e}, grid violations {}",
            r.lower_x0,
            r.upper_x0,
            100.0 * r.gap_at_x0,
            100.0 * GAP_THRESHOLD,
            r.max_rel_gap,
            r.sandwich_violations
        ),
    };
    line(&o);
    outcomes.push(o);

    let o = simulation_criterion(&run, &desk_config());
    line(&o);
    outcomes.push(o);

    let o = complexity_criterion();
    line(&o);
    outcomes.push(o);

    let b = tmp.path().join("run_b");
    desk_run(&b);
    let diffs: Vec<String> = ["bellman", "simulate"]
        .iter()
        .filter_map(|d| first_difference(&a.join(d), &b.join(d)))
        .collect();
    let o = Outcome {
        id: 10,
        pass: diffs.is_empty(),
        detail: format!(
            "bellman/ ({} files) and simulate/ ({} files) byte-identical across two runs{}",
            files_under(&a.join("bellman")).len(),
            files_under(&a.join("simulate")).len(),
            if diffs.is_empty() { String::new() } else { format!("; differs: {}", diffs.join(", ")) }
        ),
    };
    line(&o);
    outcomes.push(o);

    let (t1, t8) = scaling(tmp.path());
    let speedup = t1 / t8;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let o = Outcome {
        id: 11,
        pass: run.seconds < PIPELINE_SECONDS && speedup >= SCALING_MIN,
        detail: format!(
            "end-to-end {:.1}s (< {PIPELINE_SECONDS}s); intraday 1 thread {t1:.1}s, {SCALING_THREADS} threads {t8:.1}s, speedup {speedup:.2}x (>= {SCALING_MIN}x); {cores} core(s) available",
            run.seconds
        ),
    };
    line(&o);
    outcomes.push(o);

    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
