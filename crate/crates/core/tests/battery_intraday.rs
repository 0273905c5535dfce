mod common;

use twoscale_core::battery::{BatteryConfig, Tariff};
use twoscale_core::intraday::battery::write_fast_tables;
use twoscale_core::intraday::{
    build_periodicity_classes, compute_price_intraday, compute_resource_intraday, ClassScheme,
    IntradayGrids,
};
use twoscale_core::{DiscreteDist, ExtReal};

const TOL: f64 = 1e-9;

/// Unit battery whose SOC and control steps coincide, so every transition
/// lands on a grid point.
fn lattice_cfg(rates: Vec<f64>) -> BatteryConfig {
    BatteryConfig {
        rho_charge: 1.0,
        rho_discharge: 1.0,
        u_max: 2.0,
        u_min: -2.0,
        max_renewal: 4.0,
        renewal_grid: vec![0.0, 4.0],
        soc_fraction: 1.0,
        tariff: Tariff::new(rates).unwrap(),
        ..BatteryConfig::default()
    }
}

fn lattice_grids() -> IntradayGrids {
    IntradayGrids {
        capacity: vec![0.0, 4.0],
        health_budget: (0..=8).map(|i| i as f64).collect(),
        aging_price: vec![0.0, 0.3, 1.0],
        soc_points: 5,
        control_points: 5,
    }
}

/// Exact-state recursion with plain floats; `budget` is `None` for the
/// price problem.
fn brute(
    laws: &[DiscreteDist],
    rates: &[f64],
    controls: &[f64],
    s_max: f64,
    pi: f64,
    m: usize,
    s: f64,
    budget: Option<f64>,
) -> f64 {
    if m == laws.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for (w, p) in laws[m].iter() {
        let mut best = f64::INFINITY;
        for &u in controls {
            let s1 = s + u;
            if s1 < -TOL || s1 > s_max + TOL {
                continue;
            }
            let b1 = match budget {
                Some(b) if b - u.abs() < -TOL => continue,
                Some(b) => Some(b - u.abs()),
                None => None,
            };
            let c = rates[m] * (w + u).max(0.0) + pi * u.abs();
            best = best.min(c + brute(laws, rates, controls, s_max, pi, m + 1, s1, b1));
        }
        acc += p * best;
    }
    acc
}

fn laws3() -> Vec<DiscreteDist> {
    vec![
        DiscreteDist::new(vec![-2.0, 1.0], vec![0.5, 0.5]).unwrap(),
        DiscreteDist::new(vec![-1.0, 3.0], vec![0.4, 0.6]).unwrap(),
        DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap(),
    ]
}

#[test]
fn price_table_matches_exact_recursion() {
    let rates = vec![0.1, 0.5, 1.0];
    let cfg = lattice_cfg(rates.clone());
    let g = lattice_grids();
    let laws = laws3();
    let t = compute_price_intraday(1, &laws, &cfg, &g).unwrap();
    for (ci, &c) in g.capacity.iter().enumerate() {
        let controls = cfg.control_values(c, g.control_points);
        for (pj, &pi) in g.aging_price.iter().enumerate() {
            let want = brute(&laws, &rates, &controls, cfg.soc_max(c), pi, 0, 0.0, None);
            let got = t.table.at(&[ci, pj]).value();
            assert!((got - want).abs() < TOL, "c={c} pi={pi}: {got} vs {want}");
        }
    }
}

#[test]
fn resource_table_matches_exact_recursion() {
    let rates = vec![0.1, 0.5, 1.0];
    let cfg = lattice_cfg(rates.clone());
    let g = lattice_grids();
    let laws = laws3();
    let t = compute_resource_intraday(1, &laws, &cfg, &g).unwrap();
    for (ci, &c) in g.capacity.iter().enumerate() {
        let controls = cfg.control_values(c, g.control_points);
        for (j, &dh) in g.health_budget.iter().enumerate() {
            let want = brute(&laws, &rates, &controls, cfg.soc_max(c), 0.0, 0, 0.0, Some(dh));
            let got = t.table.at(&[j, ci]).value();
            assert!((got - want).abs() < TOL, "c={c} dh={dh}: {got} vs {want}");
        }
    }
}

#[test]
fn tables_are_monotone_and_weakly_dual() {
    let cfg = common::cfg();
    let g = common::grids();
    let laws = common::netload();
    let (res, pri) = common::tables(&cfg, &g, &laws);
    for (r, p) in res.iter().zip(&pri) {
        for (ci, _) in g.capacity.iter().enumerate() {
            for j in 1..g.health_budget.len() {
                assert!(r.table.at(&[j, ci]) <= r.table.at(&[j - 1, ci]), "resource not nonincreasing in dh");
            }
            for pj in 1..g.aging_price.len() {
                assert!(p.table.at(&[ci, pj - 1]) <= p.table.at(&[ci, pj]), "price not nondecreasing in pi");
            }
            for (pj, pi) in g.aging_price.iter().enumerate() {
                let lp = p.table.at(&[ci, pj]).value();
                for (j, dh) in g.health_budget.iter().enumerate() {
                    let lr = r.table.at(&[j, ci]).value();
                    assert!(lp <= lr + pi * dh + TOL, "weak duality fails at c#{ci} pi={pi} dh={dh}");
                }
            }
        }
        assert!(r.table.values().iter().all(|v| v.is_finite() && v.value() >= 0.0));
        assert!(p.table.values().iter().all(|v| v.is_finite() && v.value() >= 0.0));
    }
}

#[test]
fn no_battery_and_no_budget_rows_are_the_plain_bill() {
    let cfg = common::cfg();
    let g = common::grids();
    let laws = common::netload();
    let (res, pri) = common::tables(&cfg, &g, &laws);
    for class in 1..=2 {
        let bill = common::no_battery_bill(laws.class_laws(class));
        let (r, p) = (&res[class - 1], &pri[class - 1]);
        for j in 0..g.health_budget.len() {
            assert!((r.table.at(&[j, 0]).value() - bill).abs() < TOL);
        }
        for ci in 0..g.capacity.len() {
            assert!((r.table.at(&[0, ci]).value() - bill).abs() < TOL);
        }
        for pj in 0..g.aging_price.len() {
            assert!((p.table.at(&[0, pj]).value() - bill).abs() < TOL);
        }
    }
}

#[test]
fn prohibitive_aging_price_gives_the_plain_bill() {
    let cfg = common::cfg();
    let mut g = common::grids();
    g.aging_price = vec![0.0, 1e9];
    let laws = common::netload();
    let t = compute_price_intraday(1, laws.class_laws(1), &cfg, &g).unwrap();
    let bill = common::no_battery_bill(laws.class_laws(1));
    for ci in 0..g.capacity.len() {
        assert!((t.table.at(&[ci, 1]).value() - bill).abs() < TOL);
        assert!(t.table.at(&[ci, 0]).value() <= bill + TOL);
    }
}

#[test]
fn surplus_then_demand_is_free_with_a_battery() {
    let cfg = lattice_cfg(vec![1.0, 1.0]);
    let g = lattice_grids();
    let laws = vec![DiscreteDist::point(-1.0), DiscreteDist::point(1.0)];
    let t = compute_price_intraday(1, &laws, &cfg, &g).unwrap();
    assert_eq!(t.table.at(&[1, 0]), ExtReal::ZERO);
    assert_eq!(t.table.at(&[0, 0]), ExtReal::new(1.0));
}

#[test]
fn same_class_days_give_identical_bytes() {
    let cfg = common::cfg();
    let g = common::grids();
    let laws = common::netload();
    let classes = build_periodicity_classes(729, 4, &ClassScheme::Trimester).unwrap();
    assert_eq!(classes.class_of(10), classes.class_of(375));
    // class laws are looked up through the class map of each day
    let law_of = |d: usize| laws.class_laws((classes.class_of(d) - 1) % 2 + 1);
    let bytes = |d: usize| {
        let r = compute_resource_intraday(classes.class_of(d), law_of(d), &cfg, &g).unwrap();
        let p = compute_price_intraday(classes.class_of(d), law_of(d), &cfg, &g).unwrap();
        let mut out = Vec::new();
        r.table.write_binary(&mut out).unwrap();
        p.table.write_binary(&mut out).unwrap();
        write_fast_tables(&mut out, &r.cells).unwrap();
        write_fast_tables(&mut out, &p.cells).unwrap();
        out.extend(r.table.to_json().unwrap().into_bytes());
        out
    };
    assert_eq!(bytes(10), bytes(375));
    assert_eq!(bytes(100), bytes(100 + 365));
}
