//! Small battery instance shared by the integration tests: 4 slots per day,
//! capacities {0, 100, 200}, two alternating periodicity classes.

#![allow(dead_code)]

use twoscale_core::battery::{BatteryConfig, CycleCount, NetloadLaws, Tariff};
use twoscale_core::intraday::{
    build_periodicity_classes, compute_price_intraday, compute_resource_intraday, ClassScheme,
    IntradayGrids, IntradayPriceTable, IntradayResourceTable, PeriodicityClassMap,
};
use twoscale_core::slowscale::SlowGrids;
use twoscale_core::DiscreteDist;

pub const RATES: [f64; 4] = [0.05, 0.10, 0.30, 0.12];

pub fn cfg() -> BatteryConfig {
    BatteryConfig {
        rho_charge: 0.95,
        rho_discharge: 0.95,
        u_max: 50.0,
        u_min: -50.0,
        max_renewal: 200.0,
        renewal_grid: vec![0.0, 100.0, 200.0],
        soc_fraction: 0.8,
        cycles: CycleCount::constant(4),
        discount: 0.99,
        tariff: Tariff::new(RATES.to_vec()).unwrap(),
        ..BatteryConfig::default()
    }
}

pub fn grids() -> IntradayGrids {
    IntradayGrids {
        capacity: vec![0.0, 100.0, 200.0],
        health_budget: (0..=16).map(|i| 50.0 * i as f64).collect(),
        aging_price: vec![0.0, 0.05, 0.10, 0.15, 0.20],
        soc_points: 9,
        control_points: 5,
    }
}

pub fn slow() -> SlowGrids {
    SlowGrids {
        health: (0..=16).map(|i| 50.0 * i as f64).collect(),
        capacity: vec![0.0, 100.0, 200.0],
    }
}

/// Class 1 has a midday surplus; class 2 is always importing.
pub fn netload() -> NetloadLaws {
    let two = |a: f64, b: f64, p: f64| DiscreteDist::new(vec![a, b], vec![p, 1.0 - p]).unwrap();
    let class1 = vec![
        two(20.0, 35.0, 0.5),
        two(-40.0, -10.0, 0.6),
        two(40.0, 60.0, 0.3),
        two(15.0, 25.0, 0.5),
    ];
    let class2 = vec![
        two(30.0, 40.0, 0.5),
        two(10.0, 30.0, 0.5),
        two(50.0, 70.0, 0.5),
        DiscreteDist::point(20.0),
    ];
    NetloadLaws::new(4, class1.into_iter().chain(class2).collect()).unwrap()
}

/// Days `0..=last_day`, even days in class 1 and odd days in class 2.
pub fn classes(last_day: usize) -> PeriodicityClassMap {
    let even = (0..=last_day).filter(|d| d % 2 == 0).collect();
    let odd = (0..=last_day).filter(|d| d % 2 == 1).collect();
    build_periodicity_classes(last_day, 2, &ClassScheme::Custom { classes: vec![even, odd] }).unwrap()
}

/// Battery-price law with atoms around `level` $/kWh.
pub fn price_laws(days: usize, level: f64) -> Vec<DiscreteDist> {
    (0..days)
        .map(|d| {
            let l = level * (1.0 - 0.01 * d as f64);
            DiscreteDist::new(vec![0.8 * l, l, 1.3 * l], vec![0.25, 0.5, 0.25]).unwrap()
        })
        .collect()
}

pub fn tables(
    cfg: &BatteryConfig,
    grids: &IntradayGrids,
    laws: &NetloadLaws,
) -> (Vec<IntradayResourceTable>, Vec<IntradayPriceTable>) {
    let r = (1..=laws.num_classes())
        .map(|c| compute_resource_intraday(c, laws.class_laws(c), cfg, grids).unwrap())
        .collect();
    let p = (1..=laws.num_classes())
        .map(|c| compute_price_intraday(c, laws.class_laws(c), cfg, grids).unwrap())
        .collect();
    (r, p)
}

/// Expected bill of one day with no battery.
pub fn no_battery_bill(laws: &[DiscreteDist]) -> f64 {
    laws.iter()
        .zip(RATES)
        .map(|(law, rate)| law.iter().map(|(w, p)| p * rate * w.max(0.0)).sum::<f64>())
        .sum()
}
