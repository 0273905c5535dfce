//! Netload and battery-price scenarios: storage, CSV, synthetic generators.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::intraday::classes::{PeriodicityClassMap, DAYS_PER_YEAR};

use super::fit::NetloadLaws;

/// RNG for scenario `index` under a master seed.
pub fn scenario_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Rectangular block of scenarios: netload per (scenario, day, slot) and
/// battery price per (scenario, day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    n: usize,
    days: usize,
    slots: usize,
    netload: Vec<f64>,
    prices: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(n: usize, days: usize, slots: usize, netload: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if netload.len() != n * days * slots {
            return Err(Error::DimensionMismatch {
                expected: n * days * slots,
                got: netload.len(),
            });
        }
        if prices.len() != n * days {
            return Err(Error::DimensionMismatch {
                expected: n * days,
                got: prices.len(),
            });
        }
        if netload.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite netload".into()));
        }
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Config("battery prices must be positive".into()));
        }
        Ok(Self {
            n,
            days,
            slots,
            netload,
            prices,
        })
    }

    pub fn num_scenarios(&self) -> usize {
        self.n
    }

    pub fn num_days(&self) -> usize {
        self.days
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn netload(&self, i: usize, d: usize, m: usize) -> f64 {
        self.netload[(i * self.days + d) * self.slots + m]
    }

    pub fn day_netload(&self, i: usize, d: usize) -> &[f64] {
        let start = (i * self.days + d) * self.slots;
        &self.netload[start..start + self.slots]
    }

    pub fn price(&self, i: usize, d: usize) -> f64 {
        self.prices[i * self.days + d]
    }

    pub fn scenario_prices(&self, i: usize) -> &[f64] {
        &self.prices[i * self.days..(i + 1) * self.days]
    }

    /// Writes `scenario,day,slot,netload_kwh` and `scenario,day,price_usd_per_kwh`.
    pub fn write_csv(&self, netload_path: &Path, price_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(netload_path)?;
        w.write_record(["scenario", "day", "slot", "netload_kwh"])?;
        for i in 0..self.n {
            for d in 0..self.days {
                for m in 0..self.slots {
                    w.write_record(&[
                        i.to_string(),
                        d.to_string(),
                        m.to_string(),
                        format!("{:?}", self.netload(i, d, m)),
                    ])?;
                }
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(price_path)?;
        w.write_record(["scenario", "day", "price_usd_per_kwh"])?;
        for i in 0..self.n {
            for d in 0..self.days {
                w.write_record(&[i.to_string(), d.to_string(), format!("{:?}", self.price(i, d))])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the two CSV files; rows may come in any order but must cover
    /// a full rectangle.
    pub fn read_csv(netload_path: &Path, price_path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct LoadRow {
            scenario: usize,
            day: usize,
            slot: usize,
            netload_kwh: f64,
        }
        #[derive(Deserialize)]
        struct PriceRow {
            scenario: usize,
            day: usize,
            price_usd_per_kwh: f64,
        }
        let loads: Vec<LoadRow> = csv::Reader::from_path(netload_path)?
            .deserialize()
            .collect::<std::result::Result<_, _>>()?;
        let prices: Vec<PriceRow> = csv::Reader::from_path(price_path)?
            .deserialize()
            .collect::<std::result::Result<_, _>>()?;
        let n = loads.iter().map(|r| r.scenario + 1).max().unwrap_or(0);
        let days = loads.iter().map(|r| r.day + 1).max().unwrap_or(0);
        let slots = loads.iter().map(|r| r.slot + 1).max().unwrap_or(0);
        let mut netload = vec![f64::NAN; n * days * slots];
        for r in &loads {
            netload[(r.scenario * days + r.day) * slots + r.slot] = r.netload_kwh;
        }
        let mut price = vec![f64::NAN; n * days];
        for r in &prices {
            if r.scenario >= n || r.day >= days {
                return Err(Error::Config(format!(
                    "price row ({}, {}) outside the netload rectangle",
                    r.scenario, r.day
                )));
            }
            price[r.scenario * days + r.day] = r.price_usd_per_kwh;
        }
        if netload.iter().chain(&price).any(|v| v.is_nan()) {
            return Err(Error::Config("scenario CSV does not cover a full rectangle".into()));
        }
        Self::new(n, days, slots, netload, price)
    }
}

/// Parameters of the synthetic industrial-site netload generator (kWh per
/// half hour): base load, a working-hours block, a seasonal swing, a solar
/// bell and Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticNetload {
    pub base: f64,
    pub working_extra: f64,
    pub working_start_hour: f64,
    pub working_end_hour: f64,
    pub seasonal_amplitude: f64,
    pub solar_peak: f64,
    pub solar_seasonal: f64,
    /// Daily clearness is drawn uniformly from `[cloud_min, 1]`.
    pub cloud_min: f64,
    pub noise_std: f64,
}

impl Default for SyntheticNetload {
    fn default() -> Self {
        Self {
            base: 40.0,
            working_extra: 25.0,
            working_start_hour: 7.0,
            working_end_hour: 19.0,
            seasonal_amplitude: 8.0,
            solar_peak: 45.0,
            solar_seasonal: 25.0,
            cloud_min: 0.3,
            noise_std: 5.0,
        }
    }
}

impl SyntheticNetload {
    /// Netload for `n` scenarios of `days` days with `slots` steps per day.
    pub fn generate(&self, n: usize, days: usize, slots: usize, seed: u64) -> Vec<f64> {
        let noise = Normal::new(0.0, self.noise_std.max(0.0)).expect("finite std");
        let mut out = Vec::with_capacity(n * days * slots);
        let hours_per_slot = 24.0 / slots as f64;
        for i in 0..n {
            let mut rng = scenario_rng(seed, i as u64);
            for d in 0..days {
                let doy = (d % DAYS_PER_YEAR) as f64;
                // +1 in summer, -1 in winter (northern hemisphere)
                let season = -(2.0 * PI * (doy + 10.0) / DAYS_PER_YEAR as f64).cos();
                let clear: f64 = rng.random_range(self.cloud_min.min(1.0)..=1.0);
                for m in 0..slots {
                    let t = (m as f64 + 0.5) * hours_per_slot;
                    let working = t >= self.working_start_hour && t < self.working_end_hour;
                    let mut load = self.base - self.seasonal_amplitude * season;
                    if working {
                        load += self.working_extra;
                    }
                    let sun = (PI * (t - 6.0) / 12.0).sin().max(0.0);
                    let solar = sun * (self.solar_peak + self.solar_seasonal * season).max(0.0) * clear;
                    out.push(load - solar + noise.sample(&mut rng));
                }
            }
        }
        out
    }
}

/// Yearly battery-price forecast in $/kWh; entry `y` is the price at the
/// start of year `y`.
pub fn default_price_forecast() -> Vec<f64> {
    vec![
        0.60, 0.57, 0.54, 0.52, 0.50, 0.47, 0.45, 0.435, 0.42, 0.405, 0.39, 0.375, 0.37, 0.36,
        0.355, 0.345, 0.34, 0.33, 0.325, 0.315, 0.31,
    ]
}

/// Forecast interpolated linearly at day `d`.
pub fn forecast_at(forecast: &[f64], d: usize) -> f64 {
    let t = d as f64 / DAYS_PER_YEAR as f64;
    let y = t.floor() as usize;
    if y + 1 >= forecast.len() {
        return *forecast.last().expect("nonempty forecast");
    }
    let f = t - y as f64;
    forecast[y] * (1.0 - f) + forecast[y + 1] * f
}

/// Daily battery prices (row-major `n x days`): interpolated forecast plus
/// Gaussian noise, truncated below at `floor`.
pub fn gen_battery_price_scenarios(
    forecast: &[f64],
    sigma: f64,
    floor: f64,
    n: usize,
    days: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if forecast.is_empty() {
        return Err(Error::Config("empty price forecast".into()));
    }
    let years_needed = (days.saturating_sub(1)) / DAYS_PER_YEAR + 1;
    if forecast.len() < years_needed {
        return Err(Error::Config(format!(
            "price forecast covers {} years, horizon needs {years_needed}",
            forecast.len()
        )));
    }
    if !(sigma >= 0.0) || !(floor > 0.0) || n == 0 {
        return Err(Error::Config("need sigma >= 0, floor > 0 and n >= 1".into()));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(n * days);
    for i in 0..n {
        // separate stream family from the netload generator
        let mut rng = scenario_rng(seed ^ 0x9e37_79b9_7f4a_7c15, i as u64);
        for d in 0..days {
            let p = forecast_at(forecast, d) + noise.sample(&mut rng);
            out.push(p.max(floor));
        }
    }
    Ok(out)
}

/// Scenarios drawn independently per (day, slot) from the fitted laws, with
/// the daily battery price drawn from that day's law.
pub fn white_noise_resample(
    laws: &NetloadLaws,
    classes: &PeriodicityClassMap,
    price_laws: &[DiscreteDist],
    n: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    let days = classes.num_days();
    if price_laws.len() < days {
        return Err(Error::Incompatible(format!(
            "{} price laws for {days} days",
            price_laws.len()
        )));
    }
    if laws.num_classes() < classes.num_classes() {
        return Err(Error::Incompatible("netload laws do not cover all classes".into()));
    }
    let slots = laws.slots();
    let mut netload = Vec::with_capacity(n * days * slots);
    let mut prices = Vec::with_capacity(n * days);
    for i in 0..n {
        let mut rng = scenario_rng(seed, i as u64);
        for d in 0..days {
            let class = classes.class_of(d);
            for m in 0..slots {
                netload.push(*laws.law(class, m).sample(&mut rng));
            }
            prices.push(*price_laws[d].sample(&mut rng));
        }
    }
    ScenarioSet::new(n, days, slots, netload, prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_reproduces_forecast() {
        let f = default_price_forecast();
        let p = gen_battery_price_scenarios(&f, 0.0, 0.01, 3, 800, 1).unwrap();
        for i in 0..3 {
            for d in 0..800 {
                assert_eq!(p[i * 800 + d], forecast_at(&f, d));
            }
        }
        assert_eq!(forecast_at(&f, 365), 0.57);
        assert!((forecast_at(&f, 365 + 182) - (0.57 * (1.0 - 182.0 / 365.0) + 0.54 * 182.0 / 365.0)).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_prices() {
        let f = default_price_forecast();
        let a = gen_battery_price_scenarios(&f, 0.05, 0.01, 2, 100, 9).unwrap();
        let b = gen_battery_price_scenarios(&f, 0.05, 0.01, 2, 100, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[..100], a[100..]);
    }

    #[test]
    fn floor_truncates() {
        let f = vec![0.0; 3];
        let p = gen_battery_price_scenarios(&f, 5.0, 1.0, 4, 700, 3).unwrap();
        assert!(p.iter().all(|v| *v >= 1.0));
    }

    #[test]
    fn short_forecast_is_rejected() {
        assert!(gen_battery_price_scenarios(&[0.3], 0.0, 0.01, 1, 400, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let netload = SyntheticNetload::default().generate(2, 3, 48, 5);
        let prices = gen_battery_price_scenarios(&default_price_forecast(), 0.04, 0.02, 2, 3, 5).unwrap();
        let set = ScenarioSet::new(2, 3, 48, netload, prices).unwrap();
        let (a, b) = (dir.path().join("n.csv"), dir.path().join("p.csv"));
        set.write_csv(&a, &b).unwrap();
        assert_eq!(ScenarioSet::read_csv(&a, &b).unwrap(), set);
    }

    #[test]
    fn synthetic_profile_has_midday_surplus_in_summer() {
        let g = SyntheticNetload {
            noise_std: 0.0,
            cloud_min: 1.0,
            ..SyntheticNetload::default()
        };
        let v = g.generate(1, 365, 48, 0);
        let summer_noon = v[172 * 48 + 24];
        let summer_night = v[172 * 48 + 2];
        assert!(summer_noon < 0.0, "{summer_noon}");
        assert!(summer_night > 0.0);
    }
}
