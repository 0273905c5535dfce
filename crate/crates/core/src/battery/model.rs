//! Battery physics, tariff and cost parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SLOTS_PER_DAY: usize = 48;

pub const OFF_PEAK_RATE: f64 = 0.0255;
pub const SHOULDER_RATE: f64 = 0.0644;
pub const PEAK_RATE: f64 = 0.2485;

/// Slack allowed when checking bounds on computed states.
pub const BOUND_TOL: f64 = 1e-9;

/// Energy price per half-hour slot, slot 0 starting at 00:00.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Tariff {
    rates: Vec<f64>,
}

impl Tariff {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Config("tariff has no slots".into()));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Config("tariff rates must be finite and nonnegative".into()));
        }
        Ok(Self { rates })
    }

    /// Off-peak 22:00-7:00, shoulder 7:00-17:00, peak 17:00-22:00.
    pub fn time_of_use() -> Self {
        let rates = (0..SLOTS_PER_DAY)
            .map(|m| match m {
                14..=33 => SHOULDER_RATE,
                34..=43 => PEAK_RATE,
                _ => OFF_PEAK_RATE,
            })
            .collect();
        Self { rates }
    }

    pub fn rate(&self, m: usize) -> Result<f64> {
        self.rates.get(m).copied().ok_or(Error::TariffSlot(m))
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn slots(&self) -> usize {
        self.rates.len()
    }
}

impl Default for Tariff {
    fn default() -> Self {
        Self::time_of_use()
    }
}

impl TryFrom<Vec<f64>> for Tariff {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Tariff::new(v)
    }
}

impl From<Tariff> for Vec<f64> {
    fn from(t: Tariff) -> Self {
        t.rates
    }
}

/// Default time-of-use rate of slot `m`.
pub fn tariff_rate(m: usize) -> Result<f64> {
    if m >= SLOTS_PER_DAY {
        return Err(Error::TariffSlot(m));
    }
    Tariff::time_of_use().rate(m)
}

/// Full-cycle count as a function of capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCount {
    pub default: u32,
    /// Exact-capacity overrides `(capacity kWh, cycles)`.
    #[serde(default)]
    pub overrides: Vec<(f64, u32)>,
}

impl CycleCount {
    pub fn constant(n: u32) -> Self {
        Self {
            default: n,
            overrides: Vec::new(),
        }
    }

    pub fn at(&self, c: f64) -> u32 {
        self.overrides
            .iter()
            .find(|(cap, _)| *cap == c)
            .map_or(self.default, |(_, n)| *n)
    }

    /// Exchangeable energy of a new battery of capacity `c`.
    pub fn health_of_new(&self, c: f64) -> f64 {
        self.at(c) as f64 * c
    }
}

/// Cost charged on the state after the last day. Every variant is
/// nonnegative and nonincreasing in `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FinalCost {
    #[default]
    Zero,
    Constant { value: f64 },
    /// `rate * max(0, target - h)`.
    HealthShortfall { rate: f64, target: f64 },
}

impl FinalCost {
    pub fn eval(&self, h: f64, _c: f64) -> f64 {
        match *self {
            FinalCost::Zero => 0.0,
            FinalCost::Constant { value } => value,
            FinalCost::HealthShortfall { rate, target } => rate * (target - h).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub rho_charge: f64,
    pub rho_discharge: f64,
    /// Charge bound per half hour, kWh.
    pub u_max: f64,
    /// Discharge bound per half hour, kWh (negative).
    pub u_min: f64,
    pub max_renewal: f64,
    pub renewal_grid: Vec<f64>,
    /// Usable fraction of the capacity.
    pub soc_fraction: f64,
    pub cycles: CycleCount,
    pub discount: f64,
    pub final_cost: FinalCost,
    pub tariff: Tariff,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        let max_renewal = 1500.0;
        Self {
            rho_charge: 0.95,
            rho_discharge: 0.95,
            u_max: max_renewal / 10.0,
            u_min: -max_renewal / 10.0,
            max_renewal,
            renewal_grid: (0..=15).map(|i| 100.0 * i as f64).collect(),
            soc_fraction: 0.8,
            cycles: CycleCount::constant(4),
            discount: 0.99986,
            final_cost: FinalCost::Zero,
            tariff: Tariff::time_of_use(),
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.rho_charge) || !unit(self.rho_discharge) {
            return Err(Error::Config("charge/discharge coefficients must lie in (0, 1]".into()));
        }
        if !(self.u_min < 0.0 && self.u_max > 0.0) {
            return Err(Error::Config("control bounds must satisfy u_min < 0 < u_max".into()));
        }
        if !unit(self.soc_fraction) {
            return Err(Error::Config("soc_fraction must lie in (0, 1]".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config("discount must lie in (0, 1]".into()));
        }
        if self.renewal_grid.first() != Some(&0.0) {
            return Err(Error::Config("renewal grid must start at 0 (no renewal)".into()));
        }
        if self.renewal_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("renewal grid must be strictly increasing".into()));
        }
        if self.renewal_grid.iter().any(|r| *r > self.max_renewal) {
            return Err(Error::Config("renewal grid exceeds max_renewal".into()));
        }
        if self.cycles.default == 0 {
            return Err(Error::Config("cycle count must be positive".into()));
        }
        Ok(())
    }

    pub fn soc_max(&self, c: f64) -> f64 {
        self.soc_fraction * c
    }

    pub fn health_max(&self, c: f64) -> f64 {
        self.cycles.health_of_new(c)
    }

    /// Largest exchangeable energy any renewal can provide.
    pub fn max_health(&self) -> f64 {
        self.renewal_grid
            .iter()
            .map(|r| self.health_of_renewal(*r))
            .fold(0.0, f64::max)
    }

    pub fn health_of_renewal(&self, r: f64) -> f64 {
        self.cycles.health_of_new(r)
    }

    /// Control values for capacity `c`: 0 plus points spread over the
    /// reachable discharge and charge ranges. A capacity of 0 gets `{0}`.
    pub fn control_values(&self, c: f64, n: usize) -> Vec<f64> {
        if c <= 0.0 || n <= 1 {
            return vec![0.0];
        }
        let n_neg = (n - 1) / 2;
        let n_pos = n - 1 - n_neg;
        let lo = self.u_min.max(-self.soc_max(c) / self.rho_discharge);
        let hi = self.u_max.min(self.soc_max(c) / self.rho_charge);
        let mut out: Vec<f64> = (0..n_neg)
            .map(|i| lo * (n_neg - i) as f64 / n_neg as f64)
            .collect();
        out.push(0.0);
        out.extend((1..=n_pos).map(|i| hi * i as f64 / n_pos as f64));
        out
    }

    /// SOC breakpoints `n` uniform points on `[0, soc_max(c)]`.
    pub fn soc_values(&self, c: f64, n: usize) -> Vec<f64> {
        if c <= 0.0 || n <= 1 {
            return vec![0.0];
        }
        crate::grid::Grid::uniform_axis(0.0, self.soc_max(c), n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    /// State of charge, kWh.
    pub s: f64,
    /// Remaining exchangeable energy, kWh.
    pub h: f64,
    /// Capacity, kWh.
    pub c: f64,
}

impl BatteryState {
    pub const EMPTY: BatteryState = BatteryState {
        s: 0.0,
        h: 0.0,
        c: 0.0,
    };

    /// Checks `0 <= s <= alpha c`, `0 <= h <= N(c) c`, `0 <= c <= max renewal`.
    pub fn is_admissible(&self, cfg: &BatteryConfig) -> bool {
        let tol = BOUND_TOL * (1.0 + self.c);
        self.s >= -tol
            && self.s <= cfg.soc_max(self.c) + tol
            && self.h >= -tol
            && self.h <= cfg.health_max(self.c) + tol
            && self.c >= 0.0
            && self.c <= cfg.max_renewal
    }
}

/// Half-hour transition; no clamping.
pub fn fast_dynamics(cfg: &BatteryConfig, x: BatteryState, u: f64) -> BatteryState {
    let up = u.max(0.0);
    let um = (-u).max(0.0);
    BatteryState {
        s: x.s + cfg.rho_charge * up - cfg.rho_discharge * um,
        h: x.h - up - um,
        c: x.c,
    }
}

/// End-of-day renewal: a new battery of capacity `r > 0` is empty with full
/// exchangeable energy.
pub fn renewal_dynamics(cfg: &BatteryConfig, x: BatteryState, r: f64) -> BatteryState {
    if r > 0.0 {
        BatteryState {
            s: 0.0,
            h: cfg.health_of_renewal(r),
            c: r,
        }
    } else {
        x
    }
}

/// Bill of slot `m`: surplus is wasted, never sold.
pub fn stage_cost(tariff: &Tariff, u: f64, w: f64, m: usize) -> Result<f64> {
    Ok(tariff.rate(m)? * (w + u).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cfg() -> BatteryConfig {
        BatteryConfig {
            rho_charge: 1.0,
            rho_discharge: 1.0,
            ..BatteryConfig::default()
        }
    }

    #[test]
    fn charge_and_discharge() {
        let cfg = unit_cfg();
        let x = fast_dynamics(&cfg, BatteryState { s: 0.0, h: 10.0, c: 100.0 }, 2.0);
        assert_eq!(x, BatteryState { s: 2.0, h: 8.0, c: 100.0 });
        let x = fast_dynamics(&cfg, BatteryState { s: 5.0, h: 10.0, c: 100.0 }, -2.0);
        assert_eq!(x, BatteryState { s: 3.0, h: 8.0, c: 100.0 });
        let x0 = BatteryState { s: 1.0, h: 3.0, c: 100.0 };
        assert_eq!(fast_dynamics(&cfg, x0, 0.0), x0);
    }

    #[test]
    fn renewal() {
        let cfg = BatteryConfig::default();
        let x = BatteryState { s: 3.0, h: 8.0, c: 100.0 };
        assert_eq!(renewal_dynamics(&cfg, x, 100.0), BatteryState { s: 0.0, h: 400.0, c: 100.0 });
        assert_eq!(renewal_dynamics(&cfg, x, 0.0), x);
        assert_eq!(renewal_dynamics(&cfg, x, 1500.0), BatteryState { s: 0.0, h: 6000.0, c: 1500.0 });
    }

    #[test]
    fn tariff_windows() {
        assert_eq!(tariff_rate(46).unwrap(), 0.0255);
        assert_eq!(tariff_rate(24).unwrap(), 0.0644);
        assert_eq!(tariff_rate(36).unwrap(), 0.2485);
        assert_eq!(tariff_rate(13).unwrap(), 0.0255);
        assert_eq!(tariff_rate(14).unwrap(), 0.0644);
        assert_eq!(tariff_rate(44).unwrap(), 0.0255);
        assert!(matches!(tariff_rate(48), Err(Error::TariffSlot(48))));
    }

    #[test]
    fn tariff_day_integral() {
        let t = Tariff::time_of_use();
        let day: f64 = (0..48).map(|m| t.rate(m).unwrap() * 0.5).sum();
        let expected = 9.0 * 0.0255 + 10.0 * 0.0644 + 5.0 * 0.2485;
        assert!((day - expected).abs() < 1e-12);
    }

    #[test]
    fn stage_cost_examples() {
        let t = Tariff::time_of_use();
        assert_eq!(stage_cost(&t, 0.0, 1.0, 36).unwrap(), 0.2485);
        assert_eq!(stage_cost(&t, 0.0, -5.0, 36).unwrap(), 0.0);
        assert_eq!(stage_cost(&t, -1.0, 1.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn control_values_contain_zero_and_respect_bounds() {
        let cfg = BatteryConfig::default();
        for c in [100.0, 500.0, 1500.0] {
            let u = cfg.control_values(c, 21);
            assert_eq!(u.len(), 21);
            assert!(u.contains(&0.0));
            assert!(u.windows(2).all(|w| w[0] < w[1]));
            assert!(u[0] >= cfg.u_min && u[20] <= cfg.u_max);
            assert!(u[20] * cfg.rho_charge <= cfg.soc_max(c) + 1e-9);
        }
        assert_eq!(cfg.control_values(0.0, 21), vec![0.0]);
    }

    #[test]
    fn default_config_is_valid() {
        BatteryConfig::default().validate().unwrap();
        assert_eq!(BatteryConfig::default().max_health(), 6000.0);
    }
}
