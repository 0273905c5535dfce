//! Run configuration and its content hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use twoscale_core::battery::{default_price_forecast, BatteryConfig, BatteryState, SyntheticNetload};
use twoscale_core::intraday::{build_periodicity_classes, ClassScheme, IntradayGrids};
use twoscale_core::slowscale::SlowGrids;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Horizon {
    /// Index of the last day `D`; days run `0..=D`.
    pub last_day: usize,
    /// Fast steps per day; must match the tariff.
    pub steps_per_day: usize,
}

impl Default for Horizon {
    fn default() -> Self {
        Self {
            last_day: 365,
            steps_per_day: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassConfig {
    pub count: usize,
    pub scheme: ClassScheme,
}

impl Default for ClassConfig {
    fn default() -> Self {
        Self {
            count: 4,
            scheme: ClassScheme::Trimester,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// `scenario,day,slot,netload_kwh`; synthetic data when absent.
    pub netload_csv: Option<PathBuf>,
    /// `scenario,day,price_usd_per_kwh`; required with `netload_csv`.
    pub price_csv: Option<PathBuf>,
    pub synthetic: SyntheticNetload,
    /// Number of synthetic raw scenarios used for fitting.
    pub raw_scenarios: usize,
    /// Yearly battery-price forecast, $/kWh.
    pub price_forecast: Vec<f64>,
    pub price_sigma: f64,
    pub price_floor: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            netload_csv: None,
            price_csv: None,
            synthetic: SyntheticNetload::default(),
            raw_scenarios: 20,
            price_forecast: default_price_forecast(),
            price_sigma: 0.06,
            price_floor: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Atoms of every netload law.
    pub netload_atoms: usize,
    /// Atoms of every daily battery-price law.
    pub price_atoms: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            netload_atoms: 5,
            price_atoms: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    /// Resampled independently from the fitted laws.
    WhiteNoise,
    /// The raw scenarios the laws were fitted on.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    Price,
    Resource,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub scenarios: usize,
    pub source: ScenarioSource,
    pub mode: ModeSelection,
    /// Initial state; also the point where the report reads the bounds.
    pub x0: BatteryState,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            scenarios: 100,
            source: ScenarioSource::WhiteNoise,
            mode: ModeSelection::Both,
            x0: BatteryState::EMPTY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub instances: usize,
    pub first_seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            instances: 50,
            first_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: Horizon,
    pub classes: ClassConfig,
    pub grids: IntradayGrids,
    /// Step of the slow health grid, kWh.
    pub health_step: f64,
    pub battery: BatteryConfig,
    pub data: DataConfig,
    pub fit: FitConfig,
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    pub simulate: SimulateConfig,
    pub verify: VerifyConfig,
    /// Not part of the hash.
    pub out_dir: PathBuf,
    /// Worker threads; all cores when absent. Not part of the hash.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: Horizon::default(),
            classes: ClassConfig::default(),
            grids: IntradayGrids::default(),
            health_step: 50.0,
            battery: BatteryConfig::default(),
            data: DataConfig::default(),
            fit: FitConfig::default(),
            seed: 42,
            simulate: SimulateConfig::default(),
            verify: VerifyConfig::default(),
            out_dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

/// Independent seed streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    Data,
    Fit,
    Simulate,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg_err = |e: twoscale_core::Error| CliError::Config(e.to_string());
        self.battery.validate().map_err(cfg_err)?;
        self.grids.validate(&self.battery).map_err(cfg_err)?;
        self.slow_grids().validate(&self.battery).map_err(cfg_err)?;
        if self.horizon.steps_per_day != self.battery.tariff.slots() {
            return Err(CliError::Config(format!(
                "{} steps per day but the tariff has {} slots",
                self.horizon.steps_per_day,
                self.battery.tariff.slots()
            )));
        }
        build_periodicity_classes(self.horizon.last_day, self.classes.count, &self.classes.scheme)
            .map_err(cfg_err)?;
        if !(self.health_step > 0.0) {
            return Err(CliError::Config("health_step must be positive".into()));
        }
        if self.data.netload_csv.is_some() != self.data.price_csv.is_some() {
            return Err(CliError::Config("netload_csv and price_csv go together".into()));
        }
        if self.data.raw_scenarios == 0 || self.fit.netload_atoms == 0 || self.fit.price_atoms == 0 {
            return Err(CliError::Config("scenario and atom counts must be positive".into()));
        }
        if self.simulate.scenarios == 0 {
            return Err(CliError::Config("simulate.scenarios must be positive".into()));
        }
        if !self.simulate.x0.is_admissible(&self.battery) {
            return Err(CliError::Config("x0 violates the battery bounds".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn slow_grids(&self) -> SlowGrids {
        SlowGrids::uniform(&self.battery, self.grids.capacity.clone(), self.health_step)
    }

    pub fn seed_for(&self, stream: SeedStream) -> u64 {
        let salt = match stream {
            SeedStream::Data => 0x0d47_a5ee_d000_0001,
            SeedStream::Fit => 0x0f17_5eed_0000_0002,
            SeedStream::Simulate => 0x5130_5eed_0000_0003,
        };
        self.seed ^ salt
    }

    /// SHA-256 of the sorted-key JSON of every field that affects results.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("out_dir");
            obj.remove("threads");
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
