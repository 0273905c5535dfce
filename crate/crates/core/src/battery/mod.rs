//! Battery aging and renewal case study.

pub mod fit;
pub mod model;
pub mod scenarios;

pub use fit::{fit_netload_distributions, fit_price_laws, kmeans_1d, NetloadLaws};
pub use model::{
    fast_dynamics, renewal_dynamics, stage_cost, tariff_rate, BatteryConfig, BatteryState,
    CycleCount, FinalCost, Tariff, SLOTS_PER_DAY,
};
pub use scenarios::{
    default_price_forecast, gen_battery_price_scenarios, white_noise_resample, ScenarioSet,
    SyntheticNetload,
};
