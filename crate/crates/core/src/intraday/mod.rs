//! Fast-scale engine and intraday tables.

pub mod battery;
pub mod classes;
pub mod fastdp;

pub use battery::{
    compute_price_intraday, compute_resource_intraday, IntradayGrids, IntradayPriceTable,
    IntradayResourceTable,
};
pub use classes::{build_periodicity_classes, ClassScheme, PeriodicityClassMap};
pub use fastdp::{greedy_control, solve_fast_dp, FastDpSolution, FastStage};
