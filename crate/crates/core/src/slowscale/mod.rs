//! Slow-scale Bellman recursions and bound reports.

pub mod battery;
pub mod generic;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::grid::GridValueFn;

pub use battery::{price_bellman_recursion, resource_bellman_recursion, SlowGrids};
pub use generic::{
    block_recursion, generic_price_recursion, generic_resource_recursion, price_backup,
    resource_backup,
};
pub use report::{check_sandwich, count_increases, BoundReport, DayGap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    PriceLower,
    ResourceUpper,
    ExactOracle,
}

/// Value functions `V_0 .. V_{D+1}` on the slow state grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowValueSeq {
    pub kind: BoundKind,
    pub values: Vec<GridValueFn>,
}

impl SlowValueSeq {
    pub fn day(&self, d: usize) -> &GridValueFn {
        &self.values[d]
    }

    /// Number of decision days `D + 1`.
    pub fn num_days(&self) -> usize {
        self.values.len() - 1
    }
}
