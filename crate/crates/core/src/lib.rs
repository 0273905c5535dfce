//! Two-time-scale stochastic dynamic programming by time blocks.

pub mod battery;
pub mod conjugate;
pub mod dist;
pub mod error;
pub mod extreal;
pub mod grid;
pub mod intraday;
pub mod oracle;
pub mod policy;
pub mod problem;
pub mod slowscale;
pub mod time;

pub use conjugate::fenchel_conjugate;
pub use dist::DiscreteDist;
pub use error::{Error, Result};
pub use extreal::{low_add, ExtReal};
pub use grid::{Bounds, Grid, GridValueFn, Interp};
pub use time::{lex_compare, TwoScaleIndex};
