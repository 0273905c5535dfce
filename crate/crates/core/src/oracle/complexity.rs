//! Operation counts of brute-force DP versus the two decompositions, each
//! one-dimensional variable being discretized in 10 values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of the variable groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableDims {
    /// Fast states without slow influence (state of charge).
    pub x_ff: u32,
    /// Fast states with slow influence (health).
    pub x_sf: u32,
    /// Slow states (capacity).
    pub x_s: u32,
    pub u_f: u32,
    pub u_s: u32,
    pub w_f: u32,
    pub w_s: u32,
}

impl Default for VariableDims {
    /// The battery problem: one variable in every group.
    fn default() -> Self {
        Self {
            x_ff: 1,
            x_sf: 1,
            x_s: 1,
            u_f: 1,
            u_s: 1,
            w_f: 1,
            w_s: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub flat_ops: f64,
    pub resource_intraday_ops: f64,
    pub resource_recursion_ops: f64,
    pub price_intraday_ops: f64,
    pub price_recursion_ops: f64,
    /// `I/D + 1/M`.
    pub ratio_resource: f64,
    /// `I/D + 10/M`.
    pub ratio_price: f64,
    /// Resource operations over flat operations, without approximation.
    pub exact_ratio_resource: f64,
    pub exact_ratio_price: f64,
}

fn p10(e: u32) -> f64 {
    10f64.powi(e as i32)
}

pub fn complexity_estimate(d: u64, m: u64, i: u64, dims: VariableDims) -> Result<ComplexityEstimate> {
    if d == 0 || m == 0 || i == 0 {
        return Err(Error::Config("D, M and I must be positive".into()));
    }
    let (df, mf, i_f) = (d as f64, m as f64, i as f64);
    let VariableDims {
        x_ff,
        x_sf,
        x_s,
        u_f,
        u_s,
        w_f,
        w_s,
    } = dims;
    let flat = (df + 1.0) * (p10(x_ff + x_sf + x_s + u_s + w_s) + (mf + 1.0) * p10(x_ff + x_sf + x_s + u_f + w_f));
    let res_intra = i_f * (mf + 1.0) * p10(x_s) * p10(x_ff + x_sf + u_f + w_f);
    let res_rec = (df + 1.0) * p10(2 * x_sf + x_s + u_s + w_s);
    let price_intra = i_f * (mf + 1.0) * p10(x_s + x_sf) * p10(x_ff + u_f + w_f);
    let price_rec = (df + 1.0) * p10(3 * x_sf + x_s + u_s + w_s);
    Ok(ComplexityEstimate {
        flat_ops: flat,
        resource_intraday_ops: res_intra,
        resource_recursion_ops: res_rec,
        price_intraday_ops: price_intra,
        price_recursion_ops: price_rec,
        ratio_resource: i_f / df + 1.0 / mf,
        ratio_price: i_f / df + 10.0 / mf,
        exact_ratio_resource: (res_intra + res_rec) / flat,
        exact_ratio_price: (price_intra + price_rec) / flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_arithmetic() {
        let e = complexity_estimate(100, 20, 5, VariableDims::default()).unwrap();
        assert_eq!(e.ratio_resource, 5.0 / 100.0 + 1.0 / 20.0);
        assert_eq!(e.ratio_price, 5.0 / 100.0 + 10.0 / 20.0);
    }

    #[test]
    fn daily_and_weekly_steps() {
        let e = complexity_estimate(7300, 48, 4, VariableDims::default()).unwrap();
        assert!((e.ratio_resource * 50.0 - 1.0).abs() < 0.1, "{}", e.ratio_resource);
        let e = complexity_estimate(1040, 336, 4, VariableDims::default()).unwrap();
        assert!((e.ratio_resource * 150.0 - 1.0).abs() < 0.1, "{}", e.ratio_resource);
    }

    #[test]
    fn no_saving_in_the_limit() {
        let e = complexity_estimate(1000, 1_000_000_000, 1000, VariableDims::default()).unwrap();
        assert!((e.ratio_resource - 1.0).abs() < 1e-6);
    }

    #[test]
    fn battery_orders_of_magnitude() {
        let e = complexity_estimate(7300, 48, 4, VariableDims::default()).unwrap();
        assert_eq!(e.flat_ops, 7301.0 * (1e5 + 49.0 * 1e5));
        assert_eq!(e.resource_intraday_ops, 4.0 * 49.0 * 1e5);
        assert_eq!(e.resource_recursion_ops, 7301.0 * 1e5);
        assert_eq!(e.price_recursion_ops, 7301.0 * 1e6);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(complexity_estimate(0, 48, 4, VariableDims::default()).is_err());
    }
}
