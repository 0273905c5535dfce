//! Discrete Fenchel conjugate.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridValueFn, Interp};

/// `f*(p) = max_x <p, x> - f(x)` over the grid points of `f`, tabulated on
/// `prices`.
pub fn fenchel_conjugate(f: &GridValueFn, prices: &Grid) -> Result<GridValueFn> {
    let states = f.grid();
    if states.ndim() != prices.ndim() {
        return Err(Error::DimensionMismatch {
            expected: states.ndim(),
            got: prices.ndim(),
        });
    }
    if states.is_empty() || prices.is_empty() {
        return Err(Error::InvalidGrid("conjugate of an empty grid".into()));
    }
    let xs: Vec<Vec<f64>> = (0..states.len()).map(|k| states.point(k)).collect();
    Ok(GridValueFn::from_fn(prices.clone(), Interp::Multilinear, |p| {
        let mut best = ExtReal::NEG_INFINITY;
        for (x, fx) in xs.iter().zip(f.values()) {
            let dot: f64 = p.iter().zip(x).map(|(a, b)| a * b).sum();
            best = best.max(ExtReal::new(dot) + (-*fx));
        }
        best
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_states(vals: &[f64]) -> GridValueFn {
        let g = Grid::one_dim(vec![-1.0, 0.0, 1.0][..vals.len()].to_vec()).unwrap();
        GridValueFn::new(g, vals.iter().map(|v| ExtReal::new(*v)).collect(), Interp::Nearest)
            .unwrap()
    }

    #[test]
    fn conjugate_of_zero_is_support_function() {
        let g = Grid::one_dim(vec![0.0, 1.0, 2.0]).unwrap();
        let f = GridValueFn::constant(g, ExtReal::ZERO, Interp::Nearest);
        let p = Grid::one_dim(vec![-1.0, 0.0, 1.0]).unwrap();
        let c = fenchel_conjugate(&f, &p).unwrap();
        assert_eq!(c.values(), &[ExtReal::ZERO, ExtReal::ZERO, ExtReal::new(2.0)]);
    }

    #[test]
    fn conjugate_of_square_on_three_points() {
        let f = on_states(&[1.0, 0.0, 1.0]);
        let p = Grid::one_dim(vec![1.0]).unwrap();
        let c = fenchel_conjugate(&f, &p).unwrap();
        assert_eq!(c.at_flat(0), ExtReal::ZERO);
    }

    #[test]
    fn conjugate_of_plus_infinity() {
        let g = Grid::one_dim(vec![0.0, 1.0]).unwrap();
        let f = GridValueFn::constant(g, ExtReal::INFINITY, Interp::Nearest);
        let p = Grid::one_dim(vec![-3.0, 0.0, 2.0]).unwrap();
        let c = fenchel_conjugate(&f, &p).unwrap();
        assert!(c.values().iter().all(|v| v.is_neg_inf()));
    }

    #[test]
    fn dimension_mismatch() {
        let f = on_states(&[0.0, 0.0]);
        let p = Grid::new(vec![vec![0.0], vec![0.0]]).unwrap();
        assert!(fenchel_conjugate(&f, &p).is_err());
    }
}
