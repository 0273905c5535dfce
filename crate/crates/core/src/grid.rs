//! Rectangular grids and functions tabulated on them.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

/// Upper bound on grid dimension; lets interpolation run without allocating.
pub const MAX_DIM: usize = 8;

const BINARY_MAGIC: &[u8; 4] = b"GVF1";

/// Tensor product of strictly increasing breakpoint lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be in 1..={MAX_DIM}, got {}",
                axes.len()
            )));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidGrid(format!("axis {i} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {i} has a non-finite breakpoint")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!("axis {i} is not strictly increasing")));
            }
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len() - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let len = axes.iter().map(Vec::len).product();
        Ok(Self { axes, strides, len })
    }

    pub fn one_dim(points: Vec<f64>) -> Result<Self> {
        Self::new(vec![points])
    }

    /// `n` evenly spaced points on `[lo, hi]` (just `lo` when `n == 1`).
    pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => {
                let step = (hi - lo) / (n - 1) as f64;
                let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
                v[n - 1] = hi;
                v
            }
        }
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Row-major flat index of a multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.ndim());
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.ndim()];
        for (o, s) in out.iter_mut().zip(&self.strides) {
            *o = flat / s;
            flat %= s;
        }
        out
    }

    /// Coordinates of the point with the given flat index, written to `out`.
    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for ((o, s), axis) in out.iter_mut().zip(&self.strides).zip(&self.axes) {
            *o = axis[flat / s];
            flat %= s;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ndim()];
        self.point_into(flat, &mut out);
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.ndim()
            && x.iter().zip(&self.axes).all(|(v, a)| *v >= a[0] && *v <= a[a.len() - 1])
    }

    /// Clamps `x` into the bounding box in place.
    pub fn clamp_into(&self, x: &mut [f64]) {
        for (v, a) in x.iter_mut().zip(&self.axes) {
            *v = v.clamp(a[0], a[a.len() - 1]);
        }
    }

    /// Index of the nearest breakpoint on axis `i`, ties to the smaller index.
    pub fn nearest_on_axis(&self, i: usize, x: f64) -> usize {
        let a = &self.axes[i];
        let (lo, t) = locate(a, x);
        if lo + 1 < a.len() && (a[lo + 1] - x) < (x - a[lo]) && t > 0.0 {
            lo + 1
        } else {
            lo
        }
    }

    /// Flat index of the nearest grid point (after clamping).
    pub fn nearest_flat(&self, x: &[f64]) -> usize {
        (0..self.ndim())
            .map(|i| self.nearest_on_axis(i, x[i]) * self.strides[i])
            .sum()
    }

    /// Exact flat index when `x` is a grid point.
    pub fn find_point(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.ndim() {
            return None;
        }
        let mut flat = 0;
        for (i, v) in x.iter().enumerate() {
            let j = self.axes[i].iter().position(|a| a == v)?;
            flat += j * self.strides[i];
        }
        Some(flat)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Grid {
    type Error = Error;

    fn try_from(axes: Vec<Vec<f64>>) -> Result<Self> {
        Grid::new(axes)
    }
}

impl From<Grid> for Vec<Vec<f64>> {
    fn from(g: Grid) -> Self {
        g.axes
    }
}

/// Cell of `x` on a sorted axis: lower index and the weight of the upper
/// neighbour, clamping outside the range.
#[inline]
pub fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if n == 1 || x <= axis[0] {
        return (0, 0.0);
    }
    if x >= axis[n - 1] {
        return (n - 1, 0.0);
    }
    // first index with axis[j] > x, so axis[j-1] <= x < axis[j]
    let j = axis.partition_point(|a| *a <= x);
    let lo = j - 1;
    (lo, (x - axis[lo]) / (axis[j] - axis[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Nearest,
    #[default]
    Multilinear,
}

/// What evaluation does with a query outside the grid box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bounds {
    #[default]
    Clamp,
    Error,
}

/// Extended-real function tabulated on a grid, values in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridValueFnRepr", into = "GridValueFnRepr")]
pub struct GridValueFn {
    grid: Grid,
    values: Vec<ExtReal>,
    interp: Interp,
    bounds: Bounds,
}

#[derive(Serialize, Deserialize)]
struct GridValueFnRepr {
    breakpoints: Vec<Vec<f64>>,
    values: Vec<ExtReal>,
    interp: Interp,
    #[serde(default)]
    bounds: Bounds,
}

impl TryFrom<GridValueFnRepr> for GridValueFn {
    type Error = Error;

    fn try_from(r: GridValueFnRepr) -> Result<Self> {
        let grid = Grid::new(r.breakpoints)?;
        Ok(GridValueFn::new(grid, r.values, r.interp)?.with_bounds(r.bounds))
    }
}

impl From<GridValueFn> for GridValueFnRepr {
    fn from(f: GridValueFn) -> Self {
        GridValueFnRepr {
            breakpoints: f.grid.axes,
            values: f.values,
            interp: f.interp,
            bounds: f.bounds,
        }
    }
}

impl GridValueFn {
    pub fn new(grid: Grid, values: Vec<ExtReal>, interp: Interp) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            interp,
            bounds: Bounds::Clamp,
        })
    }

    pub fn constant(grid: Grid, v: ExtReal, interp: Interp) -> Self {
        let values = vec![v; grid.len()];
        Self {
            grid,
            values,
            interp,
            bounds: Bounds::Clamp,
        }
    }

    /// Tabulates `f` at every grid point.
    pub fn from_fn(grid: Grid, interp: Interp, mut f: impl FnMut(&[f64]) -> ExtReal) -> Self {
        let mut x = vec![0.0; grid.ndim()];
        let values = (0..grid.len())
            .map(|k| {
                grid.point_into(k, &mut x);
                f(&x)
            })
            .collect();
        Self {
            grid,
            values,
            interp,
            bounds: Bounds::Clamp,
        }
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn at_flat(&self, k: usize) -> ExtReal {
        self.values[k]
    }

    pub fn at(&self, idx: &[usize]) -> ExtReal {
        self.values[self.grid.flat_index(idx)]
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        if x.len() != self.grid.ndim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.ndim(),
                got: x.len(),
            });
        }
        if self.bounds == Bounds::Error && !self.grid.contains(x) {
            return Err(Error::OutOfRange { point: x.to_vec() });
        }
        Ok(self.eval_clamped(x))
    }

    /// Evaluation with clamping, no checks beyond debug assertions.
    #[inline]
    pub fn eval_clamped(&self, x: &[f64]) -> ExtReal {
        debug_assert_eq!(x.len(), self.grid.ndim());
        match self.interp {
            Interp::Nearest => self.values[self.grid.nearest_flat(x)],
            Interp::Multilinear => self.multilinear(x),
        }
    }

    fn multilinear(&self, x: &[f64]) -> ExtReal {
        let n = self.grid.ndim();
        let mut base = 0usize;
        let mut t = [0.0f64; MAX_DIM];
        // axes whose upper neighbour has positive weight
        let mut active = [0usize; MAX_DIM];
        let mut n_active = 0;
        for i in 0..n {
            let (lo, ti) = locate(&self.grid.axes[i], x[i]);
            base += lo * self.grid.strides[i];
            if ti > 0.0 {
                t[n_active] = ti;
                active[n_active] = i;
                n_active += 1;
            }
        }
        if n_active == 0 {
            return self.values[base];
        }
        let mut acc = 0.0;
        let mut saw_neg_inf = false;
        for corner in 0..(1usize << n_active) {
            let mut w = 1.0;
            let mut k = base;
            for (j, ax) in active[..n_active].iter().enumerate() {
                if corner >> j & 1 == 1 {
                    w *= t[j];
                    k += self.grid.strides[*ax];
                } else {
                    w *= 1.0 - t[j];
                }
            }
            if w <= 0.0 {
                continue;
            }
            let v = self.values[k];
            if v.is_pos_inf() {
                return ExtReal::INFINITY;
            }
            if v.is_neg_inf() {
                saw_neg_inf = true;
            } else {
                acc += w * v.value();
            }
        }
        if saw_neg_inf {
            ExtReal::NEG_INFINITY
        } else {
            ExtReal::new(acc)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Little-endian binary table: magic, interp, bounds, axes, values.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&[interp_code(self.interp), bounds_code(self.bounds)])?;
        w.write_all(&(self.grid.ndim() as u32).to_le_bytes())?;
        for axis in &self.grid.axes {
            w.write_all(&(axis.len() as u64).to_le_bytes())?;
            for v in axis {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.value().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::InvalidGrid("bad binary table header".into()));
        }
        let mut flags = [0u8; 2];
        r.read_exact(&mut flags)?;
        let interp = match flags[0] {
            0 => Interp::Nearest,
            1 => Interp::Multilinear,
            b => return Err(Error::InvalidGrid(format!("unknown interpolation code {b}"))),
        };
        let bounds = match flags[1] {
            0 => Bounds::Clamp,
            1 => Bounds::Error,
            b => return Err(Error::InvalidGrid(format!("unknown bounds code {b}"))),
        };
        let ndim = read_u32(r)? as usize;
        if ndim == 0 || ndim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("bad dimension {ndim}")));
        }
        let mut axes = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            let n = read_u64(r)? as usize;
            axes.push(read_f64s(r, n)?);
        }
        let grid = Grid::new(axes)?;
        let n = read_u64(r)? as usize;
        if n != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: n,
            });
        }
        let values = read_f64s(r, n)?
            .into_iter()
            .map(|v| {
                if v.is_nan() {
                    Err(Error::InvalidGrid("NaN in binary table".into()))
                } else {
                    Ok(ExtReal::new(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridValueFn::new(grid, values, interp)?.with_bounds(bounds))
    }
}

fn interp_code(i: Interp) -> u8 {
    match i {
        Interp::Nearest => 0,
        Interp::Multilinear => 1,
    }
}

fn bounds_code(b: Bounds) -> u8 {
    match b {
        Bounds::Clamp => 0,
        Bounds::Error => 1,
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n.min(1 << 24));
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}
