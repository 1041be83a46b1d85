use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid in s = ln x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub count: usize,
}

impl Default for LogGrid {
    /// s ∈ [−12, 6] with 1024 points, i.e. x from 6·10⁻⁶ to 403.
    fn default() -> Self {
        LogGrid {
            s_min: -12.0,
            s_max: 6.0,
            count: 1024,
        }
    }
}

impl LogGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(s_min: f64, s_max: f64, count: usize) -> Result<Self> {
        if !(s_min.is_finite() && s_max.is_finite() && s_min < s_max) {
            return Err(Error::InvalidInput(format!(
                "grid window [{s_min}, {s_max}] is not an interval"
            )));
        }
        if count < Self::MIN_POINTS {
            return Err(Error::GridTooSmall {
                count,
                needed: Self::MIN_POINTS,
            });
        }
        Ok(LogGrid { s_min, s_max, count })
    }

    pub fn h(&self) -> f64 {
        (self.s_max - self.s_min) / (self.count - 1) as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_min + i as f64 * self.h()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.s(i)).collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.x(i)).collect()
    }

    /// Largest index with s_i ≤ s (clamped to the grid).
    pub fn index_at_or_below(&self, s: f64) -> usize {
        let t = ((s - self.s_min) / self.h() + 1e-9).floor();
        t.clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Every `stride`-th point, starting at s_min.
    pub fn coarsen(&self, stride: usize) -> Result<LogGrid> {
        let stride = stride.max(1);
        let count = (self.count - 1) / stride + 1;
        let s_max = self.s_min + (count - 1) as f64 * stride as f64 * self.h();
        LogGrid::new(self.s_min, s_max, count)
    }

    /// Same window, `factor` times finer spacing.
    pub fn refine(&self, factor: usize) -> LogGrid {
        LogGrid {
            s_min: self.s_min,
            s_max: self.s_max,
            count: (self.count - 1) * factor + 1,
        }
    }
}

/// Real values on a [`LogGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: LogGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function"));
        }
        Ok(GridFunction { grid, values })
    }

    /// No finiteness check; for internal arithmetic on validated data.
    pub(crate) fn raw(grid: LogGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.count);
        GridFunction { grid, values }
    }

    pub fn from_fn(grid: LogGrid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::raw(grid, grid.s_values().into_iter().map(f).collect())
    }

    /// Samples of g(x) with x = e^s.
    pub fn from_x_fn(grid: LogGrid, g: impl Fn(f64) -> f64) -> Self {
        GridFunction::from_fn(grid, |s| g(s.exp()))
    }

    pub fn constant(grid: LogGrid, c: f64) -> Self {
        GridFunction::raw(grid, vec![c; grid.count])
    }

    pub fn zeros(grid: LogGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// x^a.
    pub fn x_pow(grid: LogGrid, a: f64) -> Self {
        GridFunction::from_fn(grid, |s| (a * s).exp())
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, o: &GridFunction) -> Result<()> {
        if self.grid == o.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, o: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.same_grid(o)?;
        Ok(self.zip_unchecked(o, f))
    }

    pub(crate) fn zip_unchecked(&self, o: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        GridFunction::raw(
            self.grid,
            self.values
                .iter()
                .zip(&o.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| v * c)
    }

    pub fn offset(&self, c: f64) -> GridFunction {
        self.map(|v| v + c)
    }

    /// a·self + b·o.
    pub fn axpby(&self, a: f64, o: &GridFunction, b: f64) -> Result<GridFunction> {
        self.zip_with(o, |x, y| a * x + b * y)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every `stride`-th sample on the coarsened grid.
    pub fn coarsen(&self, stride: usize) -> Result<GridFunction> {
        let g = self.grid.coarsen(stride)?;
        let stride = stride.max(1);
        Ok(GridFunction::raw(
            g,
            (0..g.count).map(|i| self.values[i * stride]).collect(),
        ))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        /// Panics on grid mismatch; use `zip_with` for a checked version.
        impl $tr<&GridFunction> for &GridFunction {
            type Output = GridFunction;
            fn $m(self, o: &GridFunction) -> GridFunction {
                assert_eq!(self.grid, o.grid, "grid mismatch");
                self.zip_unchecked(o, |a, b| a $op b)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.scale(-1.0)
    }
}
