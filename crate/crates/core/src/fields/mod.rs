//! Uniform-grid scalar fields, boolean masks, and ball/sphere mean functionals.

mod grid;
mod means;

use std::io::Write;

use thiserror::Error;

pub use grid::Grid;
pub use means::{surface_mean, verify_mean_relation, volume_mean};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported dimension {0} (grids are 1D or 2D)")]
    UnsupportedDimension(usize),
    #[error("expected {expected} values for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("ball of radius {radius} around the center leaves the grid")]
    BallOutsideGrid { radius: f64 },
    #[error("ball of radius {radius} is unresolved ({nodes} nodes inside, spacing {spacing})")]
    BallUnresolved {
        radius: f64,
        nodes: usize,
        spacing: f64,
    },
    #[error("sphere of radius {radius} around the center leaves the grid")]
    SphereOutsideGrid { radius: f64 },
    #[error("point dimension {got} does not match grid dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One finite value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every node. `f` receives a slice of length `grid.dim()`.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(&[T]) -> T) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                f(&c[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, index: usize) -> T {
        self.values[index]
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Piecewise-linear (1D) or bilinear (2D) interpolation. `None` outside
    /// the grid extents.
    pub fn interpolate(&self, p: &[T]) -> Option<T> {
        let g = &self.grid;
        let tol = T::lit(1e-12) * g.max_spacing();
        let mut base = [0usize; 2];
        let mut frac = [T::zero(); 2];
        for axis in 0..g.dim() {
            let lo = g.lo()[axis];
            let hi = g.hi()[axis];
            if p[axis] < lo - tol || p[axis] > hi + tol {
                return None;
            }
            let s = ((p[axis] - lo) / g.spacing(axis)).max(T::zero());
            let cells = g.nodes(axis) - 1;
            let mut i = s.floor().to_usize().unwrap_or(0);
            if i >= cells {
                i = cells - 1;
            }
            base[axis] = i;
            frac[axis] = (s - T::count(i)).min(T::one());
        }
        let v = |i: usize, j: usize| self.values[g.index(i, j)];
        let (i, tx) = (base[0], frac[0]);
        if g.dim() == 1 {
            return Some(v(i, 0) * (T::one() - tx) + v(i + 1, 0) * tx);
        }
        let (j, ty) = (base[1], frac[1]);
        let bottom = v(i, j) * (T::one() - tx) + v(i + 1, j) * tx;
        let top = v(i, j + 1) * (T::one() - tx) + v(i + 1, j + 1) * tx;
        Some(bottom * (T::one() - ty) + top * ty)
    }

    /// CSV with header `x[,y],value`, one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        self.grid.write_coord_header(&mut w, &["value"])?;
        for (i, v) in self.values.iter().enumerate() {
            self.grid.write_coords(&mut w, i)?;
            writeln!(w, ",{v}")?;
        }
        Ok(())
    }
}

/// Boolean flag per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask<T> {
    grid: Grid<T>,
    flags: Vec<bool>,
}

impl<T: Real> Mask<T> {
    pub fn new(grid: Grid<T>, flags: Vec<bool>) -> Result<Self, FieldError> {
        if flags.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: flags.len(),
            });
        }
        Ok(Self { grid, flags })
    }

    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(&[T]) -> bool) -> Self {
        let flags = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                f(&c[..grid.dim()])
            })
            .collect();
        Self { grid, flags }
    }

    pub fn full(grid: Grid<T>, value: bool) -> Self {
        Self {
            grid,
            flags: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn get(&self, index: usize) -> bool {
        self.flags[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.flags[index] = value;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&b| b).count()
    }

    pub fn and(&self, other: &Mask<T>) -> Mask<T> {
        let flags = self
            .flags
            .iter()
            .zip(&other.flags)
            .map(|(&a, &b)| a && b)
            .collect();
        Mask {
            grid: self.grid,
            flags,
        }
    }

    pub fn or(&self, other: &Mask<T>) -> Mask<T> {
        let flags = self
            .flags
            .iter()
            .zip(&other.flags)
            .map(|(&a, &b)| a || b)
            .collect();
        Mask {
            grid: self.grid,
            flags,
        }
    }

    pub fn not(&self) -> Mask<T> {
        Mask {
            grid: self.grid,
            flags: self.flags.iter().map(|&a| !a).collect(),
        }
    }

    /// Indices of the set nodes, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}
