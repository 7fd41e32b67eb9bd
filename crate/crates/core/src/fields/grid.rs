use std::io::Write;

use crate::fields::FieldError;
use crate::scalar::Real;

/// Uniform node lattice in one or two dimensions.
///
/// Nodes include both end points of every axis, so an axis with `n` nodes on
/// `[lo, hi]` has spacing `(hi - lo) / (n - 1)`. Nodes are stored x-fastest:
/// `index = i + counts[0] * j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    counts: [usize; 2],
    lo: [T; 2],
    hi: [T; 2],
    spacing: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new_1d(nodes: usize, lo: T, hi: T) -> Result<Self, FieldError> {
        Self::build(1, [nodes, 1], [lo, T::zero()], [hi, T::zero()])
    }

    pub fn new_2d(nodes: [usize; 2], lo: [T; 2], hi: [T; 2]) -> Result<Self, FieldError> {
        Self::build(2, nodes, lo, hi)
    }

    /// Builds a grid over the box `[lo, hi]` whose spacing does not exceed
    /// `max_spacing` on any axis.
    pub fn with_max_spacing(lo: &[T], hi: &[T], max_spacing: T) -> Result<Self, FieldError> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(FieldError::UnsupportedDimension(lo.len()));
        }
        if !(max_spacing > T::zero()) {
            return Err(FieldError::InvalidGrid("spacing must be positive".into()));
        }
        let mut counts = [1usize; 2];
        for axis in 0..lo.len() {
            let cells = ((hi[axis] - lo[axis]) / max_spacing)
                .ceil()
                .to_usize()
                .ok_or_else(|| {
                    FieldError::InvalidGrid("extent/spacing not representable".into())
                })?;
            counts[axis] = (cells + 1).max(3);
        }
        if lo.len() == 1 {
            Self::new_1d(counts[0], lo[0], hi[0])
        } else {
            Self::new_2d(counts, [lo[0], lo[1]], [hi[0], hi[1]])
        }
    }

    fn build(dim: usize, counts: [usize; 2], lo: [T; 2], hi: [T; 2]) -> Result<Self, FieldError> {
        let mut spacing = [T::zero(); 2];
        for axis in 0..dim {
            if counts[axis] < 3 {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {axis} has {} nodes, need at least 3",
                    counts[axis]
                )));
            }
            if !(lo[axis] < hi[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {axis} needs finite lo < hi"
                )));
            }
            spacing[axis] = (hi[axis] - lo[axis]) / T::count(counts[axis] - 1);
        }
        Ok(Self {
            dim,
            counts,
            lo,
            hi,
            spacing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Node count along `axis` (1 for the unused second axis of a 1D grid).
    pub fn nodes(&self, axis: usize) -> usize {
        self.counts[axis]
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> &[T] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[T] {
        &self.hi[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    /// Largest spacing over the active axes.
    pub fn max_spacing(&self) -> T {
        self.spacing[..self.dim]
            .iter()
            .fold(T::zero(), |m, &h| m.max(h))
    }

    pub fn min_spacing(&self) -> T {
        self.spacing[..self.dim]
            .iter()
            .fold(T::infinity(), |m, &h| m.min(h))
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.counts[0] * j
    }

    #[inline]
    pub fn ij(&self, index: usize) -> (usize, usize) {
        (index % self.counts[0], index / self.counts[0])
    }

    /// Coordinates of a node; the second entry is zero on 1D grids.
    #[inline]
    pub fn coords(&self, index: usize) -> [T; 2] {
        let (i, j) = self.ij(index);
        let x = self.lo[0] + T::count(i) * self.spacing[0];
        let y = if self.dim == 2 {
            self.lo[1] + T::count(j) * self.spacing[1]
        } else {
            T::zero()
        };
        [x, y]
    }

    /// True for nodes on the outer boundary of the lattice.
    pub fn is_boundary(&self, index: usize) -> bool {
        let (i, j) = self.ij(index);
        let on_x = i == 0 || i + 1 == self.counts[0];
        if self.dim == 1 {
            on_x
        } else {
            on_x || j == 0 || j + 1 == self.counts[1]
        }
    }

    /// True when the lattice extents coincide with the box `[lo, hi]` up to a
    /// relative tolerance.
    pub fn matches_box(&self, lo: &[T], hi: &[T]) -> bool {
        if lo.len() != self.dim || hi.len() != self.dim {
            return false;
        }
        let tol = T::lit(1e-9);
        (0..self.dim).all(|axis| {
            let scale = (self.hi[axis] - self.lo[axis]).abs().max(T::one());
            (self.lo[axis] - lo[axis]).abs() <= tol * scale
                && (self.hi[axis] - hi[axis]).abs() <= tol * scale
        })
    }

    /// True when the closed box `[lo, hi]` lies inside the lattice extents.
    pub fn contains_box(&self, lo: &[T], hi: &[T]) -> bool {
        let tol = T::lit(1e-12) * self.max_spacing().max(T::one());
        (0..self.dim).all(|axis| lo[axis] >= self.lo[axis] - tol && hi[axis] <= self.hi[axis] + tol)
    }

    /// Writes the CSV header `x[,y]` followed by `extra` columns.
    pub(crate) fn write_coord_header<W: Write>(
        &self,
        w: &mut W,
        extra: &[&str],
    ) -> std::io::Result<()> {
        let mut cols: Vec<&str> = vec!["x"];
        if self.dim == 2 {
            cols.push("y");
        }
        cols.extend_from_slice(extra);
        writeln!(w, "{}", cols.join(","))
    }

    pub(crate) fn write_coords<W: Write>(&self, w: &mut W, index: usize) -> std::io::Result<()> {
        let c = self.coords(index);
        if self.dim == 2 {
            write!(w, "{},{}", c[0], c[1])
        } else {
            write!(w, "{}", c[0])
        }
    }
}
