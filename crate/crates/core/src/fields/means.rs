//! Ball (volume) and sphere (surface) means of grid fields.
//!
//! The volume mean is a midpoint rule over node cells: every node carries the
//! part of its cell that falls inside the ball. In 1D the overlap is exact; in
//! 2D cells cut by the circle are subsampled on a 16x16 lattice. The surface
//! mean interpolates the field (linear in 1D, bilinear in 2D) on the sphere.

use crate::fields::{FieldError, ScalarField};
use crate::scalar::Real;

const CUT_CELL_SUBSAMPLES: usize = 16;
const RADIAL_PANELS: usize = 128;

fn check_dim<T: Real>(field: &ScalarField<T>, center: &[T]) -> Result<(), FieldError> {
    let dim = field.grid().dim();
    if center.len() != dim {
        return Err(FieldError::DimensionMismatch {
            expected: dim,
            got: center.len(),
        });
    }
    Ok(())
}

fn inside_grid<T: Real>(field: &ScalarField<T>, center: &[T], radius: T) -> bool {
    let dim = field.grid().dim();
    let lo: Vec<T> = center.iter().map(|&c| c - radius).collect();
    let hi: Vec<T> = center.iter().map(|&c| c + radius).collect();
    field.grid().contains_box(&lo[..dim], &hi[..dim])
}

/// Index range of nodes whose cells may touch `[c - r, c + r]` along `axis`.
fn node_range<T: Real>(field: &ScalarField<T>, axis: usize, c: T, r: T) -> (usize, usize) {
    let g = field.grid();
    let h = g.spacing(axis);
    let lo = g.lo()[axis];
    let n = g.nodes(axis);
    let first = ((c - r - lo) / h).floor() - T::one();
    let last = ((c + r - lo) / h).ceil() + T::one();
    let first = first.max(T::zero()).to_usize().unwrap_or(0).min(n - 1);
    let last = last.max(T::zero()).to_usize().unwrap_or(n - 1).min(n - 1);
    (first, last)
}

/// Cell of node coordinate `x` along `axis`, clipped to the grid extents.
fn cell<T: Real>(field: &ScalarField<T>, axis: usize, x: T) -> (T, T) {
    let g = field.grid();
    let half = g.spacing(axis) / T::lit(2.0);
    ((x - half).max(g.lo()[axis]), (x + half).min(g.hi()[axis]))
}

/// Volume mean of `field` over the closed ball `B(center, radius)`.
pub fn volume_mean<T: Real>(
    field: &ScalarField<T>,
    center: &[T],
    radius: T,
) -> Result<T, FieldError> {
    check_dim(field, center)?;
    let g = field.grid();
    let dim = g.dim();
    let h = g.max_spacing();
    if !(radius >= T::lit(2.0) * h * (T::one() - T::lit(1e-12))) {
        return Err(FieldError::BallUnresolved {
            radius: radius.to_f64().unwrap_or(f64::NAN),
            nodes: 0,
            spacing: h.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !inside_grid(field, center, radius) {
        return Err(FieldError::BallOutsideGrid {
            radius: radius.to_f64().unwrap_or(f64::NAN),
        });
    }

    let r2 = radius * radius;
    let mut inside_nodes = 0usize;
    let mut weight_sum = T::zero();
    let mut acc = T::zero();
    let (i0, i1) = node_range(field, 0, center[0], radius);
    if dim == 1 {
        for i in i0..=i1 {
            let idx = g.index(i, 0);
            let x = g.coords(idx)[0];
            if (x - center[0]).abs() <= radius {
                inside_nodes += 1;
            }
            let (a, b) = cell(field, 0, x);
            let w = (b.min(center[0] + radius) - a.max(center[0] - radius)).max(T::zero());
            weight_sum += w;
            acc += w * field.get(idx);
        }
    } else {
        let (j0, j1) = node_range(field, 1, center[1], radius);
        let sub = T::count(CUT_CELL_SUBSAMPLES);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let idx = g.index(i, j);
                let p = g.coords(idx);
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                if dx * dx + dy * dy <= r2 {
                    inside_nodes += 1;
                }
                let (xa, xb) = cell(field, 0, p[0]);
                let (ya, yb) = cell(field, 1, p[1]);
                let area = (xb - xa) * (yb - ya);
                // nearest and farthest cell points from the center
                let nx = center[0].max(xa).min(xb) - center[0];
                let ny = center[1].max(ya).min(yb) - center[1];
                let fx = (xa - center[0]).abs().max((xb - center[0]).abs());
                let fy = (ya - center[1]).abs().max((yb - center[1]).abs());
                let w = if fx * fx + fy * fy <= r2 {
                    area
                } else if nx * nx + ny * ny >= r2 {
                    T::zero()
                } else {
                    let mut hits = 0usize;
                    for sj in 0..CUT_CELL_SUBSAMPLES {
                        let y = ya + (yb - ya) * (T::count(sj) + T::lit(0.5)) / sub;
                        for si in 0..CUT_CELL_SUBSAMPLES {
                            let x = xa + (xb - xa) * (T::count(si) + T::lit(0.5)) / sub;
                            let (ddx, ddy) = (x - center[0], y - center[1]);
                            if ddx * ddx + ddy * ddy <= r2 {
                                hits += 1;
                            }
                        }
                    }
                    area * T::count(hits) / (sub * sub)
                };
                weight_sum += w;
                acc += w * field.get(idx);
            }
        }
    }
    let min_nodes = 3usize.pow(dim as u32);
    if inside_nodes < min_nodes || !(weight_sum > T::zero()) {
        return Err(FieldError::BallUnresolved {
            radius: radius.to_f64().unwrap_or(f64::NAN),
            nodes: inside_nodes,
            spacing: h.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(acc / weight_sum)
}

/// Uniform average of `field` over the sphere of the given radius.
///
/// In 1D this is `(F(y + r) + F(y - r)) / 2`; in 2D the circle is sampled at
/// `max(16, ceil(4 pi r / h))` equally spaced angles.
pub fn surface_mean<T: Real>(
    field: &ScalarField<T>,
    center: &[T],
    radius: T,
) -> Result<T, FieldError> {
    check_dim(field, center)?;
    let outside = || FieldError::SphereOutsideGrid {
        radius: radius.to_f64().unwrap_or(f64::NAN),
    };
    if !(radius >= T::zero()) || !inside_grid(field, center, radius) {
        return Err(outside());
    }
    let g = field.grid();
    if g.dim() == 1 {
        let a = field
            .interpolate(&[center[0] + radius])
            .ok_or_else(outside)?;
        let b = field
            .interpolate(&[center[0] - radius])
            .ok_or_else(outside)?;
        return Ok((a + b) / T::lit(2.0));
    }
    if radius == T::zero() {
        return field.interpolate(center).ok_or_else(outside);
    }
    let samples = (T::lit(4.0) * T::PI() * radius / g.min_spacing())
        .ceil()
        .to_usize()
        .unwrap_or(16)
        .max(16);
    let step = T::lit(2.0) * T::PI() / T::count(samples);
    let mut acc = T::zero();
    for k in 0..samples {
        let theta = step * T::count(k);
        let p = [
            center[0] + radius * theta.cos(),
            center[1] + radius * theta.sin(),
        ];
        acc += field.interpolate(&p).ok_or_else(outside)?;
    }
    Ok(acc / T::count(samples))
}

/// `|m(y, eta) - (N / eta^N) * int_0^eta r^(N-1) S(y, r) dr|`, the defect in
/// the identity linking ball and sphere means. The radial integral uses
/// composite Simpson with 128 panels.
pub fn verify_mean_relation<T: Real>(
    field: &ScalarField<T>,
    center: &[T],
    radius: T,
) -> Result<T, FieldError> {
    let vm = volume_mean(field, center, radius)?;
    let n = field.grid().dim();
    let panels = RADIAL_PANELS;
    let dr = radius / T::count(panels);
    let mut sum = T::zero();
    for k in 0..=panels {
        let r = dr * T::count(k);
        let weight = if k == 0 || k == panels {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        let s = surface_mean(field, center, r)?;
        sum += weight * r.powi(n as i32 - 1) * s;
    }
    let integral = sum * dr / T::lit(3.0);
    let radial = T::count(n) / radius.powi(n as i32) * integral;
    Ok((vm - radial).abs())
}
