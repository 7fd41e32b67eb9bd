//! Analytic shapes, exact distance oracles, and their grid rasterizations.
//!
//! A [`DesignDomain`] pairs the box `Omega` the PDE is solved on with the set
//! `A` whose boundary the distance construction targets. Every shape variant
//! has a closed-form distance to its boundary, which is what the convergence
//! studies compare against.

use thiserror::Error;

use crate::fields::{Grid, Mask, ScalarField};
use crate::scalar::{distance, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("union members {0} and {1} overlap or touch")]
    OverlappingMembers(usize, usize),
    #[error("shape dimension {shape} does not match domain dimension {domain}")]
    DimensionMismatch { shape: usize, domain: usize },
    #[error("set A must lie strictly inside the design domain (gap {gap})")]
    NotInterior { gap: f64 },
    #[error(
        "grid too coarse to resolve the interface (spacing {spacing}, feature size {feature})"
    )]
    EmptyInterface { spacing: f64, feature: f64 },
}

/// Analytic set with a closed-form boundary distance.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    /// `[center - half_width, center + half_width]` on the line.
    Interval { center: T, half_width: T },
    /// Closed ball; the center's length fixes the dimension.
    Ball { center: Vec<T>, radius: T },
    /// Planar annulus `r_inner <= |x - center| <= r_outer`.
    Annulus {
        center: [T; 2],
        r_inner: T,
        r_outer: T,
    },
    /// Axis-aligned box.
    Box { lo: Vec<T>, hi: Vec<T> },
    /// Pairwise disjoint members with positive gaps.
    Union(Vec<Shape<T>>),
}

impl<T: Real> Shape<T> {
    pub fn interval(center: T, half_width: T) -> Self {
        Shape::Interval { center, half_width }
    }

    pub fn ball(center: &[T], radius: T) -> Self {
        Shape::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            Shape::Ball { center, .. } => center.len(),
            Shape::Annulus { .. } => 2,
            Shape::Box { lo, .. } => lo.len(),
            Shape::Union(members) => members.first().map_or(0, Shape::dim),
        }
    }

    /// Checks positivity of lengths, dimension consistency, and (for unions)
    /// pairwise disjointness with a sampled minimum-distance test.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: &str| Err(GeometryError::InvalidShape(msg.to_string()));
        match self {
            Shape::Interval { center, half_width } => {
                if !(center.is_finite() && *half_width > T::zero() && half_width.is_finite()) {
                    return bad("interval half-width must be positive and finite");
                }
            }
            Shape::Ball { center, radius } => {
                if center.is_empty() || center.len() > 2 {
                    return bad("ball center must have 1 or 2 coordinates");
                }
                if !(*radius > T::zero() && radius.is_finite())
                    || center.iter().any(|c| !c.is_finite())
                {
                    return bad("ball radius must be positive and finite");
                }
            }
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                if !(*r_inner > T::zero() && r_inner < r_outer && r_outer.is_finite())
                    || center.iter().any(|c| !c.is_finite())
                {
                    return bad("annulus needs 0 < r_inner < r_outer");
                }
            }
            Shape::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
                    return bad("box corners must both have 1 or 2 coordinates");
                }
                if lo
                    .iter()
                    .zip(hi)
                    .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
                {
                    return bad("box needs finite lo < hi on every axis");
                }
            }
            Shape::Union(members) => {
                if members.is_empty() {
                    return bad("union must have at least one member");
                }
                let dim = members[0].dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != dim {
                        return bad("union members must share a dimension");
                    }
                }
                for i in 0..members.len() {
                    for j in (i + 1)..members.len() {
                        if !members_disjoint(&members[i], &members[j]) {
                            return Err(GeometryError::OverlappingMembers(i, j));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            Shape::Interval { center, half_width } => (x[0] - *center).abs() <= *half_width,
            Shape::Ball { center, radius } => distance(x, center) <= *radius,
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = distance(x, center);
                r >= *r_inner && r <= *r_outer
            }
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&a, &b))| v >= a && v <= b),
            Shape::Union(members) => members.iter().any(|m| m.contains(x)),
        }
    }

    /// Distance from `x` to the boundary of the shape.
    pub fn boundary_distance(&self, x: &[T]) -> T {
        match self {
            Shape::Interval { center, half_width } => ((x[0] - *center).abs() - *half_width).abs(),
            Shape::Ball { center, radius } => (distance(x, center) - *radius).abs(),
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = distance(x, center);
                (r - *r_inner).abs().min((r - *r_outer).abs())
            }
            Shape::Box { lo, hi } => box_boundary_distance(lo, hi, x),
            Shape::Union(members) => members
                .iter()
                .fold(T::infinity(), |m, s| m.min(s.boundary_distance(x))),
        }
    }

    /// Componentwise bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<T>, Vec<T>) {
        match self {
            Shape::Interval { center, half_width } => {
                (vec![*center - *half_width], vec![*center + *half_width])
            }
            Shape::Ball { center, radius } => (
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
            Shape::Annulus {
                center, r_outer, ..
            } => (
                center.iter().map(|&c| c - *r_outer).collect(),
                center.iter().map(|&c| c + *r_outer).collect(),
            ),
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Union(members) => {
                let dim = self.dim();
                let mut lo = vec![T::infinity(); dim];
                let mut hi = vec![T::neg_infinity(); dim];
                for m in members {
                    let (a, b) = m.bounding_box();
                    for k in 0..dim {
                        lo[k] = lo[k].min(a[k]);
                        hi[k] = hi[k].max(b[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Radius of the largest ball that touches every boundary point from
    /// outside the shape (the exterior-sphere radius). Infinite for flat or
    /// convex-from-outside boundaries, zero at box corners seen from inside.
    ///
    /// Recorded for reference only; no numerical routine depends on it.
    pub fn exterior_sphere_radius(&self) -> T {
        match self {
            Shape::Interval { .. } | Shape::Ball { .. } | Shape::Box { .. } => T::infinity(),
            Shape::Annulus { r_inner, .. } => *r_inner,
            Shape::Union(members) => members
                .iter()
                .fold(T::infinity(), |m, s| m.min(s.exterior_sphere_radius())),
        }
    }

    /// Smallest length scale of the shape: the finest grid spacing that can
    /// still see its boundary must stay below this.
    pub fn feature_size(&self) -> T {
        match self {
            Shape::Interval { half_width, .. } => *half_width,
            Shape::Ball { radius, .. } => *radius,
            Shape::Annulus {
                r_inner, r_outer, ..
            } => ((*r_outer - *r_inner) / T::lit(2.0)).min(*r_inner),
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .fold(T::infinity(), |m, (&a, &b)| m.min((b - a) / T::lit(2.0))),
            Shape::Union(members) => members
                .iter()
                .fold(T::infinity(), |m, s| m.min(s.feature_size())),
        }
    }

    /// Deterministic, uniformly parametrized points on the boundary. Roughly
    /// `n` points for curves; the two end points for 1D shapes.
    pub fn boundary_samples(&self, n: usize) -> Vec<Vec<T>> {
        let n = n.max(4);
        let circle = |c: &[T], r: T, m: usize| -> Vec<Vec<T>> {
            (0..m)
                .map(|k| {
                    let t = T::lit(2.0) * T::PI() * T::count(k) / T::count(m);
                    vec![c[0] + r * t.cos(), c[1] + r * t.sin()]
                })
                .collect()
        };
        match self {
            Shape::Interval { center, half_width } => {
                vec![vec![*center - *half_width], vec![*center + *half_width]]
            }
            Shape::Ball { center, radius } if center.len() == 1 => {
                vec![vec![center[0] - *radius], vec![center[0] + *radius]]
            }
            Shape::Ball { center, radius } => circle(center, *radius, n),
            Shape::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let inner = ((T::count(n) * *r_inner / (*r_inner + *r_outer))
                    .round()
                    .to_usize()
                    .unwrap_or(1))
                .max(2);
                let mut pts = circle(center, *r_inner, inner);
                pts.extend(circle(center, *r_outer, n.saturating_sub(inner).max(2)));
                pts
            }
            Shape::Box { lo, hi } if lo.len() == 1 => vec![vec![lo[0]], vec![hi[0]]],
            Shape::Box { lo, hi } => {
                let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
                let perimeter = T::lit(2.0) * (w + h);
                (0..n)
                    .map(|k| {
                        let mut s = perimeter * T::count(k) / T::count(n);
                        if s < w {
                            return vec![lo[0] + s, lo[1]];
                        }
                        s -= w;
                        if s < h {
                            return vec![hi[0], lo[1] + s];
                        }
                        s -= h;
                        if s < w {
                            return vec![hi[0] - s, hi[1]];
                        }
                        s -= w;
                        vec![lo[0], hi[1] - s]
                    })
                    .collect()
            }
            Shape::Union(members) => {
                let per = (n / members.len()).max(4);
                members
                    .iter()
                    .flat_map(|m| m.boundary_samples(per))
                    .collect()
            }
        }
    }
}

fn box_boundary_distance<T: Real>(lo: &[T], hi: &[T], x: &[T]) -> T {
    let mut outside = T::zero();
    let mut inside = T::infinity();
    let mut is_inside = true;
    for k in 0..lo.len() {
        let below = lo[k] - x[k];
        let above = x[k] - hi[k];
        let excess = below.max(above).max(T::zero());
        if excess > T::zero() {
            is_inside = false;
        }
        outside += excess * excess;
        inside = inside.min((x[k] - lo[k]).min(hi[k] - x[k]));
    }
    if is_inside {
        inside
    } else {
        outside.sqrt()
    }
}

const DISJOINT_SAMPLES: usize = 256;

fn members_disjoint<T: Real>(a: &Shape<T>, b: &Shape<T>) -> bool {
    let tol = T::lit(1e-12);
    let one_way = |p: &Shape<T>, q: &Shape<T>| {
        p.boundary_samples(DISJOINT_SAMPLES)
            .iter()
            .all(|s| !q.contains(s) && q.boundary_distance(s) > tol)
    };
    one_way(a, b) && one_way(b, a)
}

/// `d(x, dA)`: distance from `x` to the boundary of `shape`.
pub fn exact_distance<T: Real>(shape: &Shape<T>, x: &[T]) -> T {
    shape.boundary_distance(x)
}

/// Signed boundary distance: negative on the closed shape, positive outside.
pub fn exact_signed_distance<T: Real>(shape: &Shape<T>, x: &[T]) -> T {
    let d = shape.boundary_distance(x);
    if shape.contains(x) {
        -d
    } else {
        d
    }
}

/// Box design domain `Omega` with the set `A` strictly inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignDomain<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    shape: Shape<T>,
}

impl<T: Real> DesignDomain<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, shape: Shape<T>) -> Result<Self, GeometryError> {
        Shape::Box {
            lo: lo.clone(),
            hi: hi.clone(),
        }
        .validate()?;
        shape.validate()?;
        if shape.dim() != lo.len() {
            return Err(GeometryError::DimensionMismatch {
                shape: shape.dim(),
                domain: lo.len(),
            });
        }
        let domain = Self { lo, hi, shape };
        let gap = domain.gap();
        if !(gap > T::zero()) {
            return Err(GeometryError::NotInterior {
                gap: gap.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(domain)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    /// `d(A, dOmega)`, exact: for a set inside a box this is the smallest
    /// distance between the set's extent and a face.
    pub fn gap(&self) -> T {
        let (a_lo, a_hi) = self.shape.bounding_box();
        (0..self.dim()).fold(T::infinity(), |m, k| {
            m.min(a_lo[k] - self.lo[k]).min(self.hi[k] - a_hi[k])
        })
    }

    /// `d(x, dOmega)` for `x` inside the box.
    pub fn boundary_distance(&self, x: &[T]) -> T {
        box_boundary_distance(&self.lo, &self.hi, x)
    }

    /// Grid matching the box with spacing at most `max_spacing`.
    pub fn grid(&self, max_spacing: T) -> Result<Grid<T>, crate::fields::FieldError> {
        Grid::with_max_spacing(&self.lo, &self.hi, max_spacing)
    }
}

/// Set of grid node indices (discrete stand-in for the interface `dA`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet<T> {
    grid: Grid<T>,
    nodes: Vec<usize>,
}

impl<T: Real> NodeSet<T> {
    pub fn new(grid: Grid<T>, nodes: Vec<usize>) -> Self {
        Self { grid, nodes }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Grid nodes within one spacing of the boundary of `shape`.
///
/// Fails with [`GeometryError::EmptyInterface`] when the band is empty or the
/// spacing is not below the shape's feature size.
pub fn rasterize_interface<T: Real>(
    shape: &Shape<T>,
    grid: &Grid<T>,
) -> Result<NodeSet<T>, GeometryError> {
    let h = grid.max_spacing();
    let feature = shape.feature_size();
    let empty = || GeometryError::EmptyInterface {
        spacing: h.to_f64().unwrap_or(f64::NAN),
        feature: feature.to_f64().unwrap_or(f64::NAN),
    };
    if shape.dim() != grid.dim() {
        return Err(GeometryError::DimensionMismatch {
            shape: shape.dim(),
            domain: grid.dim(),
        });
    }
    if !(h < feature) {
        return Err(empty());
    }
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let c = grid.coords(i);
            shape.boundary_distance(&c[..grid.dim()]) <= h
        })
        .collect();
    if nodes.is_empty() {
        return Err(empty());
    }
    Ok(NodeSet::new(*grid, nodes))
}

/// Nodes of the closed shape.
pub fn shape_mask<T: Real>(shape: &Shape<T>, grid: &Grid<T>) -> Mask<T> {
    Mask::from_fn(*grid, |x| shape.contains(x))
}

/// `Omega* = { x : d(x, dA) <= d(x, dOmega) }` evaluated from exact distances.
pub fn omega_star_mask<T: Real>(domain: &DesignDomain<T>, grid: &Grid<T>) -> Mask<T> {
    Mask::from_fn(*grid, |x| {
        domain.shape.boundary_distance(x) <= domain.boundary_distance(x)
    })
}

/// Exhaustive nearest-interface-node distance at every grid node.
pub fn brute_force_distance_field<T: Real>(
    interface: &NodeSet<T>,
    grid: &Grid<T>,
) -> Result<ScalarField<T>, GeometryError> {
    if interface.is_empty() {
        return Err(GeometryError::EmptyInterface {
            spacing: grid.max_spacing().to_f64().unwrap_or(f64::NAN),
            feature: 0.0,
        });
    }
    let src = interface.grid();
    let pts: Vec<[T; 2]> = interface.nodes().iter().map(|&i| src.coords(i)).collect();
    Ok(ScalarField::from_fn(*grid, |x| {
        let y = if x.len() == 2 { x[1] } else { T::zero() };
        pts.iter()
            .fold(T::infinity(), |m, p| {
                let dx = x[0] - p[0];
                let dy = y - p[1];
                m.min(dx * dx + dy * dy)
            })
            .sqrt()
    }))
}
