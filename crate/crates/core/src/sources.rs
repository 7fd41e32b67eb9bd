//! Source terms `f` and Dirichlet data `g`, plus scanners for the damping
//! exponent of `f` near the interface.
//!
//! The damping exponent `zeta` is read off from how fast ball means of `f`
//! centered on the interface vanish: `m_eps(f^p) ~ eps^(zeta * p)`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fields::{volume_mean, FieldError, Grid, ScalarField};
use crate::geometry::Shape;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),
    #[error("need at least 4 distinct radii spanning a decade, got {0:?}")]
    InsufficientRadii(Vec<f64>),
    #[error("need at least 16 boundary samples, got {0}")]
    TooFewSamples(usize),
    #[error("power p must be 1 or 2, got {0}")]
    InvalidPower(u32),
    #[error("ball mean of the source vanished at radius {radius}")]
    VanishingMean { radius: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type PointFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Source term `f` of `-a Lap(u) + u = f`.
#[derive(Clone)]
pub enum SourceSpec<T> {
    /// `f = amplitude` outside the closed shape, 0 on it.
    IndicatorComplement { shape: Shape<T>, amplitude: T },
    /// `f = [(|x - center|^2 - radius^2) v 0]^zeta`.
    PowerLawBall { center: Vec<T>, radius: T, zeta: T },
    /// 1D: `f = 0` for `|x| <= k`, `(|x| - k)^zeta` otherwise.
    PowerLaw1D { k: T, zeta: T },
    /// Arbitrary nonnegative callable with an optional declared exponent.
    Custom { f: PointFn<T>, zeta: Option<T> },
}

impl<T: Real> fmt::Debug for SourceSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::IndicatorComplement { shape, amplitude } => f
                .debug_struct("IndicatorComplement")
                .field("shape", shape)
                .field("amplitude", amplitude)
                .finish(),
            SourceSpec::PowerLawBall {
                center,
                radius,
                zeta,
            } => f
                .debug_struct("PowerLawBall")
                .field("center", center)
                .field("radius", radius)
                .field("zeta", zeta)
                .finish(),
            SourceSpec::PowerLaw1D { k, zeta } => f
                .debug_struct("PowerLaw1D")
                .field("k", k)
                .field("zeta", zeta)
                .finish(),
            SourceSpec::Custom { zeta, .. } => f
                .debug_struct("Custom")
                .field("zeta", zeta)
                .finish_non_exhaustive(),
        }
    }
}

impl<T: Real> SourceSpec<T> {
    pub fn custom(f: impl Fn(&[T]) -> T + Send + Sync + 'static, zeta: Option<T>) -> Self {
        SourceSpec::Custom {
            f: Arc::new(f),
            zeta,
        }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        let bad = |m: &str| Err(SourceError::InvalidSource(m.into()));
        match self {
            SourceSpec::IndicatorComplement { shape, amplitude } => {
                shape
                    .validate()
                    .map_err(|e| SourceError::InvalidSource(e.to_string()))?;
                if !(*amplitude > T::zero() && amplitude.is_finite()) {
                    return bad("indicator amplitude must be positive and finite");
                }
            }
            SourceSpec::PowerLawBall {
                center,
                radius,
                zeta,
            } => {
                if !(*radius > T::zero() && radius.is_finite())
                    || center.is_empty()
                    || center.len() > 2
                {
                    return bad("power-law ball needs a positive radius and a 1D/2D center");
                }
                if !(*zeta >= T::zero() && zeta.is_finite()) {
                    return bad("zeta must be finite and nonnegative");
                }
            }
            SourceSpec::PowerLaw1D { k, zeta } => {
                if !(*k > T::zero() && k.is_finite()) {
                    return bad("k must be positive");
                }
                if !(*zeta >= T::zero() && zeta.is_finite()) {
                    return bad("zeta must be finite and nonnegative");
                }
            }
            SourceSpec::Custom { zeta, .. } => {
                if let Some(z) = zeta {
                    if !(*z >= T::zero() && z.is_finite()) {
                        return bad("declared zeta must be finite and nonnegative");
                    }
                }
            }
        }
        Ok(())
    }

    /// Exponent the source declares for itself, if any.
    pub fn declared_zeta(&self) -> Option<T> {
        match self {
            SourceSpec::IndicatorComplement { .. } => Some(T::zero()),
            SourceSpec::PowerLawBall { zeta, .. } | SourceSpec::PowerLaw1D { zeta, .. } => {
                Some(*zeta)
            }
            SourceSpec::Custom { zeta, .. } => *zeta,
        }
    }

    /// The zero set `A` implied by the variant, when it has one.
    pub fn zero_set(&self) -> Option<Shape<T>> {
        match self {
            SourceSpec::IndicatorComplement { shape, .. } => Some(shape.clone()),
            SourceSpec::PowerLawBall { center, radius, .. } => Some(Shape::Ball {
                center: center.clone(),
                radius: *radius,
            }),
            SourceSpec::PowerLaw1D { k, .. } => Some(Shape::interval(T::zero(), *k)),
            SourceSpec::Custom { .. } => None,
        }
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        evaluate_source(self, x)
    }

    pub fn sample(&self, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::from_fn(*grid, |x| evaluate_source(self, x))
    }
}

/// Value of `f` at `x`; exactly zero on the closed zero set.
pub fn evaluate_source<T: Real>(spec: &SourceSpec<T>, x: &[T]) -> T {
    match spec {
        SourceSpec::IndicatorComplement { shape, amplitude } => {
            if shape.contains(x) {
                T::zero()
            } else {
                *amplitude
            }
        }
        SourceSpec::PowerLawBall {
            center,
            radius,
            zeta,
        } => {
            let r2: T = x.iter().zip(center).map(|(&a, &c)| (a - c) * (a - c)).sum();
            let excess = r2 - *radius * *radius;
            if excess <= T::zero() {
                T::zero()
            } else {
                excess.powf(*zeta)
            }
        }
        SourceSpec::PowerLaw1D { k, zeta } => {
            let t = x[0].abs() - *k;
            if t <= T::zero() {
                T::zero()
            } else {
                t.powf(*zeta)
            }
        }
        SourceSpec::Custom { f, .. } => f(x),
    }
}

/// Dirichlet data `g` on the boundary of the design box.
#[derive(Clone)]
pub enum BoundarySpec<T> {
    Constant(T),
    Callable(PointFn<T>),
}

impl<T: Real> fmt::Debug for BoundarySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySpec::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            BoundarySpec::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

impl<T: Real> BoundarySpec<T> {
    pub fn callable(g: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        BoundarySpec::Callable(Arc::new(g))
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if let BoundarySpec::Constant(v) = self {
            if !(*v >= T::zero() && v.is_finite()) {
                return Err(SourceError::InvalidBoundary(
                    "g must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        match self {
            BoundarySpec::Constant(v) => *v,
            BoundarySpec::Callable(g) => g(x),
        }
    }
}

/// Extremes of `eps^(-zeta p) m_eps^y(f^p)` over the sampled `(eps, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanScan<T> {
    pub inf: T,
    pub sup: T,
}

impl<T: Real> MeanScan<T> {
    /// Condition holds on the sample when the infimum is positive and the
    /// supremum finite.
    pub fn passes(&self) -> bool {
        self.inf > T::zero() && self.sup.is_finite()
    }

    pub fn ratio(&self) -> T {
        self.sup / self.inf
    }
}

const LOCAL_NODES_1D: usize = 801;
const LOCAL_NODES_2D: usize = 129;

/// Ball mean of `f^p` computed on a local lattice that spans exactly the
/// ball's bounding box.
fn local_power_mean<T: Real>(
    spec: &SourceSpec<T>,
    y: &[T],
    eps: T,
    p: u32,
) -> Result<T, SourceError> {
    let grid = match y.len() {
        1 => Grid::new_1d(LOCAL_NODES_1D, y[0] - eps, y[0] + eps)?,
        2 => Grid::new_2d(
            [LOCAL_NODES_2D, LOCAL_NODES_2D],
            [y[0] - eps, y[1] - eps],
            [y[0] + eps, y[1] + eps],
        )?,
        d => return Err(FieldError::UnsupportedDimension(d).into()),
    };
    let field = ScalarField::from_fn(grid, |x| evaluate_source(spec, x).powi(p as i32));
    Ok(volume_mean(&field, y, eps)?)
}

fn check_radii<T: Real>(
    eps_list: &[T],
    min_count: usize,
    need_decade: bool,
) -> Result<(), SourceError> {
    let as_f64 = || {
        eps_list
            .iter()
            .map(|e| e.to_f64().unwrap_or(f64::NAN))
            .collect::<Vec<_>>()
    };
    let mut sorted: Vec<T> = eps_list.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    sorted.dedup();
    let positive = sorted.iter().all(|e| *e > T::zero() && e.is_finite());
    let spans =
        !need_decade || (sorted.len() >= 2 && sorted[sorted.len() - 1] >= T::lit(10.0) * sorted[0]);
    if sorted.len() < min_count || !positive || !spans {
        return Err(SourceError::InsufficientRadii(as_f64()));
    }
    Ok(())
}

/// Scans `eps^(-zeta p) * m_eps^y(f^p)` over `eps_list` and
/// `boundary_samples` points `y` on the boundary of `shape`.
pub fn mean_condition_scan<T: Real>(
    spec: &SourceSpec<T>,
    shape: &Shape<T>,
    zeta: T,
    p: u32,
    eps_list: &[T],
    boundary_samples: usize,
) -> Result<MeanScan<T>, SourceError> {
    if p != 1 && p != 2 {
        return Err(SourceError::InvalidPower(p));
    }
    if boundary_samples < 16 {
        return Err(SourceError::TooFewSamples(boundary_samples));
    }
    check_radii(eps_list, 1, false)?;
    let mut scan = MeanScan {
        inf: T::infinity(),
        sup: T::neg_infinity(),
    };
    for y in shape.boundary_samples(boundary_samples) {
        for &eps in eps_list {
            let m = local_power_mean(spec, &y, eps, p)?;
            let v = eps.powf(-zeta * T::count(p as usize)) * m;
            scan.inf = scan.inf.min(v);
            scan.sup = scan.sup.max(v);
        }
    }
    Ok(scan)
}

/// Least-squares slope of `log m_eps(f)` against `log eps`, averaged over 64
/// boundary samples of `shape`.
pub fn estimate_zeta<T: Real>(
    spec: &SourceSpec<T>,
    shape: &Shape<T>,
    eps_list: &[T],
) -> Result<T, SourceError> {
    check_radii(eps_list, 4, true)?;
    let xs: Vec<T> = eps_list.iter().map(|e| e.ln()).collect();
    let samples = shape.boundary_samples(64);
    let mut total = T::zero();
    for y in &samples {
        let mut ys = Vec::with_capacity(eps_list.len());
        for &eps in eps_list {
            let m = local_power_mean(spec, y, eps, 1)?;
            if !(m > T::zero()) {
                return Err(SourceError::VanishingMean {
                    radius: eps.to_f64().unwrap_or(f64::NAN),
                });
            }
            ys.push(m.ln());
        }
        total += least_squares_slope(&xs, &ys);
    }
    Ok(total / T::count(samples.len()))
}

pub(crate) fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_1d_values() {
        let f = SourceSpec::PowerLaw1D {
            k: 2.0f64 / 3.0,
            zeta: 2.0,
        };
        assert_eq!(evaluate_source(&f, &[0.5]), 0.0);
        assert!((evaluate_source(&f, &[1.0]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((evaluate_source(&f, &[-1.0]) - 1.0 / 9.0).abs() < 1e-15);
        let flat = SourceSpec::PowerLaw1D {
            k: 2.0f64 / 3.0,
            zeta: 0.0,
        };
        assert_eq!(evaluate_source(&flat, &[2.0 / 3.0]), 0.0);
        assert_eq!(evaluate_source(&flat, &[0.7]), 1.0);
    }

    #[test]
    fn indicator_values() {
        let f = SourceSpec::IndicatorComplement {
            shape: Shape::ball(&[0.0, 0.0], 0.5),
            amplitude: 1.0,
        };
        assert_eq!(evaluate_source(&f, &[0.9, 0.0]), 1.0);
        assert_eq!(evaluate_source(&f, &[0.5, 0.0]), 0.0);
    }

    #[test]
    fn validation() {
        assert!(SourceSpec::PowerLaw1D { k: 0.5, zeta: -1.0 }
            .validate()
            .is_err());
        assert!(SourceSpec::IndicatorComplement {
            shape: Shape::interval(0.0f64, 0.5),
            amplitude: 0.0
        }
        .validate()
        .is_err());
        assert!(BoundarySpec::Constant(-1.0).validate().is_err());
        assert!(BoundarySpec::Constant(1.0).validate().is_ok());
    }

    #[test]
    fn indicator_scan_near_half_amplitude() {
        let shape = Shape::interval(0.0f64, 2.0 / 3.0);
        let f = SourceSpec::IndicatorComplement {
            shape: shape.clone(),
            amplitude: 2.0,
        };
        let scan = mean_condition_scan(&f, &shape, 0.0, 1, &[0.01, 0.05, 0.1], 16).unwrap();
        assert!(
            (scan.inf - 1.0).abs() < 0.01 && (scan.sup - 1.0).abs() < 0.01,
            "{scan:?}"
        );
        let sq = mean_condition_scan(&f, &shape, 0.0, 2, &[0.01, 0.05, 0.1], 16).unwrap();
        assert!((sq.inf - 2.0).abs() < 0.02, "{sq:?}");
    }

    #[test]
    fn wrong_zeta_ratio_grows() {
        let disk = Shape::ball(&[0.0, 0.0], 0.5);
        let f = SourceSpec::PowerLawBall {
            center: vec![0.0, 0.0],
            radius: 0.5,
            zeta: 1.0,
        };
        let right = mean_condition_scan(&f, &disk, 1.0, 1, &[0.05, 0.1, 0.2], 16).unwrap();
        assert!(right.passes());
        let narrow = mean_condition_scan(&f, &disk, 0.0, 1, &[0.05, 0.1], 16).unwrap();
        let wide = mean_condition_scan(&f, &disk, 0.0, 1, &[0.0125, 0.05, 0.1, 0.2], 16).unwrap();
        assert!(
            wide.ratio() > narrow.ratio() * 4.0,
            "{} vs {}",
            wide.ratio(),
            narrow.ratio()
        );
        assert!(right.ratio() < 2.0, "{}", right.ratio());
    }

    #[test]
    fn zeta_estimates() {
        let eps = [0.01, 0.02, 0.05, 0.1];
        let shape = Shape::interval(0.0f64, 2.0 / 3.0);
        for zeta in [0.0, 1.0, 2.0] {
            let f = SourceSpec::PowerLaw1D {
                k: 2.0f64 / 3.0,
                zeta,
            };
            let z = estimate_zeta(&f, &shape, &eps).unwrap();
            assert!((z - zeta).abs() < 0.15, "zeta {zeta}: {z}");
        }
        assert!(matches!(
            estimate_zeta(
                &SourceSpec::PowerLaw1D { k: 0.5, zeta: 1.0 },
                &shape,
                &[0.01, 0.02, 0.05]
            ),
            Err(SourceError::InsufficientRadii(_))
        ));
    }
}
