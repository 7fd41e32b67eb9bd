//! Log transforms of the solution into (signed) distance fields, the
//! interface-minimum diagnostic and error functionals.
//!
//! Sign convention of the signed transform: the result approximates the
//! signed distance that is negative inside the zero set `A` of the source,
//! i.e. `sqrt(a) ln u` on `A` and `-sqrt(a) ln(C* - u)` outside.

use thiserror::Error;

use crate::fields::{Mask, ScalarField};
use crate::geometry::NodeSet;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("solution is not positive at node {index} (u = {value})")]
    NonPositiveSolution { index: usize, value: f64 },
    #[error("u = {value} reaches C* = {c_star} at exterior node {index}")]
    BranchDomainViolation {
        index: usize,
        value: f64,
        c_star: f64,
    },
    #[error("error region is empty")]
    EmptyRegion,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaDiagnostic<T> {
    /// Minimum of `u` over the rasterized interface.
    pub beta: T,
    /// `sqrt(a) ln beta`.
    pub scaled_log: T,
}

#[derive(Debug, Clone)]
pub struct TransformResult<T> {
    /// Transformed values; zero where `u` is unusable (see `valid`).
    pub distance: ScalarField<T>,
    /// Nodes of the requested region where the value is trustworthy.
    pub valid: Mask<T>,
    /// Region nodes dropped because `u` (or `C* - u`) underflowed.
    pub excluded: usize,
    pub beta: Option<BetaDiagnostic<T>>,
    pub c_star: Option<T>,
}

impl<T: Real> TransformResult<T> {
    pub fn with_beta(mut self, beta: BetaDiagnostic<T>) -> Self {
        self.beta = Some(beta);
        self
    }

    /// Fraction of region nodes that were excluded.
    pub fn excluded_fraction(&self) -> f64 {
        let total = self.valid.count() + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }
}

fn check_a<T: Real>(a: T) -> Result<T, TransformError> {
    if !(a > T::zero() && a.is_finite()) {
        return Err(TransformError::InvalidArgument(format!(
            "diffusion must be positive, got {a}"
        )));
    }
    Ok(a.sqrt())
}

fn same_grid<T: Real>(
    a: &crate::fields::Grid<T>,
    b: &crate::fields::Grid<T>,
) -> Result<(), TransformError> {
    if a.dim() != b.dim() || a.len() != b.len() || a.lo() != b.lo() || a.hi() != b.hi() {
        return Err(TransformError::GridMismatch);
    }
    Ok(())
}

fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `-sqrt(a) ln u` on `region`.
pub fn distance_field<T: Real>(
    u: &ScalarField<T>,
    a: T,
    region: &Mask<T>,
) -> Result<TransformResult<T>, TransformError> {
    let sa = check_a(a)?;
    same_grid(u.grid(), region.grid())?;
    let floor = T::underflow_floor();
    let n = u.grid().len();
    let mut values = vec![T::zero(); n];
    let mut valid = Mask::full(*u.grid(), false);
    let mut excluded = 0;
    for (i, slot) in values.iter_mut().enumerate() {
        let v = u.get(i);
        if region.get(i) && v <= T::zero() {
            return Err(TransformError::NonPositiveSolution {
                index: i,
                value: as_f64(v),
            });
        }
        if v >= floor {
            *slot = -sa * v.ln();
            valid.set(i, region.get(i));
        } else if region.get(i) {
            excluded += 1;
        }
    }
    Ok(TransformResult {
        distance: ScalarField::from_raw(*u.grid(), values),
        valid,
        excluded,
        beta: None,
        c_star: None,
    })
}

fn signed_impl<T: Real>(
    u: &ScalarField<T>,
    exterior: impl Fn(usize) -> T,
    a: T,
    c_star: T,
    region_a: &Mask<T>,
    region_omega_star: &Mask<T>,
) -> Result<TransformResult<T>, TransformError> {
    let sa = check_a(a)?;
    same_grid(u.grid(), region_a.grid())?;
    same_grid(u.grid(), region_omega_star.grid())?;
    if !(c_star > T::zero() && c_star.is_finite()) {
        return Err(TransformError::InvalidArgument(format!(
            "C* must be positive, got {c_star}"
        )));
    }
    let floor = T::underflow_floor();
    let n = u.grid().len();
    let mut values = vec![T::zero(); n];
    let mut valid = Mask::full(*u.grid(), false);
    let mut excluded = 0;
    for (i, slot) in values.iter_mut().enumerate() {
        let trusted = region_omega_star.get(i);
        let (v, inside) = if region_a.get(i) {
            (u.get(i), true)
        } else {
            (exterior(i), false)
        };
        if v <= T::zero() {
            if trusted {
                return Err(if inside {
                    TransformError::NonPositiveSolution {
                        index: i,
                        value: as_f64(v),
                    }
                } else {
                    TransformError::BranchDomainViolation {
                        index: i,
                        value: as_f64(u.get(i)),
                        c_star: as_f64(c_star),
                    }
                });
            }
            continue;
        }
        if v < floor {
            if trusted {
                excluded += 1;
            }
            continue;
        }
        *slot = if inside { sa * v.ln() } else { -sa * v.ln() };
        valid.set(i, trusted);
    }
    Ok(TransformResult {
        distance: ScalarField::from_raw(*u.grid(), values),
        valid,
        excluded,
        beta: None,
        c_star: Some(c_star),
    })
}

/// Two-branch signed transform: `sqrt(a) ln u` on `region_a`,
/// `-sqrt(a) ln(C* - u)` elsewhere; trusted on `region_omega_star`.
pub fn signed_distance_field<T: Real>(
    u: &ScalarField<T>,
    a: T,
    c_star: T,
    region_a: &Mask<T>,
    region_omega_star: &Mask<T>,
) -> Result<TransformResult<T>, TransformError> {
    signed_impl(
        u,
        |i| c_star - u.get(i),
        a,
        c_star,
        region_a,
        region_omega_star,
    )
}

/// Same as [`signed_distance_field`] with `C* - u` supplied separately.
///
/// Far outside `A`, `C* - u` falls below the rounding level of `u` itself
/// (`e^(-d/sqrt a)` against `C* * eps`), so the subtraction loses every digit.
/// The complement solves `-a Lap(w) + w = C* - f` with `w = C* - g`, which the
/// solver resolves to full relative accuracy.
pub fn signed_distance_field_with_complement<T: Real>(
    u: &ScalarField<T>,
    complement: &ScalarField<T>,
    a: T,
    c_star: T,
    region_a: &Mask<T>,
    region_omega_star: &Mask<T>,
) -> Result<TransformResult<T>, TransformError> {
    same_grid(u.grid(), complement.grid())?;
    signed_impl(
        u,
        |i| complement.get(i),
        a,
        c_star,
        region_a,
        region_omega_star,
    )
}

/// Minimum of `u` over the interface nodes and its scaled log.
pub fn beta_diagnostic<T: Real>(
    u: &ScalarField<T>,
    interface: &NodeSet<T>,
    a: T,
) -> Result<BetaDiagnostic<T>, TransformError> {
    let sa = check_a(a)?;
    same_grid(u.grid(), interface.grid())?;
    if interface.is_empty() {
        return Err(TransformError::EmptyRegion);
    }
    let mut beta = T::infinity();
    for &i in interface.nodes() {
        let v = u.get(i);
        if !(v > T::zero()) {
            return Err(TransformError::NonPositiveSolution {
                index: i,
                value: as_f64(v),
            });
        }
        beta = beta.min(v);
    }
    Ok(BetaDiagnostic {
        beta,
        scaled_log: sa * beta.ln(),
    })
}

/// `max |computed - oracle|` over `region`.
pub fn sup_error<T: Real>(
    computed: &ScalarField<T>,
    oracle: &ScalarField<T>,
    region: &Mask<T>,
) -> Result<T, TransformError> {
    let (lo, hi) = error_range(computed, oracle, region)?;
    Ok(lo.abs().max(hi.abs()))
}

/// `(min, max)` of `computed - oracle` over `region`.
pub fn error_range<T: Real>(
    computed: &ScalarField<T>,
    oracle: &ScalarField<T>,
    region: &Mask<T>,
) -> Result<(T, T), TransformError> {
    same_grid(computed.grid(), oracle.grid())?;
    same_grid(computed.grid(), region.grid())?;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut any = false;
    for i in region.indices() {
        let e = computed.get(i) - oracle.get(i);
        lo = lo.min(e);
        hi = hi.max(e);
        any = true;
    }
    if !any {
        return Err(TransformError::EmptyRegion);
    }
    Ok((lo, hi))
}
