//! Finite-difference solver for `-a Lap(u) + u = f` in a box with `u = g` on
//! the boundary.
//!
//! The operator is the centered 3-point (1D) or 5-point (2D) Laplacian scaled
//! by `a`, plus the identity, on interior nodes; Dirichlet values are folded
//! into the right-hand side. 1D systems are solved by tridiagonal
//! elimination. 2D systems use Jacobi-preconditioned conjugate gradients
//! followed by a relative refinement pass: the solution decays like
//! `exp(-d / sqrt(a))` and a residual-based stopping rule only controls it in
//! absolute terms, so nodes far below the solution's scale are re-solved on
//! their own with the already converged neighbours as Dirichlet data. This
//! keeps tiny values accurate relative to themselves, which is what the log
//! transform needs.

use thiserror::Error;

use crate::fields::{Grid, ScalarField};
use crate::geometry::DesignDomain;
use crate::scalar::{dot, norm2, Real};
use crate::sources::{BoundarySpec, SourceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("diffusion a = {0} outside [1e-8, 1]")]
    InvalidDiffusion(f64),
    #[error("tolerance {0} outside (0, 1e-4]")]
    InvalidTolerance(f64),
    #[error("grid spacing {spacing} exceeds sqrt(a)/4 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("grid does not cover the design domain exactly")]
    GridMismatch,
    #[error(
        "conjugate gradients stopped after {iterations} iterations at relative residual {residual}"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("system assembled for a = {system} but config has a = {config}")]
    ConfigMismatch { system: f64, config: f64 },
    #[error("source or boundary data is negative or non-finite at node {0}")]
    InvalidData(usize),
}

/// Solver parameters: diffusion `a`, relative residual tolerance, iteration cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub a: T,
    pub tolerance: T,
    pub max_iterations: usize,
    pub grid: Grid<T>,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(grid: Grid<T>, a: T) -> Self {
        Self {
            a,
            tolerance: T::lit(1e-10),
            max_iterations: 50_000,
            grid,
        }
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        check_diffusion(self.a)?;
        if !(self.tolerance > T::zero() && self.tolerance <= T::lit(1e-4)) {
            return Err(SolverError::InvalidTolerance(
                self.tolerance.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(())
    }
}

fn check_diffusion<T: Real>(a: T) -> Result<(), SolverError> {
    if !(a >= T::lit(1e-8) && a <= T::one()) {
        return Err(SolverError::InvalidDiffusion(
            a.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(())
}

/// Constant-coefficient stencil of `-a Lap_h + I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil<T> {
    /// Coupling `a / hx^2` to the x-neighbours (enters the matrix negated).
    pub cx: T,
    /// Coupling `a / hy^2` to the y-neighbours; zero in 1D.
    pub cy: T,
    /// `1 + 2 cx + 2 cy`.
    pub diag: T,
}

/// Assembled interior system `A u = b`.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    grid: Grid<T>,
    a: T,
    stencil: Stencil<T>,
    /// Interior node count along each axis.
    interior: [usize; 2],
    rhs: Vec<T>,
    source: Vec<T>,
    /// Boundary values at boundary nodes, zero elsewhere.
    lift: Vec<T>,
    bound: T,
}

impl<T: Real> DiscreteSystem<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn diffusion(&self) -> T {
        self.a
    }

    pub fn stencil(&self) -> Stencil<T> {
        self.stencil
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// `max(max f, max g)` over the nodes: the discrete maximum-principle bound.
    pub fn bound(&self) -> T {
        self.bound
    }

    /// Grid node of interior unknown `k`.
    pub fn node_of(&self, k: usize) -> usize {
        let (i, j) = (k % self.interior[0], k / self.interior[0]);
        if self.grid.dim() == 1 {
            self.grid.index(i + 1, 0)
        } else {
            self.grid.index(i + 1, j + 1)
        }
    }

    /// Dense row `k` of the matrix, for inspection in tests and tools.
    pub fn dense_row(&self, k: usize) -> Vec<T> {
        let mut row = vec![T::zero(); self.unknowns()];
        let nx = self.interior[0];
        let (i, j) = (k % nx, k / nx);
        row[k] = self.stencil.diag;
        if i > 0 {
            row[k - 1] = -self.stencil.cx;
        }
        if i + 1 < nx {
            row[k + 1] = -self.stencil.cx;
        }
        if self.grid.dim() == 2 {
            if j > 0 {
                row[k - nx] = -self.stencil.cy;
            }
            if j + 1 < self.interior[1] {
                row[k + nx] = -self.stencil.cy;
            }
        }
        row
    }

    /// `y = A x` on the interior unknowns.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let Stencil { cx, cy, diag } = self.stencil;
        let nx = self.interior[0];
        if self.grid.dim() == 1 {
            for k in 0..nx {
                let mut v = diag * x[k];
                if k > 0 {
                    v -= cx * x[k - 1];
                }
                if k + 1 < nx {
                    v -= cx * x[k + 1];
                }
                y[k] = v;
            }
            return;
        }
        let ny = self.interior[1];
        for j in 0..ny {
            for i in 0..nx {
                let k = i + nx * j;
                let mut v = diag * x[k];
                if i > 0 {
                    v -= cx * x[k - 1];
                }
                if i + 1 < nx {
                    v -= cx * x[k + 1];
                }
                if j > 0 {
                    v -= cy * x[k - nx];
                }
                if j + 1 < ny {
                    v -= cy * x[k + nx];
                }
                y[k] = v;
            }
        }
    }

    /// Interior unknowns of a full nodal field.
    fn restrict(&self, u: &ScalarField<T>) -> Vec<T> {
        (0..self.unknowns())
            .map(|k| u.get(self.node_of(k)))
            .collect()
    }

    /// Full nodal field from interior unknowns plus the boundary lift.
    fn extend(&self, x: &[T]) -> ScalarField<T> {
        let mut values = self.lift.clone();
        for (k, &v) in x.iter().enumerate() {
            values[self.node_of(k)] = v;
        }
        ScalarField::from_raw(self.grid, values)
    }
}

/// Assembles the interior system for the design domain, sampling `f` at every
/// node and imposing `g` at boundary nodes.
///
/// Refuses grids whose spacing exceeds `sqrt(a)/4`, which would not resolve
/// the `sqrt(a)`-wide boundary layer.
pub fn assemble<T: Real>(
    domain: &DesignDomain<T>,
    grid: &Grid<T>,
    a: T,
    f: &SourceSpec<T>,
    g: &BoundarySpec<T>,
) -> Result<DiscreteSystem<T>, SolverError> {
    if !grid.matches_box(domain.lo(), domain.hi()) {
        return Err(SolverError::GridMismatch);
    }
    let source = f.sample(grid);
    let boundary = ScalarField::from_fn(*grid, |x| g.evaluate(x));
    assemble_from_samples(grid, a, &source, &boundary)
}

/// Assembles from nodal samples: `source` is read on interior nodes and
/// `boundary` on boundary nodes.
pub fn assemble_from_samples<T: Real>(
    grid: &Grid<T>,
    a: T,
    source: &ScalarField<T>,
    boundary: &ScalarField<T>,
) -> Result<DiscreteSystem<T>, SolverError> {
    check_diffusion(a)?;
    if source.grid() != grid || boundary.grid() != grid {
        return Err(SolverError::GridMismatch);
    }
    let limit = a.sqrt() / T::lit(4.0);
    let spacing = grid.max_spacing();
    if spacing > limit * (T::one() + T::lit(1e-12)) {
        return Err(SolverError::GridTooCoarse {
            spacing: spacing.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    let dim = grid.dim();
    let cx = a / (grid.spacing(0) * grid.spacing(0));
    let cy = if dim == 2 {
        a / (grid.spacing(1) * grid.spacing(1))
    } else {
        T::zero()
    };
    let stencil = Stencil {
        cx,
        cy,
        diag: T::one() + T::lit(2.0) * (cx + cy),
    };
    let interior = [
        grid.nodes(0) - 2,
        if dim == 2 { grid.nodes(1) - 2 } else { 1 },
    ];

    let mut lift = vec![T::zero(); grid.len()];
    let mut src = vec![T::zero(); grid.len()];
    let mut bound = T::zero();
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) {
            let v = boundary.get(idx);
            if !(v >= T::zero() && v.is_finite()) {
                return Err(SolverError::InvalidData(idx));
            }
            lift[idx] = v;
            bound = bound.max(v);
        } else {
            let v = source.get(idx);
            if !(v >= T::zero() && v.is_finite()) {
                return Err(SolverError::InvalidData(idx));
            }
            src[idx] = v;
            bound = bound.max(v);
        }
    }

    let mut system = DiscreteSystem {
        grid: *grid,
        a,
        stencil,
        interior,
        rhs: Vec::new(),
        source: src,
        lift,
        bound,
    };
    let n = interior[0] * interior[1];
    let mut rhs = Vec::with_capacity(n);
    for k in 0..n {
        let node = system.node_of(k);
        let (i, j) = grid.ij(node);
        let mut b = system.source[node];
        for (ni, nj, c) in neighbours(grid, i, j, cx, cy) {
            let nb = grid.index(ni, nj);
            if grid.is_boundary(nb) {
                b += c * system.lift[nb];
            }
        }
        rhs.push(b);
    }
    system.rhs = rhs;
    Ok(system)
}

fn neighbours<T: Real>(
    grid: &Grid<T>,
    i: usize,
    j: usize,
    cx: T,
    cy: T,
) -> impl Iterator<Item = (usize, usize, T)> {
    let mut out = [
        (i - 1, j, cx),
        (i + 1, j, cx),
        (0, 0, T::zero()),
        (0, 0, T::zero()),
    ];
    let mut len = 2;
    if grid.dim() == 2 {
        out[2] = (i, j - 1, cy);
        out[3] = (i, j + 1, cy);
        len = 4;
    }
    out.into_iter().take(len)
}

/// Range check of a solution against the maximum-principle bound `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub min_u: T,
    pub max_u: T,
    /// Smallest value over interior nodes.
    pub min_interior_u: T,
    /// `max(sup f, sup g)` over the nodes.
    pub bound: T,
    pub tolerance: T,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    /// Nodal solution, boundary nodes set to `g`.
    pub u: ScalarField<T>,
    pub iterations: usize,
    pub residual: T,
    pub bounds: BoundReport<T>,
}

/// Solves the assembled system to the configured relative residual.
pub fn solve<T: Real>(
    system: &DiscreteSystem<T>,
    config: &SolverConfig<T>,
) -> Result<SolveResult<T>, SolverError> {
    config.validate()?;
    if (config.a - system.a).abs() > T::lit(1e-12) * system.a {
        return Err(SolverError::ConfigMismatch {
            system: system.a.to_f64().unwrap_or(f64::NAN),
            config: config.a.to_f64().unwrap_or(f64::NAN),
        });
    }
    let (x, iterations) = if system.grid.dim() == 1 {
        (thomas(system), 0)
    } else {
        let x0 = vec![T::zero(); system.unknowns()];
        let (mut x, iters) = pcg(
            system,
            &system.rhs,
            x0,
            config.tolerance,
            config.max_iterations,
        )?;
        let extra = refine_small_values(system, &mut x, config)?;
        (x, iters + extra)
    };
    let u = system.extend(&x);
    let residual = residual_norm(system, &u);
    if !(residual <= config.tolerance) {
        return Err(SolverError::NoConvergence {
            iterations,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let bounds = bound_report(&u, system.bound, config.tolerance);
    Ok(SolveResult {
        u,
        iterations,
        residual,
        bounds,
    })
}

/// Tridiagonal elimination. The matrix is a diagonally dominant M-matrix, so
/// every update adds nonnegative terms for nonnegative data and the
/// computed solution is accurate relative to each entry.
fn thomas<T: Real>(system: &DiscreteSystem<T>) -> Vec<T> {
    let n = system.unknowns();
    let Stencil { cx, diag, .. } = system.stencil;
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut denom = diag;
    c[0] = -cx / denom;
    d[0] = system.rhs[0] / denom;
    for k in 1..n {
        denom = diag + cx * c[k - 1];
        c[k] = -cx / denom;
        d[k] = (system.rhs[k] + cx * d[k - 1]) / denom;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

/// Jacobi-preconditioned conjugate gradients on the full interior system.
fn pcg<T: Real>(
    system: &DiscreteSystem<T>,
    b: &[T],
    mut x: Vec<T>,
    tol: T,
    max_iterations: usize,
) -> Result<(Vec<T>, usize), SolverError> {
    let n = b.len();
    let inv_diag = T::one() / system.stencil.diag;
    let b_norm = norm2(b);
    if b_norm == T::zero() {
        return Ok((vec![T::zero(); n], 0));
    }
    let mut ax = vec![T::zero(); n];
    system.apply(&x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut z: Vec<T> = r.iter().map(|&v| v * inv_diag).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    // Stop a little below the requested tolerance so the recomputed true
    // residual also satisfies it. The max-norm test bounds the nodal error:
    // rows of -a Lap_h + I dominate their off-diagonals by at least 1, so
    // ||A^-1||_inf <= 1 and |u - u_h| <= ||r||_inf <= tol * M / 2.
    let target = tol * b_norm * T::lit(0.5);
    let target_inf = tol * system.bound * T::lit(0.5);
    for it in 0..max_iterations {
        if norm2(&r) <= target && max_abs(&r) <= target_inf {
            return Ok((x, it));
        }
        system.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(SolverError::NoConvergence {
        iterations: max_iterations,
        residual: (norm2(&r) / b_norm).to_f64().unwrap_or(f64::NAN),
    })
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Ratio between successive refinement scales.
const REFINE_STEP: f64 = 1e-4;
const REFINE_MAX_LEVELS: usize = 80;

/// Re-solves, level by level, the unknowns lying below `REFINE_STEP` times
/// the current scale, with all other unknowns frozen as Dirichlet data.
fn refine_small_values<T: Real>(
    system: &DiscreteSystem<T>,
    x: &mut [T],
    config: &SolverConfig<T>,
) -> Result<usize, SolverError> {
    let Stencil { cx, cy, diag } = system.stencil;
    let nx = system.interior[0];
    let ny = system.interior[1];
    let step = T::lit(REFINE_STEP);
    let floor = T::underflow_floor() / step;
    let mut scale = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let mut iterations = 0;
    let mut active: Vec<usize> = (0..x.len()).collect();
    for _ in 0..REFINE_MAX_LEVELS {
        scale *= step;
        if !(scale > floor) {
            break;
        }
        active.retain(|&k| x[k] < scale);
        if active.is_empty() {
            break;
        }
        // local numbering of the active unknowns
        let mut local = vec![usize::MAX; x.len()];
        for (l, &k) in active.iter().enumerate() {
            local[k] = l;
        }
        let m = active.len();
        let mut b = vec![T::zero(); m];
        for (l, &k) in active.iter().enumerate() {
            let (i, j) = (k % nx, k / nx);
            let mut v = system.rhs[k];
            let mut couple = |kk: usize, c: T| {
                if local[kk] == usize::MAX {
                    v += c * x[kk];
                }
            };
            if i > 0 {
                couple(k - 1, cx);
            }
            if i + 1 < nx {
                couple(k + 1, cx);
            }
            if j > 0 {
                couple(k - nx, cy);
            }
            if j + 1 < ny {
                couple(k + nx, cy);
            }
            b[l] = v;
        }
        let sub = SubSystem {
            active: &active,
            local: &local,
            nx,
            ny,
            cx,
            cy,
            diag,
        };
        let x0: Vec<T> = active.iter().map(|&k| x[k].max(T::zero())).collect();
        let (xs, its) = sub.pcg(&b, x0, config.tolerance, config.max_iterations)?;
        iterations += its;
        for (l, &k) in active.iter().enumerate() {
            x[k] = xs[l];
        }
    }
    Ok(iterations)
}

struct SubSystem<'a, T> {
    active: &'a [usize],
    local: &'a [usize],
    nx: usize,
    ny: usize,
    cx: T,
    cy: T,
    diag: T,
}

impl<T: Real> SubSystem<'_, T> {
    fn apply(&self, x: &[T], y: &mut [T]) {
        for (l, &k) in self.active.iter().enumerate() {
            let (i, j) = (k % self.nx, k / self.nx);
            let mut v = self.diag * x[l];
            let mut sub = |kk: usize, c: T| {
                let q = self.local[kk];
                if q != usize::MAX {
                    v -= c * x[q];
                }
            };
            if i > 0 {
                sub(k - 1, self.cx);
            }
            if i + 1 < self.nx {
                sub(k + 1, self.cx);
            }
            if j > 0 {
                sub(k - self.nx, self.cy);
            }
            if j + 1 < self.ny {
                sub(k + self.nx, self.cy);
            }
            y[l] = v;
        }
    }

    fn pcg(
        &self,
        b: &[T],
        mut x: Vec<T>,
        tol: T,
        max_iterations: usize,
    ) -> Result<(Vec<T>, usize), SolverError> {
        let n = b.len();
        let inv_diag = T::one() / self.diag;
        let b_norm = norm2(b);
        if b_norm == T::zero() {
            return Ok((vec![T::zero(); n], 0));
        }
        let mut ax = vec![T::zero(); n];
        self.apply(&x, &mut ax);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let mut p: Vec<T> = r.iter().map(|&v| v * inv_diag).collect();
        let mut rz = dot(&r, &p);
        let mut ap = vec![T::zero(); n];
        let target = tol * b_norm * T::lit(0.5);
        let target_inf = tol * max_abs(b) * T::lit(0.5);
        for it in 0..max_iterations {
            if norm2(&r) <= target && max_abs(&r) <= target_inf {
                return Ok((x, it));
            }
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rz_next = r.iter().map(|&v| v * v * inv_diag).sum::<T>();
            let beta = rz_next / rz;
            rz = rz_next;
            for k in 0..n {
                p[k] = r[k] * inv_diag + beta * p[k];
            }
        }
        Err(SolverError::NoConvergence {
            iterations: max_iterations,
            residual: (norm2(&r) / b_norm).to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// `||A u - b|| / ||b||` over the interior unknowns (`||A u||` when `b = 0`).
pub fn residual_norm<T: Real>(system: &DiscreteSystem<T>, u: &ScalarField<T>) -> T {
    let x = system.restrict(u);
    let mut ax = vec![T::zero(); x.len()];
    system.apply(&x, &mut ax);
    let r: Vec<T> = ax.iter().zip(&system.rhs).map(|(&a, &b)| a - b).collect();
    let b_norm = norm2(&system.rhs);
    if b_norm == T::zero() {
        norm2(&r)
    } else {
        norm2(&r) / b_norm
    }
}

fn bound_report<T: Real>(u: &ScalarField<T>, bound: T, tolerance: T) -> BoundReport<T> {
    let grid = u.grid();
    let mut min_interior = T::infinity();
    for idx in 0..grid.len() {
        if !grid.is_boundary(idx) {
            min_interior = min_interior.min(u.get(idx));
        }
    }
    let min_u = u.min();
    let max_u = u.max();
    let slack = tolerance * bound;
    let passed = min_u > -slack && max_u <= bound + slack && min_interior > T::zero();
    BoundReport {
        min_u,
        max_u,
        min_interior_u: min_interior,
        bound,
        tolerance,
        passed,
    }
}

/// Checks `0 < u <= M` with `M = max(sup f, sup g)` taken over the solution's
/// grid nodes. Strict positivity is required on interior nodes only.
pub fn verify_bounds<T: Real>(
    result: &SolveResult<T>,
    f: &SourceSpec<T>,
    g: &BoundarySpec<T>,
) -> BoundReport<T> {
    let grid = result.u.grid();
    let mut bound = T::zero();
    for idx in 0..grid.len() {
        let c = grid.coords(idx);
        let x = &c[..grid.dim()];
        let v = if grid.is_boundary(idx) {
            g.evaluate(x)
        } else {
            f.evaluate(x)
        };
        bound = bound.max(v);
    }
    bound_report(&result.u, bound, result.bounds.tolerance)
}
