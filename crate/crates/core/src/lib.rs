//! Distance functions recovered from solutions of the screened Poisson
//! equation `-a Lap(u) + u = f` on a box, with Dirichlet data.
//!
//! As the diffusion `a` shrinks, `-sqrt(a) ln u` tends to the distance to the
//! boundary of the zero set of `f`. The crate provides the geometry, grid
//! fields, finite-difference solver, analytic oracles and the experiment
//! driver used to measure that convergence.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod experiments;
pub mod fields;
pub mod geometry;
mod scalar;
pub mod solver;
pub mod sources;
pub mod transform;

pub use experiments::{CaseSpec, ExperimentError, RateFit, RateModel, SweepRow, SweepTable};
pub use fields::{FieldError, Grid, Mask, ScalarField};
pub use geometry::{DesignDomain, GeometryError, NodeSet, Shape};
pub use scalar::Real;
pub use solver::{BoundReport, DiscreteSystem, SolveResult, SolverConfig, SolverError};
pub use sources::{BoundarySpec, MeanScan, SourceError, SourceSpec};
pub use transform::{BetaDiagnostic, TransformError, TransformResult};

pub type GridF64 = Grid<f64>;
pub type GridF32 = Grid<f32>;
pub type ScalarFieldF64 = ScalarField<f64>;
pub type ScalarFieldF32 = ScalarField<f32>;
pub type MaskF64 = Mask<f64>;
pub type ShapeF64 = Shape<f64>;
pub type DesignDomainF64 = DesignDomain<f64>;
pub type SourceSpecF64 = SourceSpec<f64>;
pub type BoundarySpecF64 = BoundarySpec<f64>;
pub type DiscreteSystemF64 = DiscreteSystem<f64>;
pub type SolveResultF64 = SolveResult<f64>;
pub type TransformResultF64 = TransformResult<f64>;
