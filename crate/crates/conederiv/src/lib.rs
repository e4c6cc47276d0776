//! Numerical decision procedures for directional and tangential derivatives
//! of black-box functions.
//!
//! The library turns ε–δ derivative definitions into finite sampling
//! experiments: sharp-cone point clouds around a subspace at shrinking
//! scales, least-squares fits of the candidate derivative, and categorical
//! verdicts (`Differentiable` / `Divergent` / `Inconclusive`) under a fixed
//! decision rule. On top of the estimators sit a chain-rule condition
//! checker, per-direction profiles, diffeomorphism transport helpers, and a
//! C¹ piecewise-polynomial interpolation path with its straightening map.
//!
//! Function evaluations within a level may run in parallel (bounded by the
//! global rayon pool); aggregation happens in a fixed order, so identical
//! inputs and seeds produce byte-identical reports.

pub mod chain;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod function;
pub mod growth;
pub mod linalg;
mod numeric;
pub mod options;
pub mod paths;
pub mod profile;
pub mod sampling;

pub use chain::{chain_condition, compose_and_check, ChainLevel, ChainReport, ComposeReport};
pub use error::{Error, Result};
pub use estimate::{
    estimate_directional, estimate_tangential, DerivativeEstimate, LevelRecord, Verdict,
};
pub use function::{BlackBoxFn, DomainPredicate};
pub use growth::{cone_growth, two_point_cone_lipschitz, GrowthReport, LipschitzReport};
pub use linalg::{LinearMap, Subspace, Vector};
pub use options::{ApertureMode, EstimatorOptions};
pub use paths::{pullback_test, straightening_map, PathReport, PiecewisePath, Straightening};
pub use profile::{per_direction_profile, DirectionEntry, ProfileReport};
pub use sampling::{cone_cloud, direction_mesh, ConeSample, ScaleSchedule};
