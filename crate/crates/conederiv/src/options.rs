//! Centralized tolerances and sampling knobs for the decision procedures.

use serde::{Deserialize, Serialize};

/// Aperture handling for growth-style (falsification) clouds.
///
/// `Fixed` keeps the aperture at θ₀ while the radius shells shrink, probing
/// the cone condition for a fixed opening; `Coupled` shrinks the aperture
/// together with the radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureMode {
    Fixed,
    Coupled,
}

/// Options shared by every estimator. All tolerances of the decision rules
/// live here and are embedded in reports for reproducibility.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Residual acceptance threshold at the finest level.
    pub tol_abs: f64,
    /// Multiplicative slack allowed in the nonincreasing-residual check.
    pub slack: f64,
    /// Maximal relative movement of the fitted map when refit on the finest
    /// level alone.
    pub refit_drift: f64,
    /// Growth must multiply by at least this much over an increasing run to
    /// count as divergence.
    pub divergence_factor: f64,
    /// Minimal length (in levels) of an increasing growth run.
    pub divergence_run: usize,
    /// Hard cap: any ratio beyond this is divergence outright.
    pub cap: f64,
    /// Values below this are treated as numerical zero in monotonicity checks.
    pub noise_floor: f64,
    /// Tolerance for comparing a composite estimate against a map product.
    pub compose_tol: f64,
    /// Direction-mesh resolution per sphere dimension.
    pub n_dirs: usize,
    /// Number of nonzero aperture fractions per cone.
    pub n_apertures: usize,
    /// Radii per (direction, aperture, carrier) combination.
    pub n_radii: usize,
    /// Mesh resolution for the orthogonal-complement carriers.
    pub n_perp: usize,
    /// Minimum fraction of generated samples that must survive the domain
    /// filter.
    pub min_survivor_frac: f64,
    /// Aperture handling for growth curves (see [`ApertureMode`]).
    pub growth_aperture: ApertureMode,
    /// Seed for direction-mesh generation.
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-3,
            slack: 1.1,
            refit_drift: 0.05,
            divergence_factor: 2.0,
            divergence_run: 3,
            cap: 1e6,
            noise_floor: 1e-12,
            compose_tol: 1e-6,
            n_dirs: 6,
            n_apertures: 6,
            n_radii: 3,
            n_perp: 2,
            min_survivor_frac: 0.25,
            growth_aperture: ApertureMode::Fixed,
            seed: 0,
        }
    }
}

impl EstimatorOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
