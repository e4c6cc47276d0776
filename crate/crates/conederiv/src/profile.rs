//! Per-direction derivative profiles and their linearity check.
//!
//! Each direction gets a one-sided ray estimate (cones opening around the
//! ray only); a single linear map is then fitted to the per-direction
//! values. A subspace derivative exists only if the profile is linear AND
//! every direction passes — the dense-ray fixture shows that finitely many
//! passing directions prove nothing by themselves.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{estimate_along_ray, DerivativeEstimate, Verdict};
use crate::function::BlackBoxFn;
use crate::linalg::{LinearMap, Subspace, Vector, RANK_TOL};
use crate::numeric;
use crate::options::EstimatorOptions;
use crate::sampling::ScaleSchedule;

/// A single direction's outcome in a profile.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionEntry {
    pub direction: Vector,
    /// The fitted directional value d_v = L_v[v] when the ray estimate ran.
    pub value: Option<Vector>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    #[serde(skip)]
    pub estimate: Option<DerivativeEstimate>,
}

/// Per-direction estimates plus the best single linear fit across them.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub entries: Vec<DirectionEntry>,
    pub best_fit: LinearMap,
    /// Max deviation ‖L*[v] − d_v‖ of the fit; `None` when no direction
    /// produced a value.
    pub linearity_residual: Option<f64>,
}

impl ProfileReport {
    pub fn all_differentiable(&self) -> bool {
        !self.entries.is_empty()
            && self.entries.iter().all(|e| e.verdict == Some(Verdict::Differentiable))
    }
}

/// Runs a one-sided ray estimate for every direction in `dirs` (unit vectors
/// in V) and fits one linear map to the resulting directional values.
pub fn per_direction_profile(
    f: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    dirs: &[Vector],
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<ProfileReport> {
    let mut entries = Vec::with_capacity(dirs.len());
    for dir in dirs {
        if (dir.norm() - 1.0).abs() > 1e-8 || !v.contains(dir, 1e-8) {
            return Err(Error::InvalidParameter(format!(
                "profile directions must be unit vectors in the subspace (got norm {:.3e})",
                dir.norm()
            )));
        }
        match estimate_along_ray(f, a, dir, sched, opts) {
            Ok(est) => {
                let value = est.map.apply(dir)?;
                entries.push(DirectionEntry {
                    direction: dir.clone(),
                    value: Some(value),
                    verdict: Some(est.verdict),
                    error: None,
                    estimate: Some(est),
                });
            }
            Err(e) => entries.push(DirectionEntry {
                direction: dir.clone(),
                value: None,
                verdict: None,
                error: Some(e.to_string()),
                estimate: None,
            }),
        }
    }

    let n = f.output_dim();
    let usable: Vec<(&Vector, &Vector)> = entries
        .iter()
        .filter_map(|e| e.value.as_ref().map(|val| (&e.direction, val)))
        .collect();
    let (best_fit, linearity_residual) = if usable.is_empty() {
        (LinearMap::zero(v.clone(), n), None)
    } else {
        let k = v.dim();
        let mut design = DMatrix::zeros(usable.len(), k);
        let mut target = DMatrix::zeros(usable.len(), n);
        for (row, (dir, val)) in usable.iter().enumerate() {
            let coords = v.coords_of(dir)?;
            for j in 0..k {
                design[(row, j)] = coords[j];
            }
            for j in 0..n {
                target[(row, j)] = val.as_dvector()[j];
            }
        }
        let solution = numeric::least_squares_solve(&design, &target, RANK_TOL);
        let matrix = solution.transpose();
        let mut worst = 0.0_f64;
        for (dir, val) in &usable {
            let coords = v.coords_of(dir)?;
            let predicted: DVector<f64> = &matrix * coords;
            worst = worst.max((val.as_dvector() - predicted).norm());
        }
        (LinearMap::new(v.clone(), matrix)?, Some(worst))
    };

    Ok(ProfileReport { entries, best_fit, linearity_residual })
}
