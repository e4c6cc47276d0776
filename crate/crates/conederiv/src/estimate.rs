//! Derivative estimation: fit a candidate linear map from cone samples and
//! classify the function at the base point.
//!
//! Two curves drive the verdict. The residual curve is computed on clouds
//! whose aperture shrinks together with the radius (the certification side:
//! residuals must vanish for the map to be accepted). The growth curve is
//! computed on clouds with a fixed aperture θ₀ while only the radius
//! shrinks (the falsification side: bounded cone growth is necessary, and a
//! sustained rise flags divergence that a coupled aperture would mask).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::BlackBoxFn;
use crate::linalg::{LinearMap, Subspace, Vector, RANK_TOL};
use crate::numeric;
use crate::options::EstimatorOptions;
use crate::sampling::{build_cloud, direction_mesh, ConeSample, ScaleSchedule};

/// Categorical outcome of a finite-sample derivative test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Differentiable,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Differentiable => "Differentiable",
            Verdict::Divergent => "Divergent",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Per-level diagnostics of an estimate.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub delta: f64,
    pub theta: f64,
    pub residual: f64,
    pub growth: f64,
}

/// A fitted candidate derivative with its residual and growth curves.
#[derive(Clone, Debug)]
pub struct DerivativeEstimate {
    pub map: LinearMap,
    pub levels: Vec<LevelRecord>,
    pub verdict: Verdict,
    pub reason: String,
    pub refit_drift: f64,
}

impl DerivativeEstimate {
    pub fn residual_curve(&self) -> Vec<(f64, f64)> {
        self.levels.iter().map(|l| (l.delta, l.residual)).collect()
    }

    pub fn growth_curve(&self) -> Vec<(f64, f64)> {
        self.levels.iter().map(|l| (l.delta, l.growth)).collect()
    }

    pub fn is_differentiable(&self) -> bool {
        self.verdict == Verdict::Differentiable
    }
}

#[derive(Serialize)]
struct EstimateRepr<'a> {
    verdict: Verdict,
    #[serde(rename = "L")]
    map: &'a LinearMap,
    residuals: Vec<[f64; 2]>,
    growth: Vec<[f64; 2]>,
    reason: &'a str,
}

impl Serialize for DerivativeEstimate {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        EstimateRepr {
            verdict: self.verdict,
            map: &self.map,
            residuals: self.levels.iter().map(|l| [l.delta, l.residual]).collect(),
            growth: self.levels.iter().map(|l| [l.delta, l.growth]).collect(),
            reason: &self.reason,
        }
        .serialize(serializer)
    }
}

pub(crate) struct EvalCloud {
    pub samples: Vec<ConeSample>,
    pub values: Vec<DVector<f64>>,
}

const PAR_THRESHOLD: usize = 64;

/// Evaluates `f` on every sample point. Evaluations may run in parallel;
/// results are collected in sample order so downstream reductions are
/// deterministic.
pub(crate) fn eval_cloud(f: &BlackBoxFn, samples: Vec<ConeSample>) -> EvalCloud {
    let values: Vec<DVector<f64>> = if samples.len() >= PAR_THRESHOLD {
        samples
            .par_iter()
            .map(|s| f.eval_unchecked(&s.point).as_dvector().clone())
            .collect()
    } else {
        samples.iter().map(|s| f.eval_unchecked(&s.point).as_dvector().clone()).collect()
    };
    EvalCloud { samples, values }
}

/// Weighted least squares of f(x) − f(a) against the V-coordinates of the
/// sample components, one weight 1/‖x−a‖ per sample so each row carries its
/// definitional ratio.
///
/// With `curvature_regressor` a nuisance radius column is appended and its
/// coefficient discarded. One-sided (ray) clouds need it: without antipodal
/// cancellation the quadratic term would bias the slope by O(δ).
pub(crate) fn fit_map(
    space: &Subspace,
    output_dim: usize,
    clouds: &[&EvalCloud],
    fa: &DVector<f64>,
    curvature_regressor: bool,
) -> Result<DMatrix<f64>> {
    let k = space.dim();
    if k == 0 {
        return Ok(DMatrix::zeros(output_dim, 0));
    }
    let rows: usize = clouds.iter().map(|c| c.samples.len()).sum();
    if rows == 0 {
        return Err(Error::InsufficientSamples { survivors: 0, required: 1 });
    }
    let cols = if curvature_regressor { k + 1 } else { k };
    let mut design = DMatrix::zeros(rows, cols);
    let mut target = DMatrix::zeros(rows, output_dim);
    let mut row = 0;
    for cloud in clouds {
        for (sample, value) in cloud.samples.iter().zip(&cloud.values) {
            let w = 1.0 / sample.radius;
            let coords = space.coords_of(&sample.v_component)?;
            for j in 0..k {
                design[(row, j)] = coords[j] * w;
            }
            if curvature_regressor {
                design[(row, k)] = sample.radius;
            }
            let diff = value - fa;
            for j in 0..output_dim {
                target[(row, j)] = diff[j] * w;
            }
            row += 1;
        }
    }
    let solution = numeric::least_squares_solve(&design, &target, RANK_TOL);
    Ok(solution.rows(0, k).transpose())
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    let r = num / den;
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

fn max_residual(space: &Subspace, matrix: &DMatrix<f64>, cloud: &EvalCloud, fa: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for (sample, value) in cloud.samples.iter().zip(&cloud.values) {
        let coords = match space.coords_of(&sample.v_component) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        let resid = (value - fa - matrix * coords).norm();
        worst = worst.max(ratio_or_inf(resid, sample.radius));
    }
    worst
}

fn max_growth(cloud: &EvalCloud, fa: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for (sample, value) in cloud.samples.iter().zip(&cloud.values) {
        worst = worst.max(ratio_or_inf((value - fa).norm(), sample.radius));
    }
    worst
}

/// Scans the growth curve for divergence: a value past the hard cap, or a
/// strictly increasing run of at least `divergence_run` levels whose total
/// rise reaches `divergence_factor`.
pub(crate) fn divergence_reason(growth: &[f64], opts: &EstimatorOptions) -> Option<String> {
    for (k, g) in growth.iter().enumerate() {
        if !g.is_finite() || *g >= opts.cap {
            return Some(format!("growth {g:.3e} at level {k} exceeds cap {:.1e}", opts.cap));
        }
    }
    let check_run = |start: usize, end: usize| -> Option<String> {
        if end - start + 1 < opts.divergence_run {
            return None;
        }
        let base = growth[start].max(opts.noise_floor);
        let top = growth[end];
        if top > opts.noise_floor && top / base >= opts.divergence_factor {
            return Some(format!(
                "growth rises across levels {start}..{end} by factor {:.2}",
                top / base
            ));
        }
        None
    };
    let mut run_start = 0;
    for k in 1..growth.len() {
        if growth[k] > growth[k - 1] {
            continue;
        }
        if let Some(reason) = check_run(run_start, k - 1) {
            return Some(reason);
        }
        run_start = k;
    }
    if !growth.is_empty() {
        if let Some(reason) = check_run(run_start, growth.len() - 1) {
            return Some(reason);
        }
    }
    None
}

/// The acceptance side of the decision rule: final residual under `tol_abs`,
/// nonincreasing (within slack, above the noise floor) over the finest half
/// of the schedule, and a stable refit on the finest level alone.
///
/// `noise_floor` should account for cancellation noise in the ratio
/// residuals, which scales like ε·‖f(a)‖/δ at the finest level.
pub(crate) fn residual_acceptance(
    residuals: &[f64],
    drift: f64,
    map_norm: f64,
    noise_floor: f64,
    opts: &EstimatorOptions,
) -> std::result::Result<String, String> {
    let noise_floor = noise_floor.max(opts.noise_floor);
    let last = *residuals.last().expect("at least one level");
    if !last.is_finite() || last > opts.tol_abs {
        return Err(format!("final residual {last:.3e} above tol {:.1e}", opts.tol_abs));
    }
    let window = residuals.len().div_ceil(2);
    let start = residuals.len() - window;
    for k in start..residuals.len() - 1 {
        let next = residuals[k + 1];
        if next > opts.slack * residuals[k].max(noise_floor) && next > noise_floor {
            return Err(format!(
                "residual not nonincreasing at levels {k}..{} ({:.3e} -> {next:.3e})",
                k + 1,
                residuals[k]
            ));
        }
    }
    let allowed = opts.refit_drift * map_norm.max(opts.tol_abs);
    if drift > allowed {
        return Err(format!("finest-level refit moved the map by {drift:.3e} > {allowed:.3e}"));
    }
    Ok(format!(
        "final residual {last:.3e} <= {:.1e}, nonincreasing over last {window} levels, refit drift {drift:.3e}",
        opts.tol_abs
    ))
}

pub(crate) struct RunSpec<'a> {
    pub f: &'a BlackBoxFn,
    pub base: &'a Vector,
    pub fit_space: Subspace,
    pub dirs: Vec<Vector>,
    pub perp: Vec<Vector>,
    pub residual_thetas: Vec<f64>,
    pub growth_thetas: Vec<f64>,
    pub one_sided: bool,
    pub sched: &'a ScaleSchedule,
    pub opts: &'a EstimatorOptions,
}

pub(crate) fn run_estimate(spec: RunSpec) -> Result<DerivativeEstimate> {
    let RunSpec {
        f,
        base,
        fit_space,
        dirs,
        perp,
        residual_thetas,
        growth_thetas,
        one_sided,
        sched,
        opts,
    } = spec;
    if base.dim() != f.input_dim() {
        return Err(Error::DimensionMismatch { expected: f.input_dim(), got: base.dim() });
    }
    if fit_space.ambient_dim() != f.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.input_dim(),
            got: fit_space.ambient_dim(),
        });
    }
    if !f.domain().contains(base) {
        return Err(Error::InvalidParameter("base point lies outside the domain".into()));
    }
    let n = f.output_dim();
    let fa_vec = f.eval(base)?;
    if !fa_vec.is_finite() {
        return Err(Error::NonFinite { context: "f(a)" });
    }
    let fa = fa_vec.as_dvector().clone();
    let scales = sched.scales();

    if fit_space.dim() == 0 {
        let levels = scales
            .iter()
            .enumerate()
            .map(|(level, (delta, _))| LevelRecord {
                level,
                delta: *delta,
                theta: 0.0,
                residual: 0.0,
                growth: 0.0,
            })
            .collect();
        return Ok(DerivativeEstimate {
            map: LinearMap::zero(fit_space, n),
            levels,
            verdict: Verdict::Differentiable,
            reason: "zero-dimensional subspace: vacuously differentiable".into(),
            refit_drift: 0.0,
        });
    }

    let mut residual_clouds = Vec::with_capacity(scales.len());
    let mut growth_clouds = Vec::with_capacity(scales.len());
    for (k, (delta, _)) in scales.iter().enumerate() {
        let rc = build_cloud(
            base,
            &fit_space,
            &dirs,
            &perp,
            *delta,
            residual_thetas[k],
            opts.n_apertures,
            opts.n_radii,
            f.domain(),
            opts.n_dirs,
            opts.min_survivor_frac,
        )?;
        let gc = if growth_thetas[k] == residual_thetas[k] {
            None
        } else {
            Some(build_cloud(
                base,
                &fit_space,
                &dirs,
                &perp,
                *delta,
                growth_thetas[k],
                opts.n_apertures,
                opts.n_radii,
                f.domain(),
                opts.n_dirs,
                opts.min_survivor_frac,
            )?)
        };
        let rc = eval_cloud(f, rc);
        let gc = gc.map(|c| eval_cloud(f, c));
        residual_clouds.push(rc);
        growth_clouds.push(gc);
    }

    let fit_levels: Vec<&EvalCloud> =
        residual_clouds.iter().rev().take(2).collect::<Vec<_>>().into_iter().rev().collect();
    let matrix = fit_map(&fit_space, n, &fit_levels, &fa, one_sided)?;
    let finest = vec![residual_clouds.last().expect("levels >= 3")];
    let refit = fit_map(&fit_space, n, &finest, &fa, one_sided)?;
    let drift = numeric::spectral_norm(&(&refit - &matrix));

    let mut levels = Vec::with_capacity(scales.len());
    for (k, (delta, _)) in scales.iter().enumerate() {
        let residual = max_residual(&fit_space, &matrix, &residual_clouds[k], &fa);
        let growth = match &growth_clouds[k] {
            Some(gc) => max_growth(gc, &fa),
            None => max_growth(&residual_clouds[k], &fa),
        };
        levels.push(LevelRecord {
            level: k,
            delta: *delta,
            theta: residual_thetas[k],
            residual,
            growth,
        });
    }

    let map = LinearMap::new(fit_space, matrix)?;
    let growth_curve: Vec<f64> = levels.iter().map(|l| l.growth).collect();
    let residual_curve: Vec<f64> = levels.iter().map(|l| l.residual).collect();
    // cancellation noise in the ratio residuals at the finest level
    let delta_finest = scales.last().expect("levels >= 3").0;
    let noise_floor = 1e-13 * (1.0 + fa.norm() + base.norm()) / delta_finest;
    let (verdict, reason) = if let Some(why) = divergence_reason(&growth_curve, opts) {
        (Verdict::Divergent, why)
    } else {
        match residual_acceptance(&residual_curve, drift, map.operator_norm(), noise_floor, opts) {
            Ok(why) => (Verdict::Differentiable, why),
            Err(why) => (Verdict::Inconclusive, why),
        }
    };

    Ok(DerivativeEstimate { map, levels, verdict, reason, refit_drift: drift })
}

/// Estimates a tangential derivative of `f` at `a` with respect to `v`:
/// sharp-cone clouds whose aperture shrinks with the radius feed the
/// residual fit, while a fixed-aperture companion cloud watches cone growth.
pub fn estimate_tangential(
    f: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<DerivativeEstimate> {
    let dirs = direction_mesh(v, opts.n_dirs, opts.seed);
    let perp = direction_mesh(&v.complement(), opts.n_perp, opts.seed.wrapping_add(1));
    let scales = sched.scales();
    let residual_thetas: Vec<f64> = scales.iter().map(|(_, t)| *t).collect();
    let growth_thetas = vec![sched.theta0(); scales.len()];
    run_estimate(RunSpec {
        f,
        base: a,
        fit_space: v.clone(),
        dirs,
        perp,
        residual_thetas,
        growth_thetas,
        one_sided: false,
        sched,
        opts,
    })
}

/// Estimates a directional derivative of `f` at `a` with respect to `v`:
/// the same pipeline restricted to the affine slice V + a (aperture zero).
pub fn estimate_directional(
    f: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<DerivativeEstimate> {
    let dirs = direction_mesh(v, opts.n_dirs, opts.seed);
    let zeros = vec![0.0; sched.levels()];
    run_estimate(RunSpec {
        f,
        base: a,
        fit_space: v.clone(),
        dirs,
        perp: Vec::new(),
        residual_thetas: zeros.clone(),
        growth_thetas: zeros,
        one_sided: false,
        sched,
        opts,
    })
}

/// One-sided estimate along a single ray direction: cones open around the
/// ray `v` only (no antipode), realizing the per-direction limit
/// x−a/‖x−a‖ → v.
pub(crate) fn estimate_along_ray(
    f: &BlackBoxFn,
    a: &Vector,
    ray: &Vector,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<DerivativeEstimate> {
    let unit = ray
        .normalized()
        .ok_or_else(|| Error::InvalidParameter("ray direction must be nonzero".into()))?;
    let line = Subspace::line(&unit)?;
    let perp = direction_mesh(&line.complement(), opts.n_perp, opts.seed.wrapping_add(1));
    let scales = sched.scales();
    let residual_thetas: Vec<f64> = scales.iter().map(|(_, t)| *t).collect();
    let growth_thetas = vec![sched.theta0(); scales.len()];
    run_estimate(RunSpec {
        f,
        base: a,
        fit_space: line,
        dirs: vec![unit],
        perp,
        residual_thetas,
        growth_thetas,
        one_sided: true,
        sched,
        opts,
    })
}
