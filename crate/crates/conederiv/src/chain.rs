//! Chain-rule condition checking and composite cross-validation.
//!
//! The chain rule for tangential derivatives holds iff the composite ratios
//! ‖g(f(x))−g(f(a))‖/‖x−a‖ vanish along the co-filtered cone: samples must
//! both lie in the sharp cone and satisfy ‖f(x)−f(a)‖ ≤ κ_k‖x−a‖ with
//! κ_k shrinking. Levels whose filter empties are vacuous and count toward
//! `Holds` — an injective derivative of f empties the filter entirely, which
//! is the diffeomorphism-stability branch.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{
    divergence_reason, estimate_tangential, eval_cloud, DerivativeEstimate, Verdict,
};
use crate::function::BlackBoxFn;
use crate::growth::{two_point_cone_lipschitz, LipschitzReport};
use crate::linalg::{LinearMap, Subspace, Vector};
use crate::options::EstimatorOptions;
use crate::sampling::{build_cloud, direction_mesh, ScaleSchedule};

/// One level of the chain-condition curve.
#[derive(Clone, Debug, Serialize)]
pub struct ChainLevel {
    pub level: usize,
    pub delta: f64,
    /// Shrinking co-filter bound κ_k on ‖f(x)−f(a)‖/‖x−a‖.
    pub kappa: f64,
    pub survivors: usize,
    /// Worst composite ratio over survivors; `None` when the level is vacuous.
    pub ratio: Option<f64>,
    /// Sample point attaining the worst ratio.
    pub witness: Option<Vector>,
}

/// Outcome of the chain-rule condition check.
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub holds: bool,
    pub levels: Vec<ChainLevel>,
    pub reason: String,
}

/// Checks the necessary-and-sufficient chain-rule condition for g∘f at `a`
/// with respect to `v`. `l` is the derivative previously certified for f;
/// it is used for shape checking only, the condition itself is derivative-free.
pub fn chain_condition(
    f: &BlackBoxFn,
    g: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    l: &LinearMap,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<ChainReport> {
    if g.input_dim() != f.output_dim() {
        return Err(Error::DimensionMismatch { expected: f.output_dim(), got: g.input_dim() });
    }
    if l.domain().ambient_dim() != v.ambient_dim() || l.output_dim() != f.output_dim() {
        return Err(Error::InvalidParameter(
            "certified map shape does not match the function pair".into(),
        ));
    }
    let fa = f.eval(a)?;
    let gfa = g.eval(&fa)?.as_dvector().clone();
    let fa = fa.as_dvector().clone();

    let dirs = direction_mesh(v, opts.n_dirs, opts.seed);
    let perp = direction_mesh(&v.complement(), opts.n_perp, opts.seed.wrapping_add(1));
    let mut levels = Vec::with_capacity(sched.levels());
    for (k, (delta, theta_k)) in sched.scales().iter().enumerate() {
        // fixed aperture; only the radius and the co-filter shrink
        let cloud = build_cloud(
            a,
            v,
            &dirs,
            &perp,
            *delta,
            sched.theta0(),
            opts.n_apertures,
            opts.n_radii,
            f.domain(),
            opts.n_dirs,
            opts.min_survivor_frac,
        )?;
        let cloud = eval_cloud(f, cloud);
        let kappa = *theta_k;
        let mut survivors = 0_usize;
        let mut worst: Option<(f64, Vector)> = None;
        for (sample, fx) in cloud.samples.iter().zip(&cloud.values) {
            if (fx - &fa).norm() > kappa * sample.radius {
                continue;
            }
            survivors += 1;
            let gfx = g.eval_unchecked(&Vector::from_dvector(fx.clone()));
            let ratio = (gfx.as_dvector() - &gfa).norm() / sample.radius;
            let ratio = if ratio.is_finite() { ratio } else { f64::INFINITY };
            if worst.as_ref().is_none_or(|(w, _)| ratio > *w) {
                worst = Some((ratio, sample.point.clone()));
            }
        }
        let (ratio, witness) = match worst {
            Some((r, w)) => (Some(r), Some(w)),
            None => (None, None),
        };
        levels.push(ChainLevel { level: k, delta: *delta, kappa, survivors, ratio, witness });
    }

    let (holds, reason) = decide_chain(&levels, opts);
    Ok(ChainReport { holds, levels, reason })
}

fn decide_chain(levels: &[ChainLevel], opts: &EstimatorOptions) -> (bool, String) {
    let present: Vec<f64> = levels.iter().filter_map(|l| l.ratio).collect();
    if present.is_empty() {
        return (true, "filter empty at every level: condition vacuously holds".into());
    }
    if let Some(why) = divergence_reason(&present, opts) {
        return (false, why);
    }
    // the finest half of the schedule decides, vacuous levels bridged
    let window_start = levels.len() - levels.len().div_ceil(2);
    let tail: Vec<f64> = levels[window_start..].iter().filter_map(|l| l.ratio).collect();
    if tail.is_empty() {
        return (true, "filter empty over the finest levels: condition vacuously holds".into());
    }
    let last = *tail.last().expect("nonempty tail");
    if !last.is_finite() || last > opts.tol_abs {
        return (
            false,
            format!("composite ratio {last:.3e} above tol {:.1e} at the finest level", opts.tol_abs),
        );
    }
    for w in tail.windows(2) {
        if w[1] > opts.slack * w[0].max(opts.noise_floor) && w[1] > opts.noise_floor {
            return (false, format!("composite ratios not nonincreasing: {:.3e} -> {:.3e}", w[0], w[1]));
        }
    }
    (true, format!("composite ratio {last:.3e} vanishing along the co-filtered cone"))
}

/// Lipschitz probe outcome plus map comparison for a composition.
#[derive(Clone, Debug, Serialize)]
pub struct ComposeReport {
    pub f_estimate: DerivativeEstimate,
    pub g_estimate: DerivativeEstimate,
    pub composite_estimate: DerivativeEstimate,
    /// The product K∘L of the two fitted maps, over V-coordinates.
    pub product: LinearMap,
    /// Whether the directly fitted composite map agrees with K∘L and the
    /// composite verdict is Differentiable.
    pub composite_matches: bool,
    pub chain: ChainReport,
    /// Smallest singular value of L: positive iff L is injective, which by
    /// itself forces the chain condition.
    pub min_gain: f64,
    pub injective: bool,
    pub g_lipschitz: LipschitzReport,
    /// Agreement of the two routes: chain condition holds iff the composite
    /// is differentiable with the product map.
    pub iff_consistent: bool,
}

/// Runs the full two-route chain-rule experiment: estimate L for f, K for g
/// on the image of L, C for g∘f directly, then compare C against K∘L and
/// cross-reference the chain condition.
pub fn compose_and_check(
    f: &BlackBoxFn,
    g: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<ComposeReport> {
    let f_estimate = estimate_tangential(f, a, v, sched, opts)?;
    let fa = f.eval(a)?;
    let image = f_estimate.map.image_subspace();
    let g_estimate = estimate_tangential(g, &fa, &image, sched, opts)?;
    let composite_fn = BlackBoxFn::compose(g, f)?;
    let composite_estimate = estimate_tangential(&composite_fn, a, v, sched, opts)?;
    let product = LinearMap::compose(&g_estimate.map, &f_estimate.map)?;

    let map_gap = composite_estimate.map.distance_to(&product)?;
    let matches_map = map_gap <= opts.compose_tol * product.operator_norm().max(1.0);
    let composite_matches =
        composite_estimate.verdict == Verdict::Differentiable && matches_map;

    let chain = chain_condition(f, g, a, v, &f_estimate.map, sched, opts)?;
    let min_gain = f_estimate.map.min_gain();
    let injective = min_gain > 1e-8;
    let g_lipschitz =
        two_point_cone_lipschitz(g, &fa, &Subspace::full(g.input_dim()), sched, opts)?;
    let iff_consistent = chain.holds == composite_matches;

    Ok(ComposeReport {
        f_estimate,
        g_estimate,
        composite_estimate,
        product,
        composite_matches,
        chain,
        min_gain,
        injective,
        g_lipschitz,
        iff_consistent,
    })
}
