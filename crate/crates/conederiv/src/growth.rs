//! Cone-growth estimation and the two-point Lipschitz probe.

use serde::Serialize;

use crate::error::Result;
use crate::estimate::eval_cloud;
use crate::function::BlackBoxFn;
use crate::linalg::{Subspace, Vector};
use crate::options::{ApertureMode, EstimatorOptions};
use crate::sampling::{build_cloud, direction_mesh, ScaleSchedule};

/// Per-level worst growth ratios g_k = max ‖f(x)−f(a)‖/‖x−a‖ with a
/// log-log slope fitted over the finest half of the schedule.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    /// (δ_k, g_k) pairs in level order.
    pub curve: Vec<(f64, f64)>,
    /// Least-squares slope of log g against log δ over the finest ⌈K/2⌉
    /// levels; `None` when fewer than two positive ratios are available.
    pub slope: Option<f64>,
}

/// Measures how fast f − f(a) grows inside a sharp cone around V while the
/// radius shrinks. With [`ApertureMode::Fixed`] (the default) the aperture
/// stays at θ₀, which makes the slope of a homogeneous singularity read off
/// its exponent.
pub fn cone_growth(
    f: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<GrowthReport> {
    let fa = f.eval(a)?.as_dvector().clone();
    let dirs = direction_mesh(v, opts.n_dirs, opts.seed);
    let perp = direction_mesh(&v.complement(), opts.n_perp, opts.seed.wrapping_add(1));
    let mut curve = Vec::with_capacity(sched.levels());
    for (delta, theta_k) in sched.scales() {
        let theta = match opts.growth_aperture {
            ApertureMode::Fixed => sched.theta0(),
            ApertureMode::Coupled => theta_k,
        };
        let cloud = build_cloud(
            a,
            v,
            &dirs,
            &perp,
            delta,
            theta,
            opts.n_apertures,
            opts.n_radii,
            f.domain(),
            opts.n_dirs,
            opts.min_survivor_frac,
        )?;
        let cloud = eval_cloud(f, cloud);
        let mut g = 0.0_f64;
        for (sample, value) in cloud.samples.iter().zip(&cloud.values) {
            let r = (value - &fa).norm() / sample.radius;
            g = g.max(if r.is_finite() { r } else { f64::INFINITY });
        }
        curve.push((delta, g));
    }
    let slope = log_log_slope(&curve, opts);
    Ok(GrowthReport { curve, slope })
}

fn log_log_slope(curve: &[(f64, f64)], opts: &EstimatorOptions) -> Option<f64> {
    let window = curve.len().div_ceil(2);
    let pts: Vec<(f64, f64)> = curve[curve.len() - window..]
        .iter()
        .filter(|(_, g)| *g > opts.noise_floor && g.is_finite())
        .map(|(d, g)| (d.ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-18 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Per-level worst pairwise difference quotients inside the shrinking cone,
/// and whether they stay bounded.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    /// Worst ‖f(x)−f(y)‖/‖x−y‖ per level over sample pairs x ≠ y.
    pub ratios: Vec<f64>,
    /// Bounded iff the ratios are nonincreasing (within slack) beyond the
    /// third level and never reach the cap.
    pub bounded: bool,
}

/// Estimates the limsup of ‖f(x)−f(y)‖/‖x−y‖ over pairs in sharp cones with
/// shrinking radius and aperture — the weakened two-point condition under
/// which directional and tangential differentiability still coincide.
pub fn two_point_cone_lipschitz(
    f: &BlackBoxFn,
    a: &Vector,
    v: &Subspace,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<LipschitzReport> {
    let dirs = direction_mesh(v, opts.n_dirs, opts.seed);
    let perp = direction_mesh(&v.complement(), opts.n_perp, opts.seed.wrapping_add(1));
    let mut ratios = Vec::with_capacity(sched.levels());
    for (delta, theta) in sched.scales() {
        let cloud = build_cloud(
            a,
            v,
            &dirs,
            &perp,
            delta,
            theta,
            opts.n_apertures,
            opts.n_radii,
            f.domain(),
            opts.n_dirs,
            opts.min_survivor_frac,
        )?;
        let cloud = eval_cloud(f, cloud);
        // pairwise work is quadratic; a deterministic stride keeps the
        // spread of directions and apertures while bounding the cost
        let stride = cloud.samples.len().div_ceil(256).max(1);
        let idx: Vec<usize> = (0..cloud.samples.len()).step_by(stride).collect();
        let mut worst = 0.0_f64;
        for (a_pos, &i) in idx.iter().enumerate() {
            let xi = cloud.samples[i].point.as_slice();
            let fi = cloud.values[i].as_slice();
            for &j in &idx[a_pos + 1..] {
                let xj = cloud.samples[j].point.as_slice();
                let fj = cloud.values[j].as_slice();
                let dx: f64 =
                    xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if dx < 1e-300 {
                    continue;
                }
                let dfv: f64 =
                    fi.iter().zip(fj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let r = dfv / dx;
                worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
            }
        }
        ratios.push(worst);
    }
    let mut bounded = ratios.iter().all(|r| r.is_finite() && *r < opts.cap);
    for k in 2..ratios.len().saturating_sub(1) {
        if ratios[k + 1] > opts.slack * ratios[k].max(opts.noise_floor) {
            bounded = false;
        }
    }
    Ok(LipschitzReport { ratios, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    fn vec2(x: f64, y: f64) -> Vector {
        Vector::from_slice(&[x, y]).unwrap()
    }

    fn e1_line() -> Subspace {
        Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap()
    }

    fn kernel_singular_fn(alpha: f64) -> BlackBoxFn {
        BlackBoxFn::scalar(2, move |x| {
            let n = x.norm();
            if n == 0.0 {
                0.0
            } else {
                x[1] / n.powf(alpha)
            }
        })
    }

    /// Closed-form oracle for the worst fixed-aperture ratio of
    /// x₂/‖x‖^α on a cone sample: s·r^{−α} maximized at s = θ₀ and the
    /// smallest shell radius, hence slope −α in log δ.
    #[test]
    fn growth_slope_recovers_exponent() {
        let alpha = 0.5;
        let sched = ScaleSchedule::default();
        let opts = EstimatorOptions::default();
        let report = cone_growth(
            &kernel_singular_fn(alpha),
            &vec2(0.0, 0.0),
            &e1_line(),
            &sched,
            &opts,
        )
        .unwrap();
        let slope = report.slope.unwrap();
        assert!((slope + alpha).abs() < 0.1, "slope {slope} should be near {}", -alpha);
        let oracle = {
            let (d1, g1) = report.curve[sched.levels() - 2];
            let (d2, g2) = report.curve[sched.levels() - 1];
            (g2 / g1).ln() / (d2 / d1).ln()
        };
        assert!((oracle + alpha).abs() < 1e-6, "two-level oracle slope {oracle}");
    }

    #[test]
    fn growth_of_linear_map_is_flat() {
        let f = BlackBoxFn::new(2, 2, |x| vec2(2.0 * x[0] - x[1], x[1]));
        let report = cone_growth(
            &f,
            &vec2(0.0, 0.0),
            &e1_line(),
            &ScaleSchedule::default(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        let slope = report.slope.unwrap();
        assert!(slope.abs() < 0.01, "slope {slope} should vanish for a linear map");
    }

    #[test]
    fn growth_of_constant_is_zero() {
        let f = BlackBoxFn::scalar(2, |_| 4.5);
        let report = cone_growth(
            &f,
            &vec2(0.0, 0.0),
            &e1_line(),
            &ScaleSchedule::default(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(report.curve.iter().all(|(_, g)| *g == 0.0));
        assert!(report.slope.is_none());
    }

    #[test]
    fn lipschitz_function_stays_bounded_by_constant() {
        // globally 1-Lipschitz
        let f = BlackBoxFn::scalar(2, |x| x.norm());
        let report = two_point_cone_lipschitz(
            &f,
            &vec2(0.0, 0.0),
            &Subspace::full(2),
            &ScaleSchedule::default(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(report.bounded);
        assert!(report.ratios.iter().all(|r| *r <= 1.0 + 1e-9));
    }

    /// The explicit pair (x at aperture s, y on the slice) gives quotient
    /// ≈ r^{−α}, so the curve must rise along the schedule.
    #[test]
    fn kernel_singular_pairs_are_unbounded() {
        let report = two_point_cone_lipschitz(
            &kernel_singular_fn(0.5),
            &vec2(0.0, 0.0),
            &e1_line(),
            &ScaleSchedule::default(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(!report.bounded);
        let r = &report.ratios;
        assert!(r[r.len() - 1] > r[2], "ratios should rise: {r:?}");
    }

    #[test]
    fn linear_map_ratio_below_operator_norm() {
        let f = BlackBoxFn::new(2, 2, |x| vec2(2.0 * x[0], 3.0 * x[1]));
        let report = two_point_cone_lipschitz(
            &f,
            &vec2(0.0, 0.0),
            &Subspace::full(2),
            &ScaleSchedule::default(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(report.bounded);
        assert!(report.ratios.iter().all(|r| *r <= 3.0 + 1e-9));
    }
}
