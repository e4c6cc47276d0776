//! C¹ piecewise-polynomial interpolation paths, the path pullback test, and
//! the straightening map that carries a path onto a coordinate axis.
//!
//! A path interpolates knots (t_n, x_n) with the cubic blends
//! p(s) = 3s² − 2s³ and q(s) = s − p(s); endpoint conditions p(0)=0, p(1)=1,
//! p'(0)=p'(1)=0, q(0)=q(1)=0, q'(0)=q'(1)=1 make every knot velocity equal
//! the terminal velocity v, so the pieces join C¹. Below the last knot the
//! path continues linearly as a + t·v.

use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimate::{divergence_reason, residual_acceptance, Verdict};
use crate::function::{BlackBoxFn, DomainPredicate};
use crate::linalg::{LinearMap, Vector};
use crate::options::EstimatorOptions;
use crate::sampling::ScaleSchedule;

fn hermite_p(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

fn hermite_p_prime(s: f64) -> f64 {
    6.0 * s * (1.0 - s)
}

fn hermite_q(s: f64) -> f64 {
    s - hermite_p(s)
}

fn hermite_q_prime(s: f64) -> f64 {
    1.0 - hermite_p_prime(s)
}

/// A C¹ path through finitely many knots with prescribed velocity at 0.
#[derive(Clone, Debug)]
pub struct PiecewisePath {
    base: Vector,
    knots_t: Vec<f64>,
    knots_x: Vec<Vector>,
    velocity: Vector,
    ratio_bound: f64,
    terminal_deviation: f64,
}

impl PiecewisePath {
    /// Builds the interpolation path. Knot times must be strictly decreasing
    /// and positive; the verified maximum of t_{n+1}/t_n becomes the stored
    /// ratio bound. The deviation ‖(x_N − a)/t_N − v‖ at the last knot is
    /// recorded without being judged.
    pub fn new(
        base: Vector,
        knots_t: Vec<f64>,
        knots_x: Vec<Vector>,
        velocity: Vector,
    ) -> Result<Self> {
        if knots_t.len() != knots_x.len() || knots_t.len() < 2 {
            return Err(Error::LengthMismatch { knots_t: knots_t.len(), knots_x: knots_x.len() });
        }
        let dim = base.dim();
        if velocity.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: velocity.dim() });
        }
        for x in &knots_x {
            if x.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.dim() });
            }
        }
        if knots_t.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidParameter("knot times must be positive and finite".into()));
        }
        let mut ratio_bound = 0.0_f64;
        for (i, w) in knots_t.windows(2).enumerate() {
            if w[1] >= w[0] {
                return Err(Error::RatioViolation { index: i, t_prev: w[0], t_next: w[1] });
            }
            ratio_bound = ratio_bound.max(w[1] / w[0]);
        }
        let last = knots_t.len() - 1;
        let terminal_deviation =
            knots_x[last].sub(&base).scale(1.0 / knots_t[last]).sub(&velocity).norm();
        Ok(Self { base, knots_t, knots_x, velocity, ratio_bound, terminal_deviation })
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn velocity(&self) -> &Vector {
        &self.velocity
    }

    pub fn knot_times(&self) -> &[f64] {
        &self.knots_t
    }

    pub fn knot_points(&self) -> &[Vector] {
        &self.knots_x
    }

    pub fn t0(&self) -> f64 {
        self.knots_t[0]
    }

    /// Verified maximum of t_{n+1}/t_n over the stored knots.
    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    /// ‖(x_N − a)/t_N − v‖ at the last stored knot.
    pub fn terminal_deviation(&self) -> f64 {
        self.terminal_deviation
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && (0.0..=self.t0()).contains(&t)) {
            return Err(Error::OutOfRange { t, t_max: self.t0() });
        }
        Ok(())
    }

    /// Index n of the segment (t_{n+1}, t_n] containing `t`, if any. The
    /// last knot itself belongs to the final segment (s = 0 endpoint) so it
    /// reproduces x_N exactly; strictly below it the linear extension rules.
    fn segment_of(&self, t: f64) -> Option<usize> {
        let last = self.knots_t.len() - 1;
        if t == self.knots_t[last] {
            return Some(last - 1);
        }
        if t > self.knots_t[0] || t < self.knots_t[last] {
            return None;
        }
        // knots_t is strictly decreasing
        let mut lo = 0;
        let mut hi = last;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t > self.knots_t[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(lo)
    }

    /// γ(t) for t ∈ [0, t₀]. Hits every knot exactly; below the last knot
    /// the path continues as a + t·v.
    pub fn eval(&self, t: f64) -> Result<Vector> {
        self.check_range(t)?;
        Ok(self.eval_extended(t))
    }

    /// Evaluation on [−t₀, t₀]: negative times and times below the last knot
    /// use the linear extension a + t·v.
    pub(crate) fn eval_extended(&self, t: f64) -> Vector {
        match self.segment_of(t) {
            None => self.base.add(&self.velocity.scale(t)),
            Some(n) => {
                let (t_hi, t_lo) = (self.knots_t[n], self.knots_t[n + 1]);
                let span = t_hi - t_lo;
                let s = (t - t_lo) / span;
                let x_hi = &self.knots_x[n];
                let x_lo = &self.knots_x[n + 1];
                x_lo.add(&x_hi.sub(x_lo).scale(hermite_p(s)))
                    .add(&self.velocity.scale(span * hermite_q(s)))
            }
        }
    }

    /// γ'(t), the analytic derivative of the segment blend. Every knot
    /// evaluates to the velocity v; so does the linear extension.
    pub fn derivative(&self, t: f64) -> Result<Vector> {
        self.check_range(t)?;
        Ok(self.derivative_extended(t))
    }

    pub(crate) fn derivative_extended(&self, t: f64) -> Vector {
        match self.segment_of(t) {
            None => self.velocity.clone(),
            Some(n) => {
                let (t_hi, t_lo) = (self.knots_t[n], self.knots_t[n + 1]);
                let span = t_hi - t_lo;
                let s = (t - t_lo) / span;
                let x_hi = &self.knots_x[n];
                let x_lo = &self.knots_x[n + 1];
                x_hi.sub(x_lo)
                    .scale(hermite_p_prime(s) / span)
                    .add(&self.velocity.scale(hermite_q_prime(s)))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PathRepr {
    base: Vec<f64>,
    knots_t: Vec<f64>,
    knots_x: Vec<Vec<f64>>,
    velocity: Vec<f64>,
}

impl Serialize for PiecewisePath {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PathRepr {
            base: self.base.as_slice().to_vec(),
            knots_t: self.knots_t.clone(),
            knots_x: self.knots_x.iter().map(|x| x.as_slice().to_vec()).collect(),
            velocity: self.velocity.as_slice().to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiecewisePath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PathRepr::deserialize(deserializer)?;
        let base = Vector::new(repr.base).map_err(D::Error::custom)?;
        let velocity = Vector::new(repr.velocity).map_err(D::Error::custom)?;
        let knots_x = repr
            .knots_x
            .into_iter()
            .map(Vector::new)
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        PiecewisePath::new(base, repr.knots_t, knots_x, velocity).map_err(D::Error::custom)
    }
}

/// Verdict of a path pullback experiment with its quotient curves.
#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    /// L[γ'(0)], the expected limit of the difference quotients.
    pub target: Vector,
    /// Per level: (time scale, worst quotient deviation, worst growth ratio).
    pub levels: Vec<(f64, f64, f64)>,
    pub verdict: Verdict,
    pub reason: String,
}

/// Tests differentiability of f∘γ at 0 against the candidate L[γ'(0)]:
/// difference quotients at knots, segment midpoints, and a fixed per-level
/// grid, bucketed by the schedule's decay and judged by the same residual
/// and divergence rules as the estimators.
pub fn pullback_test(
    f: &BlackBoxFn,
    path: &PiecewisePath,
    l: &LinearMap,
    sched: &ScaleSchedule,
    opts: &EstimatorOptions,
) -> Result<PathReport> {
    if path.dim() != f.input_dim() {
        return Err(Error::DimensionMismatch { expected: f.input_dim(), got: path.dim() });
    }
    let base = path.base();
    if !f.domain().contains(base) {
        return Err(Error::InvalidParameter("path base lies outside the domain".into()));
    }
    let target = l.apply(path.velocity())?;
    let fa = f.eval(base)?.as_dvector().clone();
    let t0 = path.t0();

    let mut times: Vec<f64> = Vec::new();
    times.extend(path.knot_times().iter().copied());
    for w in path.knot_times().windows(2) {
        times.push(0.5 * (w[0] + w[1]));
    }

    let mut levels = Vec::with_capacity(sched.levels());
    let rho = sched.rho();
    let time_scale = t0.min(sched.delta0());
    for k in 0..sched.levels() {
        let hi = time_scale * rho.powi(k as i32);
        let lo = hi * rho;
        let mut bucket: Vec<f64> =
            times.iter().copied().filter(|t| *t > lo && *t <= hi).collect();
        // fixed in-level grid keeps buckets nonempty whatever the knot spacing
        for frac in [1.0, 0.85, 0.7, 0.55] {
            bucket.push(hi * frac);
        }
        let mut worst_resid = 0.0_f64;
        let mut worst_growth = 0.0_f64;
        for t in bucket {
            if t <= 0.0 || t > t0 {
                continue;
            }
            let x = path.eval_extended(t);
            if !f.domain().contains(&x) {
                continue;
            }
            let diff = f.eval_unchecked(&x).as_dvector() - &fa;
            let quotient = diff.norm() / t;
            worst_growth = worst_growth.max(if quotient.is_finite() {
                quotient
            } else {
                f64::INFINITY
            });
            let resid = (diff / t - target.as_dvector()).norm();
            worst_resid = worst_resid.max(if resid.is_finite() { resid } else { f64::INFINITY });
        }
        levels.push((hi, worst_resid, worst_growth));
    }

    let growth: Vec<f64> = levels.iter().map(|l| l.2).collect();
    let residuals: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let t_finest = levels.last().expect("levels >= 3").0;
    let noise_floor = 1e-13 * (1.0 + fa.norm() + base.norm()) / t_finest;
    let (verdict, reason) = if let Some(why) = divergence_reason(&growth, opts) {
        (Verdict::Divergent, why)
    } else {
        match residual_acceptance(&residuals, 0.0, target.norm(), noise_floor, opts) {
            Ok(why) => (Verdict::Differentiable, why),
            Err(why) => (Verdict::Inconclusive, why),
        }
    };
    Ok(PathReport { target, levels, verdict, reason })
}

/// The straightening diffeomorphism pair built from a path: forward map
/// ψ̃(y₁, y″) = γ(y₁) + (0, y″) and a numerically inverted ψ̃⁻¹ valid on a
/// reported box around the origin.
#[derive(Clone, Debug)]
pub struct Straightening {
    pub forward: BlackBoxFn,
    pub inverse: BlackBoxFn,
    /// Half-width b of the y₁ interval [−b, b] on which γ₁ was verified
    /// strictly monotone, hence the inverse well-defined.
    pub box_halfwidth: f64,
}

/// Builds ψ̃ and its inverse from a path whose velocity has nonvanishing
/// first coordinate. The inverse solves γ₁(y₁) = z₁ by bisection on the
/// monotone interval, then subtracts the remaining path coordinates.
pub fn straightening_map(path: &PiecewisePath) -> Result<Straightening> {
    let v1 = path.velocity()[0];
    if v1.abs() < 1e-8 {
        return Err(Error::FirstCoordinateDegenerate { v1 });
    }
    let m = path.dim();
    let t0 = path.t0();
    let sign = v1.signum();

    // verify monotonicity of γ₁ on a symmetric grid, shrink to the verified box
    let grid = 512;
    let mut halfwidth = t0;
    'outer: for i in 0..=grid {
        let t = t0 * (i as f64 / grid as f64);
        for t in [t, -t] {
            let d1 = path.derivative_extended(t)[0];
            if d1 * sign <= 0.0 {
                halfwidth = (t.abs() - t0 / grid as f64).max(0.0);
                break 'outer;
            }
        }
    }
    let b = halfwidth;

    let fwd_path = Arc::new(path.clone());
    let forward = BlackBoxFn::new(m, m, {
        let path = Arc::clone(&fwd_path);
        move |y| {
            let gamma = path.eval_extended(y[0]);
            let mut out = gamma.as_dvector().clone();
            for j in 1..out.len() {
                out[j] += y[j];
            }
            Vector::from_dvector(out)
        }
    })
    .with_domain(DomainPredicate::new(move |y| y[0].abs() <= b));

    let inv_path = Arc::new(path.clone());
    let z_lo = inv_path.eval_extended(-b)[0].min(inv_path.eval_extended(b)[0]);
    let z_hi = inv_path.eval_extended(-b)[0].max(inv_path.eval_extended(b)[0]);
    let inverse = BlackBoxFn::new(m, m, {
        let path = Arc::clone(&inv_path);
        move |z| {
            let target = z[0].clamp(z_lo, z_hi);
            let (mut lo, mut hi) = (-b, b);
            // γ₁ monotone on [−b, b]; bisection to machine precision
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let val = path.eval_extended(mid)[0];
                if (val - target) * sign <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * b {
                    break;
                }
            }
            let y1 = 0.5 * (lo + hi);
            let gamma = path.eval_extended(y1);
            let mut out = z.as_dvector().clone();
            out[0] = y1;
            for j in 1..out.len() {
                out[j] -= gamma[j];
            }
            Vector::from_dvector(out)
        }
    })
    .with_domain(DomainPredicate::new(move |z| z[0] >= z_lo && z[0] <= z_hi));

    Ok(Straightening { forward, inverse, box_halfwidth: b })
}
