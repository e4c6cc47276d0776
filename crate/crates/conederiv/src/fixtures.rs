//! Built-in example and counterexample functions with their ground-truth
//! expectations, plus the diffeomorphisms used by the invariance suites.
//!
//! The catalog doubles as the regression matrix: every fixture's expected
//! map is checked against the estimators under default options.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

type JacobianFn = Arc<dyn Fn(&Vector) -> DMatrix<f64> + Send + Sync>;
use crate::estimate::{estimate_directional, estimate_tangential, Verdict};
use crate::function::{BlackBoxFn, DomainPredicate};
use crate::growth::{cone_growth, two_point_cone_lipschitz};
use crate::linalg::{LinearMap, Subspace, Vector};
use crate::options::EstimatorOptions;
use crate::sampling::ScaleSchedule;

/// What the estimators are expected to conclude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExpectedVerdict {
    Differentiable,
    Divergent,
    /// Anything but Differentiable (Divergent or Inconclusive).
    NotDifferentiable,
}

impl ExpectedVerdict {
    pub fn matches(&self, verdict: Verdict) -> bool {
        match self {
            ExpectedVerdict::Differentiable => verdict == Verdict::Differentiable,
            ExpectedVerdict::Divergent => verdict == Verdict::Divergent,
            ExpectedVerdict::NotDifferentiable => verdict != Verdict::Differentiable,
        }
    }
}

/// Ground-truth expectations attached to a fixture.
#[derive(Clone, Debug, Default)]
pub struct Expectations {
    pub directional: Option<ExpectedVerdict>,
    pub tangential: Option<ExpectedVerdict>,
    /// Expected derivative matrix over the fixture subspace's coordinates,
    /// compared when the corresponding verdict is Differentiable.
    pub map: Option<DMatrix<f64>>,
    /// Tolerance for the map comparison, relative to max(1, ‖expected‖).
    pub map_tol: f64,
    /// Expected fixed-aperture growth slope with its tolerance.
    pub growth_slope: Option<(f64, f64)>,
    /// Expected outcome of the two-point probe on the full space.
    pub lipschitz_bounded: Option<bool>,
}

/// A named function with base point, subspace, parameters, and expectations.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub f: BlackBoxFn,
    pub base_point: Vector,
    pub subspace: Subspace,
    pub params: BTreeMap<String, f64>,
    pub expected: Expectations,
}

/// Everything produced while verifying one fixture: the boolean outcomes
/// plus the reports they were judged on.
#[derive(Clone, Debug)]
pub struct FixtureVerification {
    pub checks: Vec<CheckOutcome>,
    pub directional: Option<crate::estimate::DerivativeEstimate>,
    pub tangential: Option<crate::estimate::DerivativeEstimate>,
    pub growth: Option<crate::growth::GrowthReport>,
    pub lipschitz: Option<crate::growth::LipschitzReport>,
}

/// One verified expectation.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Fixture {
    /// Runs every expectation of this fixture against the estimators.
    pub fn run_checks(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<Vec<CheckOutcome>> {
        Ok(self.verify(sched, opts)?.checks)
    }

    /// Runs every expectation, returning the reports alongside the outcomes.
    pub fn verify(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<FixtureVerification> {
        let mut checks = Vec::new();
        let directional = self.check_directional(sched, opts)?.map(|(check, est)| {
            checks.push(check);
            est
        });
        let tangential = self.check_tangential(sched, opts)?.map(|(check, est)| {
            checks.push(check);
            est
        });
        let growth = self.check_growth_slope(sched, opts)?.map(|(check, report)| {
            checks.push(check);
            report
        });
        let lipschitz = self.check_lipschitz(sched, opts)?.map(|(check, report)| {
            checks.push(check);
            report
        });
        Ok(FixtureVerification { checks, directional, tangential, growth, lipschitz })
    }

    /// Directional estimate scored against the fixture expectation, when one
    /// is declared.
    pub fn check_directional(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<Option<(CheckOutcome, crate::estimate::DerivativeEstimate)>> {
        let Some(expected) = self.expected.directional else { return Ok(None) };
        let est = estimate_directional(&self.f, &self.base_point, &self.subspace, sched, opts)?;
        let check = self.score_estimate("directional", expected, &est);
        Ok(Some((check, est)))
    }

    /// Tangential estimate scored against the fixture expectation, when one
    /// is declared.
    pub fn check_tangential(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<Option<(CheckOutcome, crate::estimate::DerivativeEstimate)>> {
        let Some(expected) = self.expected.tangential else { return Ok(None) };
        let est = estimate_tangential(&self.f, &self.base_point, &self.subspace, sched, opts)?;
        let check = self.score_estimate("tangential", expected, &est);
        Ok(Some((check, est)))
    }

    /// Fixed-aperture growth slope scored against the expected exponent.
    pub fn check_growth_slope(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<Option<(CheckOutcome, crate::growth::GrowthReport)>> {
        let Some((target, tol)) = self.expected.growth_slope else { return Ok(None) };
        let report = cone_growth(&self.f, &self.base_point, &self.subspace, sched, opts)?;
        let (passed, detail) = match report.slope {
            Some(slope) => (
                (slope - target).abs() <= tol,
                    format!("slope {slope:.4} (expected {target:.4} ± {tol})"),
                ),
                None => (false, "no slope available".into()),
            };
        Ok(Some((CheckOutcome { name: "growth-slope".into(), passed, detail }, report)))
    }

    /// Two-point probe on the full space scored against the expected
    /// boundedness.
    pub fn check_lipschitz(
        &self,
        sched: &ScaleSchedule,
        opts: &EstimatorOptions,
    ) -> Result<Option<(CheckOutcome, crate::growth::LipschitzReport)>> {
        let Some(expected) = self.expected.lipschitz_bounded else { return Ok(None) };
        let report = two_point_cone_lipschitz(
            &self.f,
            &self.base_point,
            &Subspace::full(self.f.input_dim()),
            sched,
            opts,
        )?;
        let check = CheckOutcome {
            name: "lipschitz-bounded".into(),
            passed: report.bounded == expected,
            detail: format!("bounded = {} (expected {expected})", report.bounded),
        };
        Ok(Some((check, report)))
    }

    fn score_estimate(
        &self,
        name: &str,
        expected: ExpectedVerdict,
        est: &crate::estimate::DerivativeEstimate,
    ) -> CheckOutcome {
        let mut passed = expected.matches(est.verdict);
        let mut detail = format!("verdict {} (expected {:?})", est.verdict, expected);
        if passed && expected == ExpectedVerdict::Differentiable {
            if let Some(gap) = self.map_gap(&est.map) {
                let tol = self.map_scale_tol();
                passed = gap <= tol;
                detail.push_str(&format!(", map gap {gap:.3e} (tol {tol:.1e})"));
            }
        }
        CheckOutcome { name: name.into(), passed, detail }
    }

    fn map_gap(&self, fitted: &LinearMap) -> Option<f64> {
        let expected = self.expected.map.as_ref()?;
        Some(crate::numeric::spectral_norm(&(fitted.matrix() - expected)))
    }

    fn map_scale_tol(&self) -> f64 {
        let scale =
            self.expected.map.as_ref().map(crate::numeric::spectral_norm).unwrap_or(0.0);
        self.expected.map_tol * scale.max(1.0)
    }
}

/// The last-coordinate functional K[x] = x_m, the canonical kernel map.
pub fn default_kernel_functional(m: usize) -> LinearMap {
    let mut row = DMatrix::zeros(1, m);
    row[(0, m - 1)] = 1.0;
    LinearMap::new(Subspace::full(m), row).expect("valid functional")
}

fn format_param(x: f64) -> String {
    format!("{x}")
}

/// The homogeneous singularity f(x) = K[x]/‖x‖^α (0 at the origin): its
/// restriction to V = ker K vanishes, so the zero map is a directional
/// derivative there, yet the cone growth is unbounded and no tangential
/// derivative exists.
pub fn kernel_singular(m: usize, k_map: &LinearMap, alpha: f64) -> Result<Fixture> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if k_map.output_dim() != 1 || k_map.domain().ambient_dim() != m {
        return Err(Error::InvalidParameter("kernel functional must map ℝᵐ to ℝ".into()));
    }
    if k_map.operator_norm() == 0.0 {
        return Err(Error::InvalidParameter("kernel functional must be nonzero".into()));
    }
    let subspace = k_map.kernel();
    if subspace.dim() == 0 || subspace.dim() == m {
        return Err(Error::InvalidParameter("kernel must be a proper nontrivial subspace".into()));
    }
    let row = k_map.ambient_matrix();
    let f = BlackBoxFn::scalar(m, move |x| {
        let n = x.norm();
        if n == 0.0 {
            0.0
        } else {
            (&row * x.as_dvector())[0] / n.powf(alpha)
        }
    });
    let k = subspace.dim();
    Ok(Fixture {
        name: format!("kernel-singular-m{m}-a{}", format_param(alpha)),
        description: format!(
            "f(x) = K[x]/|x|^{} on R^{m} with K = last coordinate (0 at the origin); flat on ker K, unbounded cone growth",
            format_param(alpha)
        ),
        f,
        base_point: Vector::zeros(m),
        subspace,
        params: BTreeMap::from([("alpha".to_string(), alpha)]),
        expected: Expectations {
            directional: Some(ExpectedVerdict::Differentiable),
            tangential: Some(ExpectedVerdict::Divergent),
            map: Some(DMatrix::zeros(1, k)),
            map_tol: 1e-6,
            growth_slope: Some((-alpha, 0.1)),
            lipschitz_bounded: Some(false),
        },
    })
}

/// A pair (f, g) whose composition loses tangential differentiability:
/// f(x) = |K[x]|^β/‖x‖ and g(t) = |t|^{1/β}.
#[derive(Clone, Debug)]
pub struct ChainPair {
    pub name: String,
    pub f: Fixture,
    pub g: BlackBoxFn,
    pub beta: f64,
    /// The composite behaves like the kernel singularity with this exponent.
    pub composite_alpha: f64,
}

pub fn chain_pair(m: usize, k_map: &LinearMap, beta: f64) -> Result<ChainPair> {
    if !(beta >= 2.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be at least 2, got {beta}")));
    }
    if k_map.output_dim() != 1 || k_map.domain().ambient_dim() != m {
        return Err(Error::InvalidParameter("kernel functional must map ℝᵐ to ℝ".into()));
    }
    let subspace = k_map.kernel();
    if subspace.dim() == 0 || subspace.dim() == m {
        return Err(Error::InvalidParameter("kernel must be a proper nontrivial subspace".into()));
    }
    let row = k_map.ambient_matrix();
    let f = BlackBoxFn::scalar(m, move |x| {
        let n = x.norm();
        if n == 0.0 {
            0.0
        } else {
            (&row * x.as_dvector())[0].abs().powf(beta) / n
        }
    });
    let g = BlackBoxFn::scalar(1, move |t| t[0].abs().powf(1.0 / beta));
    let k = subspace.dim();
    let f_fixture = Fixture {
        name: format!("chain-f-beta{}", format_param(beta)),
        description: format!(
            "f(x) = |K[x]|^{}/|x| with K = last coordinate; tangentially flat on ker K, composes badly with the matching root",
            format_param(beta)
        ),
        f,
        base_point: Vector::zeros(m),
        subspace,
        params: BTreeMap::from([("beta".to_string(), beta)]),
        expected: Expectations {
            directional: Some(ExpectedVerdict::Differentiable),
            tangential: Some(ExpectedVerdict::Differentiable),
            map: Some(DMatrix::zeros(1, k)),
            map_tol: 1e-6,
            growth_slope: None,
            lipschitz_bounded: None,
        },
    };
    Ok(ChainPair {
        name: format!("chain-pair-beta{}", format_param(beta)),
        f: f_fixture,
        g,
        beta,
        composite_alpha: 1.0 / beta,
    })
}

/// The golden-angle direction sequence v_n used by the dense-ray fixture.
pub fn dense_rays(n_rays: usize, seed: u64) -> Vec<Vector> {
    let golden = crate::sampling::GOLDEN_FRAC;
    let base = seed as f64 * std::f64::consts::TAU * golden * golden;
    (0..n_rays)
        .map(|n| {
            let angle = base + n as f64 * std::f64::consts::TAU * golden;
            Vector::from_slice(&[angle.cos(), angle.sin()]).expect("finite ray")
        })
        .collect()
}

/// Indicator-style counterexample: 0 inside shrinking cones around finitely
/// many dense directions, 1 elsewhere. Every enumerated ray sees derivative
/// zero, yet the function is discontinuous at 0 along uncovered directions.
pub fn dense_ray_indicator(m: usize, n_rays: usize, seed: u64) -> Result<Fixture> {
    if m != 2 {
        return Err(Error::InvalidParameter(
            "dense-ray enumeration is defined in the plane (m = 2)".into(),
        ));
    }
    if n_rays == 0 {
        return Err(Error::InvalidParameter("need at least one ray".into()));
    }
    let rays = dense_rays(n_rays, seed);
    let f = BlackBoxFn::scalar(m, move |x| {
        let n = x.norm();
        if n == 0.0 {
            return 0.0;
        }
        for (i, ray) in rays.iter().enumerate() {
            let along = ray.dot(x);
            let dist = x.sub(&ray.scale(along)).norm();
            // cone boundary included
            if dist <= n / 2f64.powi(i as i32 + 2) {
                return 0.0;
            }
        }
        1.0
    });
    Ok(Fixture {
        name: format!("dense-ray-indicator-{n_rays}"),
        description: format!(
            "0 inside {n_rays} shrinking cones around golden-angle rays, 1 elsewhere; every listed ray sees slope 0, the plane does not"
        ),
        f,
        base_point: Vector::zeros(2),
        subspace: Subspace::full(2),
        params: BTreeMap::from([
            ("n_rays".to_string(), n_rays as f64),
            ("seed".to_string(), seed as f64),
        ]),
        expected: Expectations {
            directional: Some(ExpectedVerdict::NotDifferentiable),
            tangential: Some(ExpectedVerdict::NotDifferentiable),
            map: None,
            map_tol: 0.0,
            growth_slope: None,
            lipschitz_bounded: Some(false),
        },
    })
}

/// The Lipschitz control f(x) = x₁x₂/‖x‖ (0 at the origin): directional and
/// tangential verdicts agree on ⟨e₁⟩, while per-direction limits on ℝ² exist
/// but admit no single linear fit.
pub fn lipschitz_homogeneous() -> Fixture {
    let f = BlackBoxFn::scalar(2, |x| {
        let n = x.norm();
        if n == 0.0 {
            0.0
        } else {
            x[0] * x[1] / n
        }
    });
    let subspace = Subspace::orthonormalize(2, &[Vector::unit(2, 0)]).expect("axis span");
    Fixture {
        name: "lipschitz-homogeneous".into(),
        description: "f(x) = x1*x2/|x| (0 at the origin): Lipschitz, flat along the first axis, nonlinear ray profile on the plane".into(),
        f,
        base_point: Vector::zeros(2),
        subspace,
        params: BTreeMap::new(),
        expected: Expectations {
            directional: Some(ExpectedVerdict::Differentiable),
            tangential: Some(ExpectedVerdict::Differentiable),
            map: Some(DMatrix::zeros(1, 1)),
            map_tol: 1e-5,
            growth_slope: None,
            lipschitz_bounded: Some(true),
        },
    }
}

/// Built-in smooth controls carrying their symbolic derivative restricted to
/// the fixture subspace.
pub fn smooth_control(expr_id: &str) -> Result<Fixture> {
    let e1 = Subspace::orthonormalize(2, &[Vector::unit(2, 0)]).expect("axis span");
    let (f, map): (BlackBoxFn, DMatrix<f64>) = match expr_id {
        "sin-quadratic" => (
            BlackBoxFn::scalar(2, |x| x[0].sin() + x[1] * x[1]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
        ),
        "polynomial" => (
            BlackBoxFn::new(2, 2, |x| {
                Vector::from_dvector(nalgebra::DVector::from_vec(vec![
                    x[0] + 0.25 * x[1] + 0.25 * x[0] * x[1],
                    x[1] - 0.25 * x[0] * x[0],
                ]))
            }),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
        ),
        "exp-mix" => (
            BlackBoxFn::scalar(2, |x| (0.5 * x[0]).exp() - 1.0 + 0.5 * x[1]),
            DMatrix::from_row_slice(1, 1, &[0.5]),
        ),
        other => return Err(Error::UnknownFixture(format!("smooth control '{other}'"))),
    };
    Ok(Fixture {
        name: format!("smooth-{expr_id}"),
        description: match expr_id {
            "sin-quadratic" => "f(x) = sin(x1) + x2^2, slope 1 along the first axis".into(),
            "polynomial" => "f(x) = (x1 + x2/4 + x1*x2/4, x2 - x1^2/4), injective derivative on the first axis".into(),
            _ => "f(x) = exp(x1/2) - 1 + x2/2, slope 1/2 along the first axis".into(),
        },
        f,
        base_point: Vector::zeros(2),
        subspace: e1,
        params: BTreeMap::new(),
        expected: Expectations {
            directional: Some(ExpectedVerdict::Differentiable),
            tangential: Some(ExpectedVerdict::Differentiable),
            map: Some(map),
            map_tol: 1e-5,
            growth_slope: None,
            lipschitz_bounded: Some(true),
        },
    })
}

/// A diffeomorphism with closed-form forward map, usable inverse, and
/// analytic Jacobian.
#[derive(Clone)]
pub struct Diffeo {
    pub name: String,
    pub forward: BlackBoxFn,
    pub inverse: BlackBoxFn,
    jacobian: JacobianFn,
}

impl std::fmt::Debug for Diffeo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Diffeo({})", self.name)
    }
}

/// A transported estimation problem: f∘ψ⁻¹ at ψ(a) with respect to Dψ(a)[V].
#[derive(Clone, Debug)]
pub struct TransportedProblem {
    pub function: BlackBoxFn,
    pub base: Vector,
    pub subspace: Subspace,
    /// Coordinate matrix of T = Dψ(a)|_V as a map V → W (k×k, invertible).
    pub v_to_w: DMatrix<f64>,
}

impl TransportedProblem {
    /// The transported candidate L∘T⁻¹ over W-coordinates, given L over
    /// V-coordinates.
    pub fn transport_map(&self, l: &LinearMap) -> Result<LinearMap> {
        let inv = self
            .v_to_w
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("transport matrix is singular".into()))?;
        LinearMap::new(self.subspace.clone(), l.matrix() * inv)
    }
}

impl Diffeo {
    pub fn jacobian_at(&self, x: &Vector) -> DMatrix<f64> {
        (self.jacobian)(x)
    }

    /// Builds the transported problem for estimating f∘ψ⁻¹ at ψ(a) with
    /// respect to Dψ(a)[V].
    pub fn transport(&self, f: &BlackBoxFn, a: &Vector, v: &Subspace) -> Result<TransportedProblem> {
        let base = self.forward.eval(a)?;
        let jac = self.jacobian_at(a);
        let pushed = &jac * v.basis();
        let subspace = Subspace::from_span_matrix(pushed.clone())?;
        if subspace.dim() != v.dim() {
            return Err(Error::InvalidParameter(
                "jacobian does not carry the subspace injectively".into(),
            ));
        }
        let v_to_w = subspace.basis().transpose() * pushed;
        let function = BlackBoxFn::compose(f, &self.inverse)?;
        Ok(TransportedProblem { function, base, subspace, v_to_w })
    }
}

/// The shear ψ(x) = (x₁, x₂ + x₁²) with exact inverse (z₁, z₂ − z₁²).
pub fn shear_diffeo() -> Diffeo {
    let forward = BlackBoxFn::new(2, 2, |x| {
        Vector::from_dvector(nalgebra::DVector::from_vec(vec![x[0], x[1] + x[0] * x[0]]))
    });
    let inverse = BlackBoxFn::new(2, 2, |z| {
        Vector::from_dvector(nalgebra::DVector::from_vec(vec![z[0], z[1] - z[0] * z[0]]))
    });
    Diffeo {
        name: "shear".into(),
        forward,
        inverse,
        jacobian: Arc::new(|x: &Vector| {
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0 * x[0], 1.0])
        }),
    }
}

/// A seeded polynomial perturbation of a near-identity linear map,
/// ψ(x) = A·x + ε·q(x) with quadratic q, inverted by Newton iteration on a
/// ball around the origin.
pub fn polynomial_diffeo(m: usize, seed: u64) -> Diffeo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] += 0.15 * rng.gen_range(-1.0..1.0);
        }
    }
    let eps = 0.1;
    // quad[i][(j, l)] coefficients of x_j x_l, j <= l
    let mut quad = vec![Vec::new(); m];
    for coeffs in quad.iter_mut() {
        for j in 0..m {
            for l in j..m {
                coeffs.push((j, l, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let a_fwd = a.clone();
    let quad_fwd = quad.clone();
    let eval_forward = move |x: &Vector| -> nalgebra::DVector<f64> {
        let mut out = &a_fwd * x.as_dvector();
        for (i, coeffs) in quad_fwd.iter().enumerate() {
            for (j, l, c) in coeffs {
                out[i] += eps * c * x[*j] * x[*l];
            }
        }
        out
    };
    let quad_jac = quad.clone();
    let a_jac = a.clone();
    let jacobian = move |x: &Vector| -> DMatrix<f64> {
        let mut jac = a_jac.clone();
        for (i, coeffs) in quad_jac.iter().enumerate() {
            for (j, l, c) in coeffs {
                jac[(i, *j)] += eps * c * x[*l];
                jac[(i, *l)] += eps * c * x[*j];
            }
        }
        jac
    };

    let fwd = eval_forward.clone();
    let forward = BlackBoxFn::new(m, m, move |x| Vector::from_dvector(fwd(x)));

    let inv_fwd = eval_forward;
    let inv_jac = jacobian.clone();
    let a_inv = a.clone().try_inverse().expect("near-identity matrix is invertible");
    let inverse = BlackBoxFn::new(m, m, move |z| {
        let mut x = Vector::from_dvector(&a_inv * z.as_dvector());
        for _ in 0..60 {
            let fx = inv_fwd(&x);
            let residual = &fx - z.as_dvector();
            if residual.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
            let jac = inv_jac(&x);
            let step = jac.lu().solve(&residual).unwrap_or_else(|| residual.clone());
            x = Vector::from_dvector(x.as_dvector() - step);
        }
        x
    })
    .with_domain(DomainPredicate::new(|z| z.norm() < 0.5));

    Diffeo {
        name: format!("polynomial-{seed}"),
        forward,
        inverse,
        jacobian: Arc::new(jacobian),
    }
}

/// The full fixture catalog covering singular, chain, Lipschitz, smooth,
/// and dense-ray functions.
pub fn catalog() -> Vec<Fixture> {
    let mut out = Vec::new();
    for m in [2_usize, 3] {
        for alpha in [0.25, 0.5, 1.0] {
            out.push(
                kernel_singular(m, &default_kernel_functional(m), alpha)
                    .expect("catalog kernel fixture"),
            );
        }
    }
    for beta in [2.0, 3.0] {
        out.push(chain_pair(2, &default_kernel_functional(2), beta).expect("catalog pair").f);
    }
    out.push(lipschitz_homogeneous());
    for id in ["sin-quadratic", "polynomial", "exp-mix"] {
        out.push(smooth_control(id).expect("catalog smooth fixture"));
    }
    out.push(dense_ray_indicator(2, 6, 0).expect("catalog dense-ray fixture"));
    out
}

/// Looks a fixture up by its catalog name.
pub fn by_name(name: &str) -> Result<Fixture> {
    catalog()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))
}

/// A composition cell of the chain-rule matrix.
#[derive(Clone, Debug)]
pub struct ChainCell {
    pub name: String,
    pub f: BlackBoxFn,
    pub g: BlackBoxFn,
    pub base: Vector,
    pub subspace: Subspace,
    pub expected_holds: bool,
}

/// The five-cell chain matrix: the root pairs for β ∈ {2, 3} (condition
/// fails), the same f against Lipschitz and linear outer functions
/// (condition holds), and a smooth injective map under the shear.
pub fn chain_cells() -> Vec<ChainCell> {
    let mut out = Vec::new();
    for beta in [2.0, 3.0] {
        let pair = chain_pair(2, &default_kernel_functional(2), beta).expect("pair");
        out.push(ChainCell {
            name: format!("beta{}-root", format_param(beta)),
            f: pair.f.f.clone(),
            g: pair.g.clone(),
            base: pair.f.base_point.clone(),
            subspace: pair.f.subspace.clone(),
            expected_holds: false,
        });
    }
    let pair = chain_pair(2, &default_kernel_functional(2), 2.0).expect("pair");
    out.push(ChainCell {
        name: "beta2-abs".into(),
        f: pair.f.f.clone(),
        g: BlackBoxFn::scalar(1, |t| t[0].abs()),
        base: pair.f.base_point.clone(),
        subspace: pair.f.subspace.clone(),
        expected_holds: true,
    });
    out.push(ChainCell {
        name: "beta2-linear".into(),
        f: pair.f.f.clone(),
        g: BlackBoxFn::scalar(1, |t| 3.0 * t[0]),
        base: pair.f.base_point.clone(),
        subspace: pair.f.subspace.clone(),
        expected_holds: true,
    });
    let smooth = smooth_control("polynomial").expect("smooth fixture");
    out.push(ChainCell {
        name: "shear-smooth".into(),
        f: smooth.f.clone(),
        g: shear_diffeo().forward,
        base: smooth.base_point.clone(),
        subspace: smooth.subspace.clone(),
        expected_holds: true,
    });
    out
}
