//! Point sets realizing the quantifiers of the derivative definitions:
//! direction meshes on V ∩ ∂B[0,1], sharp-cone clouds at prescribed radius
//! and aperture, and geometric scale schedules.
//!
//! All generation is low-discrepancy and seed-driven; identical arguments
//! produce identical sample lists.

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::function::DomainPredicate;
use crate::linalg::{Subspace, Vector};

/// Fractional part of the golden ratio, φ − 1.
pub(crate) const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

/// Geometric sequences of radii δ_k = delta0·ρᵏ and apertures θ_k = theta0·ρᵏ
/// driving the shrinking-limit tests.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSchedule {
    delta0: f64,
    theta0: f64,
    rho: f64,
    levels: usize,
}

impl ScaleSchedule {
    pub fn new(delta0: f64, theta0: f64, rho: f64, levels: usize) -> Result<Self> {
        if !(delta0.is_finite() && delta0 > 0.0) {
            return Err(Error::InvalidSchedule(format!("delta0 must be positive, got {delta0}")));
        }
        if !(theta0.is_finite() && theta0 > 0.0 && theta0 <= 1.0) {
            return Err(Error::InvalidSchedule(format!("theta0 must lie in (0, 1], got {theta0}")));
        }
        if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidSchedule(format!("rho must lie in (0, 1), got {rho}")));
        }
        if levels < 3 {
            return Err(Error::InvalidSchedule(format!("levels must be >= 3, got {levels}")));
        }
        Ok(Self { delta0, theta0, rho, levels })
    }

    /// The K pairs (δ_k, θ_k), strictly decreasing in both coordinates.
    pub fn scales(&self) -> Vec<(f64, f64)> {
        (0..self.levels)
            .map(|k| {
                let factor = self.rho.powi(k as i32);
                (self.delta0 * factor, self.theta0 * factor)
            })
            .collect()
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Same radii, different initial aperture.
    pub fn with_theta0(&self, theta0: f64) -> Result<Self> {
        Self::new(self.delta0, theta0, self.rho, self.levels)
    }

    pub fn with_levels(&self, levels: usize) -> Result<Self> {
        Self::new(self.delta0, self.theta0, self.rho, levels)
    }
}

impl Default for ScaleSchedule {
    fn default() -> Self {
        Self { delta0: 0.1, theta0: 0.02, rho: 0.5, levels: 8 }
    }
}

#[derive(Deserialize)]
struct ScheduleRepr {
    delta0: f64,
    theta0: f64,
    rho: f64,
    levels: usize,
}

impl<'de> Deserialize<'de> for ScaleSchedule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ScheduleRepr::deserialize(deserializer)?;
        ScaleSchedule::new(repr.delta0, repr.theta0, repr.rho, repr.levels)
            .map_err(serde::de::Error::custom)
    }
}

/// One cone sample: the point x, its radius ‖x−a‖, the subspace component
/// v = P_V(x−a), and the aperture ratio ‖x−a−v‖/‖x−a‖.
#[derive(Clone, Debug, Serialize)]
pub struct ConeSample {
    pub point: Vector,
    pub radius: f64,
    pub v_component: Vector,
    pub aperture_ratio: f64,
}

/// Unit directions covering V ∩ ∂B[0,1].
///
/// Low-discrepancy points (golden-angle circle, Fibonacci sphere, or a
/// Halton-driven generalization) plus all ± basis directions, antipodally
/// symmetric, deterministic for a fixed seed. A zero-dimensional subspace
/// has an empty unit sphere.
pub fn direction_mesh(v: &Subspace, count_per_dim: usize, seed: u64) -> Vec<Vector> {
    let k = v.dim();
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        let b = v.basis_column(0);
        return vec![b.clone(), b.scale(-1.0)];
    }
    let offset = mix_seed(seed) as usize % 0x10000;
    let count = count_per_dim.max(1).pow(k as u32 - 1).min(4096);
    let mut coords: Vec<DVector<f64>> = match k {
        2 => circle_points(count, offset),
        3 => fibonacci_sphere(count, offset),
        _ => halton_sphere(k, count, offset),
    };
    // antipodes keep least-squares fits free of even-order bias
    let gen: Vec<DVector<f64>> = coords.iter().map(|c| -c).collect();
    coords.extend(gen);
    for j in 0..k {
        let mut e = DVector::zeros(k);
        e[j] = 1.0;
        coords.push(e.clone());
        coords.push(-e);
    }
    let mut out: Vec<Vector> = Vec::with_capacity(coords.len());
    for c in coords {
        let ambient = v.embed(&c);
        let Some(unit) = ambient.normalized() else { continue };
        if !out.iter().any(|u| u.sub(&unit).norm() < 1e-9) {
            out.push(unit);
        }
    }
    out
}

fn mix_seed(seed: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn circle_points(n: usize, offset: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let t = ((i + offset + 1) as f64 * GOLDEN_FRAC).fract();
            let angle = std::f64::consts::TAU * t;
            DVector::from_vec(vec![angle.cos(), angle.sin()])
        })
        .collect()
}

fn fibonacci_sphere(n: usize, offset: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = ((i + offset + 1) as f64 * GOLDEN_FRAC).fract();
            let angle = std::f64::consts::TAU * t;
            DVector::from_vec(vec![r * angle.cos(), r * angle.sin(), z])
        })
        .collect()
}

const HALTON_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        inv += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    inv
}

/// Halton points pushed through Box–Muller pairs and normalized: an
/// equidistributed, seed-offset sequence on S^{k-1} for k >= 4.
fn halton_sphere(k: usize, n: usize, offset: usize) -> Vec<DVector<f64>> {
    let pairs = k.div_ceil(2);
    let mut out = Vec::with_capacity(n);
    let mut index = offset as u64 + 1;
    while out.len() < n {
        let mut normals = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let u1 = radical_inverse(index, HALTON_PRIMES[(2 * p) % HALTON_PRIMES.len()]);
            let u2 = radical_inverse(index, HALTON_PRIMES[(2 * p + 1) % HALTON_PRIMES.len()]);
            let r = (-2.0 * (1.0 - u1).max(f64::MIN_POSITIVE).ln()).sqrt();
            let angle = std::f64::consts::TAU * u2;
            normals.push(r * angle.cos());
            normals.push(r * angle.sin());
        }
        normals.truncate(k);
        let v = DVector::from_vec(normals);
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / norm);
        }
        index += 1;
    }
    out
}

/// Radius fractions of the dyadic shell [δ/2, δ]; the extremes are always
/// present, golden-ratio steps fill in between.
pub(crate) fn radius_fractions(n_radii: usize) -> Vec<f64> {
    let n = n_radii.max(1);
    let mut out = Vec::with_capacity(n);
    out.push(1.0);
    if n >= 2 {
        out.push(0.5);
    }
    let mut i = 0;
    while out.len() < n {
        i += 1;
        let f = 0.5 + 0.5 * (i as f64 * GOLDEN_FRAC).fract();
        if out.iter().all(|&g| g != f) {
            out.push(f);
        }
    }
    out
}

/// Aperture grid {0, θ/n, …, θ}; collapses to {0} when θ = 0.
pub(crate) fn aperture_grid(theta: f64, n_apertures: usize) -> Vec<f64> {
    if theta <= 0.0 {
        return vec![0.0];
    }
    let n = n_apertures.max(1);
    (0..=n).map(|j| theta * j as f64 / n as f64).collect()
}

/// Core cloud constructor shared by the public sampler and the estimators.
///
/// Points are x = a + r·(u·√(1−s²) + w·s) for direction u, carrier w ⟂ V,
/// aperture fraction s and shell radius r ∈ [δ/2, δ]. Samples outside the
/// domain are dropped; fewer than `required` survivors is an error.
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_cloud(
    a: &Vector,
    v: &Subspace,
    dirs: &[Vector],
    perp_dirs: &[Vector],
    delta: f64,
    theta: f64,
    n_apertures: usize,
    n_radii: usize,
    domain: &DomainPredicate,
    required: usize,
    min_frac: f64,
) -> Result<Vec<ConeSample>> {
    let apertures = aperture_grid(theta, n_apertures);
    let fracs = radius_fractions(n_radii);
    let mut samples = Vec::new();
    let mut generated = 0_usize;
    for u in dirs {
        for &s in &apertures {
            let carriers: &[Option<&Vector>] = if s == 0.0 || perp_dirs.is_empty() {
                &[None]
            } else {
                &[]
            };
            let carrier_iter: Vec<Option<&Vector>> = if carriers.is_empty() {
                perp_dirs.iter().map(Some).collect()
            } else {
                carriers.to_vec()
            };
            for w in carrier_iter {
                let dir = match w {
                    None => u.clone(),
                    Some(w) => u.scale((1.0 - s * s).sqrt()).add(&w.scale(s)),
                };
                for &fr in &fracs {
                    let r = delta * fr;
                    let x = a.add(&dir.scale(r));
                    generated += 1;
                    if !domain.contains(&x) {
                        continue;
                    }
                    let d = x.sub(a);
                    let radius = d.norm();
                    if radius == 0.0 {
                        continue;
                    }
                    let v_component = v.project(&d)?;
                    let aperture_ratio = d.sub(&v_component).norm() / radius;
                    samples.push(ConeSample { point: x, radius, v_component, aperture_ratio });
                }
            }
        }
    }
    let floor = required.max((min_frac * generated as f64).ceil() as usize);
    if samples.len() < floor {
        return Err(Error::InsufficientSamples { survivors: samples.len(), required: floor });
    }
    Ok(samples)
}

/// Sharp-cone point cloud around `a` with radius δ and aperture θ relative
/// to the subspace V.
///
/// Every sample has radius in [δ/2, δ] and aperture ratio at most θ;
/// deterministic for a fixed seed. Fewer than `n_dirs` survivors after
/// domain filtering (or under 25% of the generated points) is an error.
#[allow(clippy::too_many_arguments)]
pub fn cone_cloud(
    a: &Vector,
    v: &Subspace,
    delta: f64,
    theta: f64,
    n_dirs: usize,
    n_apertures: usize,
    domain: &DomainPredicate,
    seed: u64,
) -> Result<Vec<ConeSample>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")));
    }
    if a.dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: v.ambient_dim(), got: a.dim() });
    }
    let dirs = direction_mesh(v, n_dirs, seed);
    let perp = direction_mesh(&v.complement(), 2, seed.wrapping_add(1));
    build_cloud(a, v, &dirs, &perp, delta, theta, n_apertures, 3, domain, n_dirs, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(x: f64, y: f64) -> Vector {
        Vector::from_slice(&[x, y]).unwrap()
    }

    #[test]
    fn schedule_is_geometric() {
        let s = ScaleSchedule::new(1.0, 0.5, 0.5, 3).unwrap();
        let scales = s.scales();
        assert_eq!(scales, vec![(1.0, 0.5), (0.5, 0.25), (0.25, 0.125)]);
    }

    #[test]
    fn schedule_radii_quarter_decay() {
        let s = ScaleSchedule::new(1.0, 1.0, 0.25, 4).unwrap();
        let radii: Vec<f64> = s.scales().iter().map(|p| p.0).collect();
        assert_eq!(radii, vec![1.0, 0.25, 0.0625, 0.015625]);
    }

    #[test]
    fn schedule_has_exactly_levels_pairs() {
        let s = ScaleSchedule::new(0.2, 0.3, 0.7, 3).unwrap();
        assert_eq!(s.scales().len(), 3);
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!(ScaleSchedule::new(0.0, 0.5, 0.5, 3).is_err());
        assert!(ScaleSchedule::new(1.0, 0.0, 0.5, 3).is_err());
        assert!(ScaleSchedule::new(1.0, 0.5, 1.0, 3).is_err());
        assert!(ScaleSchedule::new(1.0, 0.5, 0.5, 2).is_err());
    }

    #[test]
    fn schedule_parse_rejects_rho_one() {
        let json = r#"{"delta0":1.0,"theta0":0.5,"rho":1.0,"levels":3}"#;
        assert!(serde_json::from_str::<ScaleSchedule>(json).is_err());
    }

    #[test]
    fn mesh_of_line_is_antipodal_pair() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        for count in [1, 4, 16] {
            let mesh = direction_mesh(&v, count, 0);
            assert_eq!(mesh.len(), 2);
            assert!(mesh.iter().any(|u| u.sub(&vec2(1.0, 0.0)).norm() < 1e-12));
            assert!(mesh.iter().any(|u| u.sub(&vec2(-1.0, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn mesh_of_plane_is_unit_and_distinct() {
        let v = Subspace::full(2);
        let mesh = direction_mesh(&v, 4, 0);
        assert!(mesh.len() >= 8);
        for u in &mesh {
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
        for (i, u) in mesh.iter().enumerate() {
            for w in &mesh[i + 1..] {
                assert!(u.sub(w).norm() > 1e-9);
            }
        }
    }

    #[test]
    fn mesh_densifies_with_count() {
        let v = Subspace::full(2);
        let coarse = direction_mesh(&v, 4, 0).len();
        let fine = direction_mesh(&v, 32, 0).len();
        assert!(fine > 2 * coarse, "mesh should densify: {coarse} -> {fine}");
    }

    #[test]
    fn mesh_of_zero_subspace_is_empty() {
        let v = Subspace::zero(3);
        assert!(direction_mesh(&v, 8, 0).is_empty());
    }

    #[test]
    fn mesh_is_antipodally_symmetric() {
        for k in [2_usize, 3, 4] {
            let v = Subspace::full(k);
            let mesh = direction_mesh(&v, 4, 7);
            for u in &mesh {
                let anti = u.scale(-1.0);
                assert!(
                    mesh.iter().any(|w| w.sub(&anti).norm() < 1e-9),
                    "missing antipode in dim {k}"
                );
            }
        }
    }

    #[test]
    fn cloud_on_full_space_has_zero_aperture() {
        let a = vec2(0.3, -0.1);
        let v = Subspace::full(2);
        let cloud =
            cone_cloud(&a, &v, 0.1, 0.5, 4, 4, &DomainPredicate::full(), 0).unwrap();
        assert!(!cloud.is_empty());
        for s in &cloud {
            assert_eq!(s.aperture_ratio, 0.0);
        }
    }

    #[test]
    fn cloud_respects_aperture_bound() {
        let a = vec2(0.0, 0.0);
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        let theta = 0.1;
        let cloud =
            cone_cloud(&a, &v, 0.05, theta, 4, 5, &DomainPredicate::full(), 0).unwrap();
        for s in &cloud {
            let dist = v.distance(&s.point.sub(&a)).unwrap();
            assert!(dist <= theta * s.radius * (1.0 + 1e-12));
            assert!((s.aperture_ratio - dist / s.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn cloud_domain_filter_keeps_exactly_members() {
        let a = vec2(0.0, 0.0);
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        let domain = DomainPredicate::new(|x| x[0] > 0.0);
        let cloud = cone_cloud(&a, &v, 0.1, 0.2, 2, 3, &domain, 0).unwrap();
        assert!(!cloud.is_empty());
        for s in &cloud {
            assert!(s.point[0] > 0.0);
        }
        let unfiltered =
            cone_cloud(&a, &v, 0.1, 0.2, 2, 3, &DomainPredicate::full(), 0).unwrap();
        let positive = unfiltered.iter().filter(|s| s.point[0] > 0.0).count();
        assert_eq!(cloud.len(), positive);
    }

    #[test]
    fn cloud_radius_in_dyadic_shell() {
        let a = vec2(0.0, 0.0);
        let v = Subspace::full(2);
        let delta = 0.08;
        let cloud =
            cone_cloud(&a, &v, delta, 0.3, 4, 3, &DomainPredicate::full(), 1).unwrap();
        for s in &cloud {
            assert!(s.radius >= 0.5 * delta - 1e-15 && s.radius <= delta + 1e-15);
        }
    }

    #[test]
    fn cloud_errors_when_domain_starves_it() {
        let a = vec2(0.0, 0.0);
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        let domain = DomainPredicate::new(|_| false);
        let err = cone_cloud(&a, &v, 0.1, 0.2, 4, 3, &domain, 0);
        match err {
            Err(Error::InsufficientSamples { survivors, .. }) => assert_eq!(survivors, 0),
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
    }

    #[test]
    fn cloud_is_deterministic() {
        let a = vec2(0.1, 0.2);
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 1.0)]).unwrap();
        let c1 = cone_cloud(&a, &v, 0.05, 0.1, 6, 4, &DomainPredicate::full(), 42).unwrap();
        let c2 = cone_cloud(&a, &v, 0.05, 0.1, 6, 4, &DomainPredicate::full(), 42).unwrap();
        let s1 = serde_json::to_string(&c1).unwrap();
        let s2 = serde_json::to_string(&c2).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn max_aperture_shrinks_with_theta() {
        let a = vec2(0.0, 0.0);
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        let mut last = f64::INFINITY;
        for theta in [0.4, 0.1, 0.01, 0.001] {
            let cloud =
                cone_cloud(&a, &v, 0.1, theta, 4, 4, &DomainPredicate::full(), 0).unwrap();
            let max = cloud.iter().map(|s| s.aperture_ratio).fold(0.0, f64::max);
            assert!(max <= theta * (1.0 + 1e-12));
            assert!(max < last);
            last = max;
        }
    }
}
