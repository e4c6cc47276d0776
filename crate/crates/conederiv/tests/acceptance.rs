//! Acceptance suite. One test per criterion; each prints a PASS line when
//! its assertions hold, so `cargo test --test acceptance -- --nocapture`
//! gives a one-line-per-criterion summary.

use conederiv::fixtures::{
    catalog, chain_cells, default_kernel_functional, dense_ray_indicator, dense_rays,
    kernel_singular, lipschitz_homogeneous, polynomial_diffeo, shear_diffeo, smooth_control,
    Diffeo, Fixture,
};
use conederiv::{
    compose_and_check, cone_growth, direction_mesh, estimate_directional, estimate_tangential,
    per_direction_profile, pullback_test, EstimatorOptions, PiecewisePath, ScaleSchedule,
    Subspace, Vector, Verdict,
};

fn pass(n: usize, name: &str) {
    println!("ACCEPTANCE {n} ({name}): PASS");
}

fn default_sched() -> ScaleSchedule {
    ScaleSchedule::new(0.1, 0.02, 0.5, 8).unwrap()
}

fn opts() -> EstimatorOptions {
    EstimatorOptions::default()
}

/// Criterion 1: the homogeneous singularity separates the two notions —
/// directionally flat, tangentially divergent — for every α and dimension.
#[test]
fn criterion_01_directional_tangential_separation() {
    let sched = default_sched();
    let opts = opts();
    for m in [2usize, 3] {
        for alpha in [0.25, 0.5, 1.0] {
            let fx = kernel_singular(m, &default_kernel_functional(m), alpha).unwrap();
            let dir =
                estimate_directional(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
            assert_eq!(
                dir.verdict,
                Verdict::Differentiable,
                "m={m} alpha={alpha} directional: {}",
                dir.reason
            );
            assert!(
                dir.map.operator_norm() < 1e-6,
                "m={m} alpha={alpha}: directional map norm {}",
                dir.map.operator_norm()
            );
            let tan =
                estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
            assert_eq!(
                tan.verdict,
                Verdict::Divergent,
                "m={m} alpha={alpha} tangential: {}",
                tan.reason
            );
        }
    }
    pass(1, "directional vs tangential separation");
}

/// Criterion 2: fixed-aperture cone growth recovers the singularity
/// exponent as a log-log slope.
#[test]
fn criterion_02_growth_exponent_recovery() {
    let sched = default_sched();
    let opts = opts();
    for m in [2usize, 3] {
        for alpha in [0.25, 0.5] {
            let fx = kernel_singular(m, &default_kernel_functional(m), alpha).unwrap();
            let report = cone_growth(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
            let slope = report.slope.expect("positive growth ratios");
            assert!(
                (slope + alpha).abs() <= 0.1,
                "m={m} alpha={alpha}: slope {slope} not within 0.1 of {}",
                -alpha
            );
        }
    }
    pass(2, "growth exponent recovery");
}

/// Criterion 3: smooth controls are fitted to their symbolic derivative and
/// their residual curves keep contracting.
#[test]
fn criterion_03_smooth_soundness() {
    let sched = default_sched();
    let opts = opts();
    for id in ["sin-quadratic", "polynomial", "exp-mix"] {
        let fx = smooth_control(id).unwrap();
        let est = estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
        assert_eq!(est.verdict, Verdict::Differentiable, "{id}: {}", est.reason);
        let expected = fx.expected.map.as_ref().unwrap();
        let gap = (est.map.matrix() - expected).norm();
        let scale = expected.norm();
        assert!(
            gap <= 1e-5 * scale,
            "{id}: map gap {gap:.3e} above 1e-5 relative (scale {scale})"
        );
        let residuals: Vec<f64> = est.levels.iter().map(|l| l.residual).collect();
        let k = residuals.len();
        for i in (k - 4)..(k - 1) {
            assert!(
                residuals[i] >= 1.5 * residuals[i + 1],
                "{id}: residuals {residuals:?} do not contract by 1.5 at level {i}"
            );
        }
    }
    pass(3, "smooth soundness");
}

/// Criterion 4: the 2×2 outcome table — verdicts agree on the Lipschitz
/// control and split on the singular one.
#[test]
fn criterion_04_lipschitz_equivalence() {
    let sched = default_sched();
    let opts = opts();

    let fx = lipschitz_homogeneous();
    let dir = estimate_directional(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
    let tan = estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
    assert_eq!(dir.verdict, Verdict::Differentiable, "{}", dir.reason);
    assert_eq!(tan.verdict, Verdict::Differentiable, "{}", tan.reason);
    assert!(dir.map.operator_norm() <= 1e-5);
    assert!(tan.map.operator_norm() <= 1e-5);

    let fx = kernel_singular(2, &default_kernel_functional(2), 0.5).unwrap();
    let dir = estimate_directional(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
    let tan = estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
    assert_eq!(dir.verdict, Verdict::Differentiable);
    assert_eq!(tan.verdict, Verdict::Divergent);
    pass(4, "Lipschitz equivalence table");
}

/// Criterion 5: on the five-cell matrix the chain condition holds exactly
/// when the composite estimate is differentiable with the product map, and
/// both sufficient branches (Lipschitz outer function, injective inner
/// derivative) produce Holds.
#[test]
fn criterion_05_chain_rule_iff() {
    let sched = default_sched();
    let opts = opts();
    for cell in chain_cells() {
        let report =
            compose_and_check(&cell.f, &cell.g, &cell.base, &cell.subspace, &sched, &opts)
                .unwrap();
        assert_eq!(
            report.chain.holds, cell.expected_holds,
            "{}: chain condition said {} ({})",
            cell.name, report.chain.holds, report.chain.reason
        );
        assert_eq!(
            report.composite_matches, cell.expected_holds,
            "{}: composite route said {}",
            cell.name, report.composite_matches
        );
        assert!(report.iff_consistent, "{}: the two routes disagree", cell.name);
        match cell.name.as_str() {
            // Lipschitz outer function branch
            "beta2-abs" => assert!(report.g_lipschitz.bounded, "abs must probe as Lipschitz"),
            // injective inner derivative branch empties the co-filter
            "shear-smooth" => {
                assert!(report.injective && report.min_gain > 0.5);
                assert!(report.chain.levels.iter().all(|l| l.survivors == 0));
            }
            _ => {}
        }
    }
    pass(5, "chain-rule iff matrix");
}

fn diffeos_for(m: usize) -> Vec<Diffeo> {
    if m == 2 {
        vec![shear_diffeo(), polynomial_diffeo(2, 11)]
    } else {
        vec![polynomial_diffeo(m, 11), polynomial_diffeo(m, 29)]
    }
}

/// Criterion 6: verdicts are invariant under diffeomorphism transport and
/// the fitted maps transport consistently on differentiable fixtures.
#[test]
fn criterion_06_diffeomorphism_invariance() {
    let sched = ScaleSchedule::new(0.1, 0.02, 0.5, 16).unwrap();
    let opts = opts();
    for fx in catalog() {
        let base = estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts)
            .unwrap();
        for diffeo in diffeos_for(fx.f.input_dim()) {
            let t = diffeo.transport(&fx.f, &fx.base_point, &fx.subspace).unwrap();
            let moved =
                estimate_tangential(&t.function, &t.base, &t.subspace, &sched, &opts).unwrap();
            assert_eq!(
                moved.verdict, base.verdict,
                "{} through {}: {} vs {} ({})",
                fx.name, diffeo.name, moved.verdict, base.verdict, moved.reason
            );
            if base.verdict == Verdict::Differentiable {
                let expected = t.transport_map(&base.map).unwrap();
                let gap = moved.map.distance_to(&expected).unwrap();
                let tol = 1e-5 * base.map.operator_norm().max(1.0);
                assert!(
                    gap <= tol,
                    "{} through {}: transported map gap {gap:.3e} > {tol:.1e}",
                    fx.name,
                    diffeo.name
                );
            }
        }
    }
    pass(6, "diffeomorphism invariance");
}

/// Deterministic generator of admissible knot sequences with a pinned
/// (colinear) final knot so the linear extension joins C¹.
fn random_admissible_path(seed: u64) -> PiecewisePath {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = move || {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    };
    let m = 2 + (next() * 2.0) as usize;
    let depth = 6 + (next() * 6.0) as usize;
    let t0 = 0.5 + 0.5 * next();
    let ratio = 0.35 + 0.3 * next();
    let a = Vector::new((0..m).map(|_| 2.0 * next() - 1.0).collect()).unwrap();
    let v = Vector::new((0..m).map(|_| next() - 0.5).collect()).unwrap().normalized().unwrap();
    let mut w = Vector::new((0..m).map(|_| next() - 0.5).collect()).unwrap();
    w = w.sub(&v.scale(v.dot(&w)));
    let w = w.normalized().unwrap_or_else(|| v.clone());
    let mut knots_t = Vec::new();
    let mut knots_x = Vec::new();
    let mut t = t0;
    for n in 0..depth {
        let eps = if n == depth - 1 { 0.0 } else { 0.1 * ratio.powi(n as i32) };
        knots_t.push(t);
        knots_x.push(a.add(&v.scale(t)).add(&w.scale(t * eps)));
        t *= ratio * (0.85 + 0.3 * next());
    }
    PiecewisePath::new(a, knots_t, knots_x, v).unwrap()
}

/// Criterion 7: the interpolation path hits its knots, joins C¹, carries
/// the prescribed velocity at every knot, and collapses on colinear data.
#[test]
fn criterion_07_path_construction() {
    for seed in 0..50u64 {
        let p = random_admissible_path(seed);
        let h = 1e-7;
        for (t, x) in p.knot_times().to_vec().iter().zip(p.knot_points().to_vec()) {
            let got = p.eval(*t).unwrap();
            assert!(
                got.sub(&x).norm() <= 1e-13 * (1.0 + x.norm()),
                "seed {seed}: knot not reproduced"
            );
            let d = p.derivative(*t).unwrap();
            assert_eq!(d, p.velocity().clone(), "seed {seed}: knot velocity must be exact");
            if *t + h <= p.t0() {
                let fd = p.eval(t + h).unwrap().sub(&got).scale(1.0 / h);
                assert!(fd.sub(&d).norm() <= 1e-5, "seed {seed}: right difference at knot");
            }
            let fd = got.sub(&p.eval(t - h).unwrap()).scale(1.0 / h);
            assert!(fd.sub(&d).norm() <= 1e-5, "seed {seed}: left difference at knot");
        }
        for i in 0..40 {
            let t = p.t0() * (0.01 + 0.98 * i as f64 / 39.0);
            let fd = p.eval(t + h).unwrap().sub(&p.eval(t - h).unwrap()).scale(0.5 / h);
            let d = p.derivative(t).unwrap();
            assert!(fd.sub(&d).norm() <= 1e-5, "seed {seed}: central difference at t={t}");
        }
    }
    // colinear knots reproduce the ray
    for seed in 100..120u64 {
        let mut state = seed;
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
        };
        let a = Vector::from_slice(&[next() - 0.5, next() - 0.5]).unwrap();
        let v = Vector::from_slice(&[next() - 0.5, next() - 0.5])
            .unwrap()
            .normalized()
            .unwrap();
        let knots_t: Vec<f64> = (0..8).map(|n| 0.9 * 0.6_f64.powi(n)).collect();
        let knots_x: Vec<Vector> = knots_t.iter().map(|t| a.add(&v.scale(*t))).collect();
        let p = PiecewisePath::new(a.clone(), knots_t, knots_x, v.clone()).unwrap();
        for i in 0..50 {
            let t = p.t0() * i as f64 / 49.0;
            let got = p.eval(t).unwrap();
            let want = a.add(&v.scale(t));
            assert!(got.sub(&want).norm() <= 1e-14 * (1.0 + want.norm()));
        }
    }
    pass(7, "path construction");
}

/// Builds ten admissible paths through a fixture's base point with spread
/// aperture-decay exponents: slow decays can expose divergence, fast decays
/// can certify convergence.
fn pullback_paths(fx: &Fixture, t0: f64, depth: usize) -> Vec<PiecewisePath> {
    let dirs = direction_mesh(&fx.subspace, 3, 1);
    let mut paths = Vec::new();
    for j in 0..10 {
        let v = dirs[j % dirs.len()].clone();
        let perp = direction_mesh(&Subspace::line(&v).unwrap().complement(), 2, 2);
        let w = perp[j % perp.len()].clone();
        let gamma = 0.05 + 0.1 * j as f64;
        let mut knots_t = Vec::new();
        let mut knots_x = Vec::new();
        for n in 0..depth {
            let t = t0 * 0.5_f64.powi(n as i32);
            let s = 0.5 * (t / t0).powf(gamma);
            knots_t.push(t);
            knots_x.push(fx.base_point.add(&v.scale(t)).add(&w.scale(t * s)));
        }
        paths.push(PiecewisePath::new(fx.base_point.clone(), knots_t, knots_x, v).unwrap());
    }
    paths
}

/// Criterion 8: the independent test modes are mutually consistent on every
/// fixture — transported-directional and per-direction profiles confirm
/// every differentiable verdict, and at least one mode falsifies every
/// non-differentiable one.
#[test]
fn criterion_08_characterization_coherence() {
    let sched = ScaleSchedule::new(0.1, 0.02, 0.5, 12).unwrap();
    let opts = opts();
    for fx in catalog() {
        let direct =
            estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts).unwrap();
        let differentiable = direct.verdict == Verdict::Differentiable;

        // (ii) transported directional estimate
        let diffeo = diffeos_for(fx.f.input_dim()).remove(0);
        let t = diffeo.transport(&fx.f, &fx.base_point, &fx.subspace).unwrap();
        let transported =
            estimate_directional(&t.function, &t.base, &t.subspace, &sched, &opts).unwrap();

        // (iv) per-direction profile over a mesh of the subspace
        let dirs = direction_mesh(&fx.subspace, 4, 0);
        let profile =
            per_direction_profile(&fx.f, &fx.base_point, &fx.subspace, &dirs, &sched, &opts)
                .unwrap();

        if differentiable {
            assert_eq!(
                transported.verdict,
                Verdict::Differentiable,
                "{}: transported directional must confirm ({})",
                fx.name,
                transported.reason
            );
            assert!(
                profile.all_differentiable(),
                "{}: every ray must confirm differentiability",
                fx.name
            );
            let lin = profile.linearity_residual.unwrap();
            assert!(lin <= 1e-3, "{}: profile nonlinearity {lin:.3e}", fx.name);
            let gap = profile.best_fit.distance_to(&direct.map).unwrap();
            assert!(gap <= 1e-3, "{}: profile fit differs from the estimate ({gap:.3e})", fx.name);
        } else {
            let some_bad = profile
                .entries
                .iter()
                .any(|e| e.verdict != Some(Verdict::Differentiable));
            assert!(
                some_bad,
                "{}: a non-differentiable verdict needs a falsifying ray",
                fx.name
            );
        }

        // (iii) pullback over ten admissible paths
        let mut some_divergent = false;
        let mut some_confirm = false;
        for path in pullback_paths(&fx, 0.1, sched.levels() + 2) {
            let report = pullback_test(&fx.f, &path, &direct.map, &sched, &opts).unwrap();
            match report.verdict {
                Verdict::Divergent => some_divergent = true,
                Verdict::Differentiable => some_confirm = true,
                Verdict::Inconclusive => {}
            }
        }
        if differentiable {
            assert!(
                !some_divergent && some_confirm,
                "{}: pullback paths must confirm a differentiable verdict",
                fx.name
            );
        } else {
            assert!(
                some_divergent,
                "{}: pullback paths must expose a non-differentiable verdict",
                fx.name
            );
        }
    }
    pass(8, "characterization coherence");
}

/// Criterion 9: per-direction certificates along the enumerated rays do not
/// imply subspace differentiability — every ray of the dense-ray fixture
/// reports derivative zero while the tangential estimate refuses.
#[test]
fn criterion_09_dense_ray_counterexample() {
    let opts = opts();
    let fx = dense_ray_indicator(2, 6, 0).unwrap();
    // apertures below the narrowest enumerated cone half-width 2^{-7}
    let ray_sched = ScaleSchedule::new(0.1, 0.004, 0.5, 8).unwrap();
    let rays = dense_rays(6, 0);
    let profile =
        per_direction_profile(&fx.f, &fx.base_point, &fx.subspace, &rays, &ray_sched, &opts)
            .unwrap();
    for entry in &profile.entries {
        assert_eq!(
            entry.verdict,
            Some(Verdict::Differentiable),
            "ray {:?} must certify",
            entry.direction.as_slice()
        );
        assert!(entry.value.as_ref().unwrap().norm() <= 1e-9);
    }
    assert!(profile.linearity_residual.unwrap() <= 1e-9);

    let tan = estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &default_sched(), &opts)
        .unwrap();
    assert_ne!(tan.verdict, Verdict::Differentiable, "{}", tan.reason);
    pass(9, "dense-ray counterexample");
}

/// Criterion 10: identical inputs produce byte-identical serialized reports.
#[test]
fn criterion_10_determinism() {
    let sched = default_sched();
    let opts = opts();
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let mut lines = Vec::new();
            for fx in catalog() {
                let checks = fx.run_checks(&sched, &opts).unwrap();
                lines.push(serde_json::to_string(&checks).unwrap());
                let est =
                    estimate_tangential(&fx.f, &fx.base_point, &fx.subspace, &sched, &opts)
                        .unwrap();
                lines.push(serde_json::to_string(&est).unwrap());
            }
            let cell = &chain_cells()[0];
            let report =
                compose_and_check(&cell.f, &cell.g, &cell.base, &cell.subspace, &sched, &opts)
                    .unwrap();
            lines.push(serde_json::to_string(&report).unwrap());
            lines.join("\n")
        })
        .collect();
    assert_eq!(runs[0], runs[1], "suite reruns must serialize identically");
    pass(10, "determinism");
}

/// The fixture matrix itself is the regression suite: every expectation in
/// the catalog reproduces under default options.
#[test]
fn fixture_catalog_expectations_hold() {
    let sched = default_sched();
    let opts = opts();
    for fx in catalog() {
        for check in fx.run_checks(&sched, &opts).unwrap() {
            assert!(check.passed, "{} / {}: {}", fx.name, check.name, check.detail);
        }
    }
}
