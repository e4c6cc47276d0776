//! Small dense decompositions used where accuracy decides verdicts.
//!
//! nalgebra's iterative SVD mis-converges on some near-rank-deficient
//! symmetric inputs (observed: a 2×2 orthogonal projector decomposed with
//! largest singular value 1.022 and U·S·Vᵀ ≠ A), so singular values,
//! least-squares solves, and basis extraction are done here with one-sided
//! Jacobi rotations and pivoted Gram–Schmidt. Matrices in this crate are
//! tiny (dimensions ≤ ~10), so robustness beats asymptotics.

use nalgebra::{DMatrix, DVector};

/// One-sided Jacobi SVD of an m×n matrix: returns (U, σ, V) with
/// A = U·diag(σ)·Vᵀ, σ sorted descending, U m×n and V n×n with orthonormal
/// columns (U columns for σ > 0).
pub(crate) fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let mut b = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let bp = b.column(p);
                let bq = b.column(q);
                let app = bp.dot(&bp);
                let aqq = bq.dot(&bq);
                let apq = bp.dot(&bq);
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = c * bip - s * biq;
                    b[(i, q)] = s * bip + c * biq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));
    let mut u = DMatrix::zeros(m, n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_sorted = DMatrix::zeros(n, n);
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            let col = b.column(j) / s;
            u.set_column(slot, &col);
        }
        v_sorted.set_column(slot, &v.column(j).into_owned());
    }
    (u, sigma, v_sorted)
}

/// Singular values of `a`, descending.
pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    jacobi_svd(a).1
}

/// Largest singular value (0 for empty shapes).
pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Minimum-norm least-squares solution X of ‖A·X − B‖_F with singular
/// values below `tol`·σ_max treated as zero. A is m×k, B is m×n, X is k×n.
pub(crate) fn least_squares_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let k = a.ncols();
    let n = b.ncols();
    if k == 0 {
        return DMatrix::zeros(0, n);
    }
    let (u, sigma, v) = jacobi_svd(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let utb = u.transpose() * b;
    let mut scaled = DMatrix::zeros(k, n);
    for (i, s) in sigma.iter().enumerate() {
        if *s > cutoff && *s > 0.0 {
            for j in 0..n {
                scaled[(i, j)] = utb[(i, j)] / s;
            }
        }
    }
    v * scaled
}

/// Orthonormal basis of the column span of `a` by pivoted, re-orthogonalized
/// Gram–Schmidt. Columns whose residual falls under `rank_tol` times the
/// largest column norm are treated as dependent.
pub(crate) fn span_basis(a: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let m = a.nrows();
    let cols: Vec<DVector<f64>> = (0..a.ncols()).map(|j| a.column(j).into_owned()).collect();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let mut q: Vec<DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return DMatrix::zeros(m, 0);
    }
    let mut remaining: Vec<DVector<f64>> = cols;
    while q.len() < m {
        // pivot: candidate with the largest residual against the current basis
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for (i, c) in remaining.iter().enumerate() {
            let r = orthogonal_residual(c, &q);
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, bn, _)| norm > *bn) {
                best = Some((i, norm, r));
            }
        }
        let Some((i, norm, r)) = best else { break };
        if norm <= rank_tol * scale {
            break;
        }
        q.push(&r / norm);
        remaining.swap_remove(i);
    }
    let mut basis = DMatrix::from_fn(m, q.len(), |i, j| q[j][i]);
    canonicalize_signs(&mut basis);
    basis
}

/// Orthonormal extension of an already orthonormal basis to all of ℝᵐ.
pub(crate) fn complement_basis(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let m = basis.nrows();
    let k = basis.ncols();
    let mut q: Vec<DVector<f64>> = (0..k).map(|j| basis.column(j).into_owned()).collect();
    let mut extension: Vec<DVector<f64>> = Vec::with_capacity(m - k);
    while q.len() < m {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in 0..m {
            let mut e = DVector::zeros(m);
            e[j] = 1.0;
            let r = orthogonal_residual(&e, &q);
            let norm = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("m > 0");
        // some coordinate direction always has residual >= 1/sqrt(m)
        let col = &r / norm;
        q.push(col.clone());
        extension.push(col);
    }
    let mut out = DMatrix::from_fn(m, extension.len(), |i, j| extension[j][i]);
    canonicalize_signs(&mut out);
    out
}

/// Component of `c` orthogonal to the orthonormal set `q`, applied twice to
/// keep the result orthogonal to working precision.
fn orthogonal_residual(c: &DVector<f64>, q: &[DVector<f64>]) -> DVector<f64> {
    let mut r = c.clone();
    for _ in 0..2 {
        for col in q {
            let coeff = col.dot(&r);
            r -= col * coeff;
        }
    }
    r
}

/// Flips columns so the entry of largest magnitude is positive; keeps
/// reductions deterministic across runs.
pub(crate) fn canonicalize_signs(basis: &mut DMatrix<f64>) {
    for j in 0..basis.ncols() {
        let col = basis.column(j);
        let mut lead = 0.0_f64;
        for &e in col.iter() {
            if e.abs() > lead.abs() {
                lead = e;
            }
        }
        if lead < 0.0 {
            basis.column_mut(j).neg_mut();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_error(a: &DMatrix<f64>) -> f64 {
        let (u, s, v) = jacobi_svd(a);
        let mut sm = DMatrix::zeros(u.ncols(), v.ncols());
        for (i, x) in s.iter().enumerate() {
            sm[(i, i)] = *x;
        }
        let recon = &u * sm * v.transpose();
        (a - recon).norm()
    }

    /// The projector input on which nalgebra's SVD mis-converges.
    #[test]
    fn handles_near_singular_projector() {
        let b = DMatrix::from_column_slice(2, 1, &[-0.6168899600514246, 0.7870494121640346]);
        let projector = DMatrix::identity(2, 2) - &b * b.transpose();
        let s = singular_values(&projector);
        assert!((s[0] - 1.0).abs() < 1e-12, "largest singular value {:?}", s);
        assert!(s[1] < 1e-12);
        assert!(reconstruction_error(&projector) < 1e-12);
    }

    #[test]
    fn matches_known_singular_values() {
        let a = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let s = singular_values(&a);
        assert!((s[0] - 5.0).abs() < 1e-12);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let s = singular_values(&d);
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructs_random_shapes() {
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for (m, n) in [(3, 2), (2, 3), (4, 4), (5, 1), (1, 5)] {
            let a = DMatrix::from_fn(m, n, |_, _| next() * 4.0);
            assert!(
                reconstruction_error(&a) < 1e-11 * (1.0 + a.norm()),
                "reconstruction failed for {m}x{n}"
            );
        }
    }

    #[test]
    fn least_squares_matches_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0]);
        let x_true = DMatrix::from_row_slice(2, 1, &[0.7, -0.3]);
        let b = &a * &x_true;
        let x = least_squares_solve(&a, &b, 1e-12);
        assert!((x - x_true).norm() < 1e-12);
    }

    #[test]
    fn least_squares_uses_min_norm_on_rank_deficiency() {
        // columns are colinear: solution should split the coefficient
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[2.0, 2.0]);
        let x = least_squares_solve(&a, &b, 1e-10);
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn span_basis_reduces_rank_deficient_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let q = span_basis(&a, 1e-10);
        assert_eq!(q.ncols(), 1);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((q[(0, 0)] - s).abs() < 1e-12 && (q[(1, 0)] - s).abs() < 1e-12);
    }

    #[test]
    fn complement_of_awkward_line_is_orthogonal() {
        let b = DMatrix::from_column_slice(2, 1, &[-0.6168899600514246, 0.7870494121640346]);
        let c = complement_basis(&b);
        assert_eq!(c.ncols(), 1);
        let cross = b.transpose() * &c;
        assert!(cross.norm() < 1e-14, "cross talk {}", cross.norm());
        assert!((c.column(0).norm() - 1.0).abs() < 1e-14);
    }
}
