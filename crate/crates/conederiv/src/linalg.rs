//! Vectors, subspaces in orthonormal-basis form, and linear maps acting on
//! subspace coordinates.
//!
//! A [`Subspace`] stores an m×k matrix with orthonormal columns; projections
//! and distances are plain matrix products. A [`LinearMap`] acts on the
//! k-dimensional coordinate vector of its domain subspace, so the domain
//! restriction is structural: callers project ambient vectors first.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric;

/// Tolerance for the orthonormality invariant of stored bases.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;
/// Rank cutoff applied when reducing spanning sets.
pub const RANK_TOL: f64 = 1e-10;

/// A point or direction in ℝᵐ with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    coords: DVector<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { context: "vector coordinates" });
        }
        Ok(Self { coords: DVector::from_vec(coords) })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// Wraps a nalgebra vector without the finiteness check. Intended for
    /// closures that are known to produce finite values on their domain;
    /// estimators re-validate ratios downstream.
    pub fn from_dvector(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: DVector::zeros(dim) }
    }

    /// Standard basis vector eᵢ of ℝᵐ.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = 1.0;
        Self { coords: v }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.coords.dot(&other.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector { coords: &self.coords * c }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector { coords: &self.coords + &other.coords }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector { coords: &self.coords - &other.coords }
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n > 0.0 {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.coords.iter())
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Vector::new(coords).map_err(D::Error::custom)
    }
}

/// A linear subspace V ⊆ ℝᵐ stored by an orthonormal basis (m×k, k may be 0).
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Builds a subspace from an already orthonormal basis, checking the
    /// invariant basisᵀ·basis = I within `ORTHONORMALITY_TOL`.
    pub fn from_orthonormal_basis(ambient_dim: usize, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, got: basis.nrows() });
        }
        if basis.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { context: "subspace basis" });
        }
        let k = basis.ncols();
        if k > ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, got: k });
        }
        let gram = basis.transpose() * &basis;
        let eye = DMatrix::<f64>::identity(k, k);
        if (gram - eye).norm() > ORTHONORMALITY_TOL * (k.max(1) as f64) {
            return Err(Error::InvalidParameter("basis columns are not orthonormal".into()));
        }
        Ok(Self { ambient_dim, basis })
    }

    /// Reduces a spanning set to an orthonormal basis of its span. Rank
    /// deficiency is resolved at `RANK_TOL`; the empty set spans {0}.
    pub fn orthonormalize(ambient_dim: usize, spanning: &[Vector]) -> Result<Self> {
        for v in spanning {
            if v.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: v.dim() });
            }
        }
        if spanning.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        let mat = DMatrix::from_fn(ambient_dim, spanning.len(), |i, j| spanning[j][i]);
        Self::from_span_matrix(mat)
    }

    /// Orthonormal basis of the column span of `mat` (m×N, N arbitrary).
    pub fn from_span_matrix(mat: DMatrix<f64>) -> Result<Self> {
        let ambient_dim = mat.nrows();
        if mat.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { context: "spanning vectors" });
        }
        if mat.ncols() == 0 {
            return Ok(Self::zero(ambient_dim));
        }
        let basis = numeric::span_basis(&mat, RANK_TOL);
        Self::from_orthonormal_basis(ambient_dim, basis)
    }

    /// The full space ℝᵐ.
    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: DMatrix::identity(ambient_dim, ambient_dim) }
    }

    /// The zero subspace {0} ⊂ ℝᵐ.
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: DMatrix::zeros(ambient_dim, 0) }
    }

    /// The line spanned by `v` ({0} when v = 0).
    pub fn line(v: &Vector) -> Result<Self> {
        Self::orthonormalize(v.dim(), std::slice::from_ref(v))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_column(&self, j: usize) -> Vector {
        Vector::from_dvector(self.basis.column(j).into_owned())
    }

    /// Orthogonal projection P_V(u) = B·Bᵀ·u.
    pub fn project(&self, u: &Vector) -> Result<Vector> {
        self.check_dim(u)?;
        Ok(Vector::from_dvector(&self.basis * (self.basis.transpose() * u.as_dvector())))
    }

    /// Euclidean distance from `u` to the subspace, ‖u − P_V(u)‖₂.
    pub fn distance(&self, u: &Vector) -> Result<f64> {
        let p = self.project(u)?;
        Ok((u.as_dvector() - p.as_dvector()).norm())
    }

    /// Coordinates of `u` over the stored basis, Bᵀ·u (length k).
    pub fn coords_of(&self, u: &Vector) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        Ok(self.basis.transpose() * u.as_dvector())
    }

    /// Maps coordinates back to the ambient space, B·c.
    pub fn embed(&self, coords: &DVector<f64>) -> Vector {
        Vector::from_dvector(&self.basis * coords)
    }

    /// Orthogonal complement V⊥ in ℝᵐ.
    pub fn complement(&self) -> Subspace {
        let m = self.ambient_dim;
        let k = self.dim();
        if k == 0 {
            return Subspace::full(m);
        }
        if k == m {
            return Subspace::zero(m);
        }
        let basis = numeric::complement_basis(&self.basis);
        Subspace::from_orthonormal_basis(m, basis).expect("complement basis is orthonormal")
    }

    /// Whether `u` lies in the subspace within `tol` relative to its norm.
    pub fn contains(&self, u: &Vector, tol: f64) -> bool {
        match self.distance(u) {
            Ok(d) => d <= tol * u.norm().max(1.0),
            Err(_) => false,
        }
    }

    fn check_dim(&self, u: &Vector) -> Result<()> {
        if u.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: u.dim() });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr { ambient_dim: self.ambient_dim, basis: matrix_rows(&self.basis) }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SubspaceRepr::deserialize(deserializer)?;
        let basis = matrix_from_rows(repr.ambient_dim, &repr.basis).map_err(D::Error::custom)?;
        Subspace::from_orthonormal_basis(repr.ambient_dim, basis).map_err(D::Error::custom)
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub(crate) fn matrix_from_rows(nrows: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch { expected: nrows, got: rows.len() });
    }
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// A linear map L ∈ L(V, ℝⁿ) stored as an n×k matrix over V-coordinates.
///
/// The action on an ambient vector u is matrix·(Bᵀ·u); it is only meaningful
/// for u ∈ V, so callers project first.
#[derive(Clone, Debug)]
pub struct LinearMap {
    domain: Subspace,
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(domain: Subspace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: matrix.ncols() });
        }
        if matrix.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { context: "linear map matrix" });
        }
        Ok(Self { domain, matrix })
    }

    pub fn zero(domain: Subspace, output_dim: usize) -> Self {
        let k = domain.dim();
        Self { domain, matrix: DMatrix::zeros(output_dim, k) }
    }

    /// Restricts an ambient n×m matrix to the subspace: matrix = A·B.
    pub fn from_ambient_matrix(domain: Subspace, ambient: &DMatrix<f64>) -> Result<Self> {
        if ambient.ncols() != domain.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.ambient_dim(),
                got: ambient.ncols(),
            });
        }
        let matrix = ambient * domain.basis();
        Self::new(domain, matrix)
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Applies the map to an ambient vector: matrix·(Bᵀ·u).
    pub fn apply(&self, u: &Vector) -> Result<Vector> {
        let coords = self.domain.coords_of(u)?;
        Ok(self.apply_coords(&coords))
    }

    /// Applies the map to V-coordinates.
    pub fn apply_coords(&self, coords: &DVector<f64>) -> Vector {
        Vector::from_dvector(&self.matrix * coords)
    }

    /// Largest singular value of the matrix.
    pub fn operator_norm(&self) -> f64 {
        numeric::spectral_norm(&self.matrix)
    }

    /// Smallest singular value over the k-dimensional domain; positive iff
    /// the map is injective. A zero-dimensional domain is vacuously injective.
    pub fn min_gain(&self) -> f64 {
        let k = self.matrix.ncols();
        let n = self.matrix.nrows();
        if k == 0 {
            return f64::INFINITY;
        }
        if k > n {
            return 0.0;
        }
        numeric::singular_values(&self.matrix).last().copied().unwrap_or(0.0)
    }

    /// The image subspace span(L[V]) ⊆ ℝⁿ.
    pub fn image_subspace(&self) -> Subspace {
        Subspace::from_span_matrix(self.matrix.clone())
            .expect("image span matrix has finite entries")
    }

    /// The n×m matrix of the map's action on ambient vectors, matrix·Bᵀ.
    pub fn ambient_matrix(&self) -> DMatrix<f64> {
        &self.matrix * self.domain.basis().transpose()
    }

    /// Kernel of the ambient action as a subspace of ℝᵐ — the orthogonal
    /// complement of the row space.
    pub fn kernel(&self) -> Subspace {
        Subspace::from_span_matrix(self.ambient_matrix().transpose())
            .expect("row space matrix has finite entries")
            .complement()
    }

    /// Composition outer∘inner. The inner map's outputs are projected onto
    /// the outer domain's basis, matching the coordinate convention.
    pub fn compose(outer: &LinearMap, inner: &LinearMap) -> Result<LinearMap> {
        if outer.domain.ambient_dim() != inner.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: outer.domain.ambient_dim(),
                got: inner.output_dim(),
            });
        }
        let inner_in_outer_coords = outer.domain.basis().transpose() * &inner.matrix;
        let matrix = &outer.matrix * inner_in_outer_coords;
        LinearMap::new(inner.domain.clone(), matrix)
    }

    /// Operator-norm distance to another map over the same domain basis.
    pub fn distance_to(&self, other: &LinearMap) -> Result<f64> {
        if self.domain.dim() != other.domain.dim()
            || self.output_dim() != other.output_dim()
            || (self.domain.basis() - other.domain.basis()).norm() > 1e-9
        {
            return Err(Error::InvalidParameter(
                "maps must share the same domain basis for comparison".into(),
            ));
        }
        Ok(numeric::spectral_norm(&(&self.matrix - &other.matrix)))
    }
}

#[derive(Serialize, Deserialize)]
struct LinearMapRepr {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for LinearMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LinearMapRepr {
            ambient_dim: self.domain.ambient_dim(),
            basis: matrix_rows(self.domain.basis()),
            matrix: matrix_rows(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = LinearMapRepr::deserialize(deserializer)?;
        let basis = matrix_from_rows(repr.ambient_dim, &repr.basis).map_err(D::Error::custom)?;
        let domain =
            Subspace::from_orthonormal_basis(repr.ambient_dim, basis).map_err(D::Error::custom)?;
        let n = repr.matrix.len();
        let matrix = matrix_from_rows(n, &repr.matrix).map_err(D::Error::custom)?;
        LinearMap::new(domain, matrix).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vec2(x: f64, y: f64) -> Vector {
        Vector::from_slice(&[x, y]).unwrap()
    }

    #[test]
    fn rejects_non_finite_coordinates() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn orthonormalize_keeps_orthonormal_input() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        assert_eq!(v.dim(), 1);
        assert_abs_diff_eq!(v.basis()[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.basis()[(1, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn orthonormalize_reduces_colinear_span() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 1.0), vec2(2.0, 2.0)]).unwrap();
        assert_eq!(v.dim(), 1);
        let s = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(v.basis()[(0, 0)], s, epsilon = 1e-12);
        assert_abs_diff_eq!(v.basis()[(1, 0)], s, epsilon = 1e-12);
    }

    #[test]
    fn orthonormalize_empty_span_is_zero_subspace() {
        let v = Subspace::orthonormalize(2, &[]).unwrap();
        assert_eq!(v.dim(), 0);
        assert_eq!(v.ambient_dim(), 2);
    }

    #[test]
    fn orthonormalize_rejects_mixed_dimensions() {
        let err =
            Subspace::orthonormalize(2, &[Vector::from_slice(&[1.0, 0.0, 0.0]).unwrap()]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn project_onto_axis() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        let p = v.project(&vec2(3.0, 4.0)).unwrap();
        assert_abs_diff_eq!(p[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn project_onto_zero_subspace() {
        let v = Subspace::zero(2);
        let p = v.project(&vec2(3.0, 4.0)).unwrap();
        assert_eq!(p, vec2(0.0, 0.0));
    }

    #[test]
    fn project_onto_diagonal() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 1.0)]).unwrap();
        let p = v.project(&vec2(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn distance_is_pythagorean() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.distance(&vec2(3.0, 4.0)).unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn distance_to_full_space_is_zero() {
        let v = Subspace::full(2);
        assert_abs_diff_eq!(v.distance(&vec2(3.0, 4.0)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_to_diagonal() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 1.0)]).unwrap();
        let expected = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(v.distance(&vec2(1.0, 0.0)).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let l = LinearMap::new(
            Subspace::full(2),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(l.operator_norm(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_of_zero_map() {
        let l = LinearMap::zero(Subspace::full(2), 2);
        assert_eq!(l.operator_norm(), 0.0);
    }

    /// Independent oracle for the largest singular value: power iteration on
    /// MᵀM, no shared code with the implementation path.
    fn power_iteration_norm(m: &DMatrix<f64>) -> f64 {
        let gram = m.transpose() * m;
        let k = gram.nrows();
        let mut v = DVector::from_element(k, 1.0 / (k as f64).sqrt());
        for _ in 0..200 {
            let w = &gram * &v;
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            v = w / n;
        }
        (&gram * &v).norm().sqrt()
    }

    #[test]
    fn operator_norm_of_row_matches_svd_oracle() {
        let mat = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let oracle = power_iteration_norm(&mat);
        assert_abs_diff_eq!(oracle, 5.0, epsilon = 1e-9);
        let l = LinearMap::new(Subspace::full(2), mat).unwrap();
        assert_abs_diff_eq!(l.operator_norm(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn min_gain_of_identity() {
        let l = LinearMap::new(Subspace::full(2), DMatrix::identity(2, 2)).unwrap();
        assert_abs_diff_eq!(l.min_gain(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn min_gain_of_zero_map_is_zero() {
        let l = LinearMap::zero(Subspace::full(2), 3);
        assert_eq!(l.min_gain(), 0.0);
    }

    #[test]
    fn min_gain_of_diagonal() {
        let l = LinearMap::new(
            Subspace::full(2),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(l.min_gain(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn compose_matches_matrix_product() {
        let inner = LinearMap::new(
            Subspace::full(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
        )
        .unwrap();
        let outer = LinearMap::new(
            Subspace::full(2),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap();
        let c = LinearMap::compose(&outer, &inner).unwrap();
        let expected = outer.matrix() * inner.matrix();
        assert!((c.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn image_subspace_of_zero_map_is_trivial() {
        let l = LinearMap::zero(Subspace::orthonormalize(2, &[vec2(1.0, 0.0)]).unwrap(), 1);
        assert_eq!(l.image_subspace().dim(), 0);
    }

    #[test]
    fn complement_is_orthogonal_and_complementary() {
        let v = Subspace::orthonormalize(3, &[
            Vector::from_slice(&[1.0, 1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let w = v.complement();
        assert_eq!(w.dim(), 2);
        let cross = v.basis().transpose() * w.basis();
        assert!(cross.norm() < 1e-12);
    }

    #[test]
    fn subspace_json_round_trip() {
        let v = Subspace::orthonormalize(2, &[vec2(1.0, 1.0)]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"ambient_dim\":2"));
        let back: Subspace = serde_json::from_str(&json).unwrap();
        assert!((v.basis() - back.basis()).norm() < 1e-15);
    }

    #[test]
    fn linear_map_json_round_trip() {
        let l = LinearMap::new(
            Subspace::orthonormalize(2, &[vec2(0.0, 1.0)]).unwrap(),
            DMatrix::from_row_slice(2, 1, &[1.5, -2.5]),
        )
        .unwrap();
        let json = serde_json::to_string(&l).unwrap();
        let back: LinearMap = serde_json::from_str(&json).unwrap();
        assert!((l.matrix() - back.matrix()).norm() < 1e-15);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn non_orthonormal_basis_rejected_on_parse() {
        let json = r#"{"ambient_dim":2,"basis":[[1.0],[1.0]]}"#;
        assert!(serde_json::from_str::<Subspace>(json).is_err());
    }
}
