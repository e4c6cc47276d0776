//! Black-box functions and domain membership predicates.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Membership test for the domain A ⊆ ℝᵐ of a function. Must be
/// deterministic: repeated calls with the same point agree.
#[derive(Clone)]
pub struct DomainPredicate {
    test: Arc<dyn Fn(&Vector) -> bool + Send + Sync>,
}

impl DomainPredicate {
    pub fn new<F>(test: F) -> Self
    where
        F: Fn(&Vector) -> bool + Send + Sync + 'static,
    {
        Self { test: Arc::new(test) }
    }

    /// The whole space: every point is a member.
    pub fn full() -> Self {
        Self::new(|_| true)
    }

    /// Open ball of radius `r` around `center`.
    pub fn ball(center: Vector, r: f64) -> Self {
        Self::new(move |x| x.sub(&center).norm() < r)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        (self.test)(x)
    }

    /// Intersection of two predicates.
    pub fn intersect(&self, other: &DomainPredicate) -> DomainPredicate {
        let a = self.clone();
        let b = other.clone();
        DomainPredicate::new(move |x| a.contains(x) && b.contains(x))
    }
}

impl fmt::Debug for DomainPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DomainPredicate")
    }
}

/// A deterministic, pure function f: A ⊆ ℝᵐ → ℝⁿ evaluated point-wise.
#[derive(Clone)]
pub struct BlackBoxFn {
    input_dim: usize,
    output_dim: usize,
    domain: DomainPredicate,
    eval: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
}

impl BlackBoxFn {
    pub fn new<F>(input_dim: usize, output_dim: usize, eval: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Self { input_dim, output_dim, domain: DomainPredicate::full(), eval: Arc::new(eval) }
    }

    pub fn with_domain(mut self, domain: DomainPredicate) -> Self {
        self.domain = domain;
        self
    }

    /// Scalar-valued convenience constructor.
    pub fn scalar<F>(input_dim: usize, eval: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        Self::new(input_dim, 1, move |x| {
            Vector::from_dvector(nalgebra::DVector::from_element(1, eval(x)))
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn domain(&self) -> &DomainPredicate {
        &self.domain
    }

    /// Evaluates at `x`, checking input dimension and output shape.
    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.dim() });
        }
        let y = (self.eval)(x);
        if y.dim() != self.output_dim {
            return Err(Error::DimensionMismatch { expected: self.output_dim, got: y.dim() });
        }
        Ok(y)
    }

    /// Evaluation without shape checks, for hot loops over validated points.
    pub fn eval_unchecked(&self, x: &Vector) -> Vector {
        (self.eval)(x)
    }

    /// The composition g∘f; its domain is f's domain intersected with the
    /// preimage of g's domain.
    pub fn compose(g: &BlackBoxFn, f: &BlackBoxFn) -> Result<BlackBoxFn> {
        if g.input_dim != f.output_dim {
            return Err(Error::DimensionMismatch { expected: g.input_dim, got: f.output_dim });
        }
        let gf = g.clone();
        let ff = f.clone();
        let f_domain = f.domain.clone();
        let g_domain = g.domain.clone();
        let inner = f.clone();
        Ok(BlackBoxFn {
            input_dim: f.input_dim,
            output_dim: g.output_dim,
            domain: DomainPredicate::new(move |x| {
                f_domain.contains(x) && g_domain.contains(&inner.eval_unchecked(x))
            }),
            eval: Arc::new(move |x| gf.eval_unchecked(&ff.eval_unchecked(x))),
        })
    }

    /// Pointwise scaling c·f.
    pub fn scaled(&self, c: f64) -> BlackBoxFn {
        let f = self.clone();
        BlackBoxFn {
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            domain: self.domain.clone(),
            eval: Arc::new(move |x| f.eval_unchecked(x).scale(c)),
        }
    }
}

impl fmt::Debug for BlackBoxFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBoxFn({} -> {})", self.input_dim, self.output_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_checks_dimensions() {
        let f = BlackBoxFn::scalar(2, |x| x[0] + x[1]);
        let bad = Vector::from_slice(&[1.0]).unwrap();
        assert!(f.eval(&bad).is_err());
        let ok = Vector::from_slice(&[1.0, 2.0]).unwrap();
        assert_eq!(f.eval(&ok).unwrap()[0], 3.0);
    }

    #[test]
    fn compose_pipes_values_and_domains() {
        let f = BlackBoxFn::scalar(1, |x| x[0] * 2.0)
            .with_domain(DomainPredicate::new(|x| x[0] >= 0.0));
        let g = BlackBoxFn::scalar(1, |t| t[0] + 1.0)
            .with_domain(DomainPredicate::new(|t| t[0] <= 4.0));
        let gf = BlackBoxFn::compose(&g, &f).unwrap();
        let x = Vector::from_slice(&[1.5]).unwrap();
        assert_eq!(gf.eval(&x).unwrap()[0], 4.0);
        assert!(gf.domain().contains(&x));
        // outside f's domain
        assert!(!gf.domain().contains(&Vector::from_slice(&[-1.0]).unwrap()));
        // f maps 3.0 to 6.0, outside g's domain
        assert!(!gf.domain().contains(&Vector::from_slice(&[3.0]).unwrap()));
    }
}
