//! Smooth nonconvex test objectives with analytically known constants, and
//! the (stochastic) gradient oracles the optimizers query.
//!
//! Every bundled objective has a globally Lipschitz gradient (`L1`) and a
//! globally Lipschitz Hessian (`L2`), both computed from the problem
//! parameters, plus a certified lower bound `f_star` on its values.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::error::Result;
use crate::vector::Vector;

mod cosine;
mod logistic;
mod noise;
mod quadratic;
pub mod registry;

pub use cosine::CosineQuadratic;
pub use logistic::Logistic;
pub use noise::{oracle_grad, NoiseMode, NoiseModel, OracleSample, StochasticOracle};
pub use quadratic::Quadratic;
pub use registry::{build_problem, ParamMap, ParamValue, PROBLEM_NAMES};

/// A twice differentiable objective `F: ℝᵈ → ℝ`.
pub trait Objective: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// `F(x)`. Callers guarantee `x.len() == self.dim()`.
    fn value(&self, x: &[f64]) -> f64;

    /// `∇F(x)`. Callers guarantee `x.len() == self.dim()`.
    fn gradient(&self, x: &[f64]) -> Vector;

    /// Hessian-vector product `∇²F(x) v`, when the Hessian is available.
    fn hessian_vec(&self, _x: &[f64], _v: &[f64]) -> Option<Vector> {
        None
    }
}

/// An objective together with its constants and start point.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    objective: Arc<dyn Objective>,
    /// Lipschitz constant of the gradient.
    pub l1: f64,
    /// Lipschitz constant of the Hessian.
    pub l2: f64,
    /// Lower bound on `F`.
    pub f_star: f64,
    pub x0: Vector,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("l1", &self.l1)
            .field("l2", &self.l2)
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        l1: f64,
        l2: f64,
        f_star: f64,
        x0: Vector,
    ) -> Result<Self> {
        x0.check_dim(objective.dim())?;
        Ok(ProblemInstance {
            name: name.into(),
            objective,
            l1,
            l2,
            f_star,
            x0,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &dyn Objective {
        &*self.objective
    }

    pub fn with_x0(mut self, x0: Vector) -> Result<Self> {
        x0.check_dim(self.dim())?;
        self.x0 = x0;
        Ok(self)
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        crate::vector::check_dim(x, self.dim())?;
        Ok(self.objective.value(x))
    }

    pub fn eval_grad(&self, x: &[f64]) -> Result<Vector> {
        crate::vector::check_dim(x, self.dim())?;
        Ok(self.objective.gradient(x))
    }

    pub fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Result<Option<Vector>> {
        crate::vector::check_dim(x, self.dim())?;
        crate::vector::check_dim(v, self.dim())?;
        Ok(self.objective.hessian_vec(x, v))
    }

    /// Central-difference gradient `(F(x + δeᵢ) − F(x − δeᵢ)) / 2δ`.
    pub fn finite_diff_grad(&self, x: &[f64], delta: f64) -> Result<Vector> {
        crate::vector::check_dim(x, self.dim())?;
        let mut probe = x.to_vec();
        let mut out = Vector::zeros(x.len());
        for i in 0..x.len() {
            let xi = probe[i];
            probe[i] = xi + delta;
            let up = self.objective.value(&probe);
            probe[i] = xi - delta;
            let down = self.objective.value(&probe);
            probe[i] = xi;
            out[i] = (up - down) / (2.0 * delta);
        }
        Ok(out)
    }

    /// `F(x₀) − F*`.
    pub fn initial_gap(&self) -> f64 {
        self.objective.value(&self.x0) - self.f_star
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn quadratic_examples() {
        let p = Quadratic::uniform(2, 1.0).instance(Vector::zeros(2)).unwrap();
        assert_eq!(p.eval_f(&[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(p.eval_f(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.eval_grad(&[3.0, 4.0]).unwrap().as_slice(), &[3.0, 4.0]);
        assert_eq!(p.eval_grad(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
        let fd = p.finite_diff_grad(&[3.0, 4.0], 1e-5).unwrap();
        assert!((fd[0] - 3.0).abs() <= 1e-9 && (fd[1] - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn cosine_quadratic_examples() {
        let p = CosineQuadratic::uniform(1, 1.0, 1.0, 1.0)
            .instance(Vector::zeros(1))
            .unwrap();
        assert_eq!(p.eval_f(&[0.0]).unwrap(), 1.0);
        assert_eq!(p.eval_grad(&[0.0]).unwrap().as_slice(), &[0.0]);
        let fd = p.finite_diff_grad(&[1.0], 1e-5).unwrap();
        assert!((fd[0] - (1.0 - libm::sin(1.0))).abs() <= 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let p = Quadratic::uniform(2, 1.0).instance(Vector::zeros(2)).unwrap();
        assert_eq!(
            p.eval_f(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert!(p.eval_grad(&[1.0, 2.0, 3.0]).is_err());
    }
}
