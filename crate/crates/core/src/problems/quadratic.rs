use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::problems::{Objective, ProblemInstance};
use crate::vector::Vector;

/// `F(x) = ½ xᵀ diag(a) x` with `aᵢ ≥ 0`.
///
/// `L1 = max aᵢ`, `L2 = 0`, `F* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub a: Vec<f64>,
}

impl Quadratic {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::EmptyInput("quadratic curvature list"));
        }
        if a.iter().any(|&ai| !(ai >= 0.0) || !ai.is_finite()) {
            return Err(Error::InvalidInput("quadratic curvatures must be finite and >= 0".into()));
        }
        if a.iter().all(|&ai| ai == 0.0) {
            return Err(Error::InvalidInput("quadratic needs at least one positive curvature".into()));
        }
        Ok(Quadratic { a })
    }

    pub fn uniform(dim: usize, a: f64) -> Self {
        Quadratic { a: alloc::vec![a; dim] }
    }

    pub fn l1(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }

    pub fn instance(self, x0: Vector) -> Result<ProblemInstance> {
        let l1 = self.l1();
        ProblemInstance::new("quadratic", Arc::new(self), l1, 0.0, 0.0, x0)
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.a.iter().zip(x).map(|(a, xi)| a * xi * xi).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        self.a.iter().zip(x).map(|(a, xi)| a * xi).collect::<Vec<_>>().into()
    }

    fn hessian_vec(&self, _x: &[f64], v: &[f64]) -> Option<Vector> {
        Some(self.a.iter().zip(v).map(|(a, vi)| a * vi).collect::<Vec<_>>().into())
    }
}
