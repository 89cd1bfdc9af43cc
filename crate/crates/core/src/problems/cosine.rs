use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::problems::{Objective, ProblemInstance};
use crate::vector::Vector;

/// Separable `F(x) = Σᵢ (aᵢxᵢ²/2 + b·cos(c·xᵢ))`.
///
/// Nonconvex whenever some `aᵢ < b·c²`. The Hessian is diagonal with entries
/// `aᵢ − b·c²·cos(c·xᵢ)`, so `L1 = max aᵢ + b·c²` and `L2 = b·|c|³`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineQuadratic {
    pub a: Vec<f64>,
    pub b: f64,
    pub c: f64,
}

impl CosineQuadratic {
    pub fn new(a: Vec<f64>, b: f64, c: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::EmptyInput("cosine-quadratic curvature list"));
        }
        if a.iter().any(|&ai| !(ai > 0.0) || !ai.is_finite()) {
            return Err(Error::InvalidInput("cosine-quadratic curvatures must be finite and > 0".into()));
        }
        if !(b >= 0.0) || !b.is_finite() || !c.is_finite() {
            return Err(Error::InvalidInput("cosine-quadratic needs finite b >= 0 and finite c".into()));
        }
        Ok(CosineQuadratic { a, b, c })
    }

    pub fn uniform(dim: usize, a: f64, b: f64, c: f64) -> Self {
        CosineQuadratic { a: alloc::vec![a; dim], b, c }
    }

    pub fn l1(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max) + self.b * self.c * self.c
    }

    pub fn l2(&self) -> f64 {
        self.b * libm::fabs(self.c * self.c * self.c)
    }

    /// Certified lower bound on `F`, from per-coordinate minimization.
    pub fn lower_bound(&self) -> f64 {
        let mut total = 0.0;
        let mut cache: Vec<(f64, f64)> = Vec::new();
        for &ai in &self.a {
            let m = match cache.iter().find(|(a, _)| *a == ai) {
                Some(&(_, m)) => m,
                None => {
                    let m = coordinate_min(ai, self.b, self.c);
                    cache.push((ai, m));
                    m
                }
            };
            total += m;
        }
        total
    }

    pub fn instance(self, x0: Vector) -> Result<ProblemInstance> {
        let (l1, l2, f_star) = (self.l1(), self.l2(), self.lower_bound());
        ProblemInstance::new("cosine-quadratic", Arc::new(self), l1, l2, f_star, x0)
    }
}

/// Lower bound on `φ(t) = a t²/2 + b cos(ct)`.
///
/// When `a ≥ b c²` the function is convex with minimum `φ(0) = b`. Otherwise
/// every minimizer satisfies `a t = b c sin(ct)`, so `|t| ≤ b|c|/a`; the
/// interval is scanned on a grid, refined by golden section, and the result
/// is lowered by the worst-case curvature error of the refinement bracket.
fn coordinate_min(a: f64, b: f64, c: f64) -> f64 {
    let phi = |t: f64| 0.5 * a * t * t + b * libm::cos(c * t);
    if a >= b * c * c {
        return b;
    }
    let hi = b * libm::fabs(c) / a;
    const GRID: usize = 4096;
    let h = hi / GRID as f64;
    let mut best = (0.0, phi(0.0));
    for i in 1..=GRID {
        let t = i as f64 * h;
        let v = phi(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut lo_t, mut hi_t) = ((best.0 - h).max(0.0), (best.0 + h).min(hi));
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    for _ in 0..200 {
        let m1 = hi_t - inv_phi * (hi_t - lo_t);
        let m2 = lo_t + inv_phi * (hi_t - lo_t);
        if phi(m1) < phi(m2) {
            hi_t = m2;
        } else {
            lo_t = m1;
        }
    }
    let t = 0.5 * (lo_t + hi_t);
    let v = phi(t).min(best.1);
    // φ'' ≤ a + b c², and the bracket is below rounding, so the residual
    // error is dominated by floating point.
    let curvature = a + b * c * c;
    v - curvature * (hi_t - lo_t) * (hi_t - lo_t) - 1e-12 * (1.0 + libm::fabs(v))
}

impl Objective for CosineQuadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(x)
            .map(|(a, xi)| 0.5 * a * xi * xi + self.b * libm::cos(self.c * xi))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        let bc = self.b * self.c;
        self.a
            .iter()
            .zip(x)
            .map(|(a, xi)| a * xi - bc * libm::sin(self.c * xi))
            .collect::<Vec<_>>()
            .into()
    }

    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Option<Vector> {
        let bcc = self.b * self.c * self.c;
        Some(
            self.a
                .iter()
                .zip(x)
                .zip(v)
                .map(|((a, xi), vi)| (a - bcc * libm::cos(self.c * xi)) * vi)
                .collect::<Vec<_>>()
                .into(),
        )
    }
}
