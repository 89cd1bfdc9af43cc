use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::problems::{Objective, ProblemInstance};
use crate::vector::{dot, norm, Vector};

/// `max |φ'''|` for `φ(z) = log(1 + e^{−z})`.
const LOGISTIC_THIRD_DERIVATIVE_BOUND: f64 = 0.096_225_044_864_937_64; // 1/(6√3)

/// `F(x) = (1/n) Σᵢ log(1 + exp(−yᵢ aᵢᵀx)) + (μ/2)‖x‖²` on synthetic data.
///
/// Features are standard normal, labels come from a random planted separator
/// with 10% label flips. `L1 = λmax(AᵀA)/(4n) + μ` and
/// `L2 = (1/(6√3)) (1/n) Σᵢ ‖aᵢ‖³`.
#[derive(Debug, Clone, PartialEq)]
pub struct Logistic {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    mu: f64,
    dim: usize,
}

impl Logistic {
    pub fn synthetic(dim: usize, samples: usize, mu: f64, data_seed: u64) -> Result<Self> {
        if dim == 0 || samples == 0 {
            return Err(Error::InvalidInput("logistic needs dim >= 1 and samples >= 1".into()));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput("logistic regularization mu must be > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let planted: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut features = Vec::with_capacity(samples);
        let mut labels = Vec::with_capacity(samples);
        for _ in 0..samples {
            let a: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let flip: f64 = rand_distr::Uniform::new(0.0, 1.0).unwrap().sample(&mut rng);
            let mut y = if dot(&a, &planted) >= 0.0 { 1.0 } else { -1.0 };
            if flip < 0.1 {
                y = -y;
            }
            features.push(a);
            labels.push(y);
        }
        Ok(Logistic { features, labels, mu, dim })
    }

    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    /// `λmax(AᵀA)/(4n) + μ`; the eigenvalue is a power-iteration estimate
    /// inflated by a relative margin so that it stays an upper bound.
    pub fn l1(&self) -> f64 {
        let n = self.samples() as f64;
        let mut v = alloc::vec![1.0 / libm::sqrt(self.dim as f64); self.dim];
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let mut w = alloc::vec![0.0; self.dim];
            for a in &self.features {
                let s = dot(a, &v);
                w.iter_mut().zip(a).for_each(|(wi, ai)| *wi += s * ai);
            }
            let nw = norm(&w);
            if nw == 0.0 {
                break;
            }
            let next = nw;
            w.iter_mut().for_each(|wi| *wi /= nw);
            v = w;
            if libm::fabs(next - lambda) <= 1e-14 * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda * (1.0 + 1e-6) / (4.0 * n) + self.mu
    }

    pub fn l2(&self) -> f64 {
        let n = self.samples() as f64;
        let cubes: f64 = self
            .features
            .iter()
            .map(|a| {
                let r = norm(a);
                r * r * r
            })
            .sum();
        LOGISTIC_THIRD_DERIVATIVE_BOUND * cubes / n
    }

    /// Lower bound from gradient descent run to `‖∇F‖ ≤ 1e−10`, corrected by
    /// the strong-convexity gap `‖∇F‖²/(2μ)`.
    pub fn lower_bound(&self, l1: f64) -> f64 {
        let mut x = alloc::vec![0.0; self.dim];
        let step = 1.0 / l1;
        for _ in 0..1_000_000 {
            let g = self.gradient(&x);
            if g.norm() <= 1e-10 {
                break;
            }
            x.iter_mut().zip(g.iter()).for_each(|(xi, gi)| *xi -= step * gi);
        }
        let g = self.gradient(&x);
        self.value(&x) - g.norm_sq() / (2.0 * self.mu)
    }

    pub fn instance(self, x0: Vector) -> Result<ProblemInstance> {
        let l1 = self.l1();
        let l2 = self.l2();
        let f_star = self.lower_bound(l1);
        ProblemInstance::new("logistic", Arc::new(self), l1, l2, f_star, x0)
    }
}

/// `log(1 + e^{−z})` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        libm::log1p(libm::exp(-z))
    } else {
        -z + libm::log1p(libm::exp(z))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.samples() as f64;
        let loss: f64 = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(a, y)| softplus_neg(y * dot(a, x)))
            .sum();
        loss / n + 0.5 * self.mu * dot(x, x)
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        let n = self.samples() as f64;
        let mut g: Vec<f64> = x.iter().map(|xi| self.mu * xi).collect();
        for (a, y) in self.features.iter().zip(&self.labels) {
            // d/dz log(1 + e^{−z}) = −σ(−z)
            let coef = -y * sigmoid(-y * dot(a, x)) / n;
            g.iter_mut().zip(a).for_each(|(gi, ai)| *gi += coef * ai);
        }
        g.into()
    }

    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Option<Vector> {
        let n = self.samples() as f64;
        let mut out: Vec<f64> = v.iter().map(|vi| self.mu * vi).collect();
        for (a, y) in self.features.iter().zip(&self.labels) {
            let s = sigmoid(y * dot(a, x));
            let coef = s * (1.0 - s) * dot(a, v) / n;
            out.iter_mut().zip(a).for_each(|(oi, ai)| *oi += coef * ai);
        }
        Some(out.into())
    }
}
