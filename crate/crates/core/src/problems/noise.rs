//! Seeded stochastic gradient oracles.
//!
//! Noise is isotropic Gaussian `ε ~ N(0, (σ²/d) I)`, so `E‖ε‖² = σ²`. Each
//! noise vector is derived from a counter-based ChaCha stream keyed by
//! `(rng_seed, sample_id, call)`: the seed selects the key, the sample id the
//! stream, and the call index the block offset. A run therefore replays
//! bit-exactly regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problems::ProblemInstance;
use crate::vector::Vector;

/// Word offset between the noise blocks of consecutive calls; leaves 2³⁶
/// words per call and 2³² calls per stream inside ChaCha's 68-bit position.
const CALL_STRIDE_BITS: u32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Noise is a function of `(seed, sample_id)` only: evaluations that share
    /// a sample id see the identical noise vector.
    SharedSeed,
    /// Every oracle call draws an independent noise vector.
    Fresh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub mode: NoiseMode,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn deterministic() -> Self {
        NoiseModel {
            sigma: 0.0,
            mode: NoiseMode::SharedSeed,
            rng_seed: 0,
        }
    }

    pub fn shared(sigma: f64, rng_seed: u64) -> Self {
        NoiseModel {
            sigma,
            mode: NoiseMode::SharedSeed,
            rng_seed,
        }
    }

    pub fn fresh(sigma: f64, rng_seed: u64) -> Self {
        NoiseModel {
            sigma,
            mode: NoiseMode::Fresh,
            rng_seed,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma == 0.0
    }

    /// The noise vector for `(sample_id, call)`.
    pub fn noise(&self, dim: usize, sample_id: u64, call: u64) -> Vector {
        let mut out = Vector::zeros(dim);
        if self.sigma == 0.0 {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(sample_id);
        rng.set_word_pos((call as u128) << CALL_STRIDE_BITS);
        let scale = self.sigma / libm::sqrt(dim as f64);
        for v in out.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = scale * z;
        }
        out
    }
}

/// A stochastic gradient evaluation tagged with its sample identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    pub point: Vector,
    pub sample_id: u64,
    pub gradient: Vector,
}

/// `∇f(x; ξ) = ∇F(x) + ε(ξ)` with shared-seed semantics: the noise is a pure
/// function of `(sample_id, rng_seed)`.
pub fn oracle_grad(
    p: &ProblemInstance,
    nm: &NoiseModel,
    x: &[f64],
    sample_id: u64,
) -> Result<Vector> {
    let g = p.eval_grad(x)?;
    if nm.sigma == 0.0 {
        return Ok(g);
    }
    let eps = nm.noise(g.dim(), sample_id, 0);
    Ok(g.add_scaled(1.0, &eps))
}

/// Per-run oracle handle. In fresh mode it counts calls so that every call
/// gets its own noise block; in shared-seed mode it is stateless.
#[derive(Debug)]
pub struct StochasticOracle<'a> {
    problem: &'a ProblemInstance,
    noise: NoiseModel,
    calls: u64,
}

impl<'a> StochasticOracle<'a> {
    pub fn new(problem: &'a ProblemInstance, noise: NoiseModel) -> Self {
        StochasticOracle {
            problem,
            noise,
            calls: 0,
        }
    }

    pub fn problem(&self) -> &ProblemInstance {
        self.problem
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Number of gradient evaluations so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn grad(&mut self, x: &[f64], sample_id: u64) -> Result<Vector> {
        let call = match self.noise.mode {
            NoiseMode::SharedSeed => 0,
            NoiseMode::Fresh => self.calls,
        };
        self.calls += 1;
        let g = self.problem.eval_grad(x)?;
        if self.noise.sigma == 0.0 {
            return Ok(g);
        }
        let eps = self.noise.noise(g.dim(), sample_id, call);
        Ok(g.add_scaled(1.0, &eps))
    }

    pub fn sample(&mut self, x: &[f64], sample_id: u64) -> Result<OracleSample> {
        let gradient = self.grad(x, sample_id)?;
        Ok(OracleSample {
            point: x.into(),
            sample_id,
            gradient,
        })
    }
}
