//! Reference optimizers: gradient descent, SGD, and the conversion loop
//! driven by plain projected online gradient descent.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{select_output_index, EngineConfig, EpisodeAccumulator, IterationRecord, Learner, RunResult};
use crate::error::{Error, Result};
use crate::odog::project_ball;
use crate::problems::{NoiseModel, ProblemInstance, StochasticOracle};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Gd,
    Sgd,
    O2ncOgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub eta: f64,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!("baseline step size must be > 0, got {eta}")));
        }
        Ok(BaselineConfig { kind, eta })
    }
}

/// `x − η·grad`
pub fn gd_step(x: &[f64], grad: &[f64], eta: f64) -> Vector {
    Vector::from(x).add_scaled(-eta, grad)
}

/// `Π_{‖Δ‖≤D}(Δ − η·g)`
pub fn o2nc_ogd_step(delta: &[f64], g: &[f64], eta: f64, radius: f64) -> Vector {
    project_ball(&Vector::from(delta).add_scaled(-eta, g), radius)
}

/// `1/L1`
pub fn gd_eta(l1: f64) -> f64 {
    1.0 / l1
}

/// `min(1/L1, 1/(σ√M))`
pub fn sgd_eta(l1: f64, sigma: f64, budget: usize) -> f64 {
    let base = 1.0 / l1;
    if sigma > 0.0 {
        base.min(1.0 / (sigma * libm::sqrt(budget as f64)))
    } else {
        base
    }
}

/// Projected online gradient descent, without hints. Starts from `Δ₁ = 0`.
#[derive(Debug, Clone)]
pub struct OgdLearner {
    eta: f64,
    radius: f64,
    delta: Vector,
    last_g: Vector,
}

impl OgdLearner {
    pub fn new(eta: f64) -> Self {
        OgdLearner {
            eta,
            radius: 0.0,
            delta: Vector::default(),
            last_g: Vector::default(),
        }
    }
}

impl Learner for OgdLearner {
    fn name(&self) -> &'static str {
        "o2nc-ogd"
    }

    fn uses_hints(&self) -> bool {
        false
    }

    fn init(&mut self, h1: &Vector, radius: f64) -> Vector {
        self.radius = radius;
        self.delta = Vector::zeros(h1.dim());
        self.last_g = Vector::zeros(h1.dim());
        self.delta.clone()
    }

    fn observe(&mut self, g: &Vector) {
        self.last_g = g.clone();
    }

    fn step_size(&self) -> f64 {
        self.eta
    }

    fn propose(&mut self, _h_next: &Vector) -> Vector {
        self.delta = o2nc_ogd_step(&self.delta, &self.last_g, self.eta, self.radius);
        self.delta.clone()
    }

    fn episode_boundary(&mut self) {}
}

/// Gradient descent fed by the stochastic oracle (plain GD when `σ = 0`).
///
/// The run is reported with the same episode layout as the conversion loop:
/// `w` is the query point `xₙ₋₁`, `z = xₙ`, `h = 0`, and each episode's
/// comparator uses radius `cfg.radius`. Iterates are not ball constrained.
pub fn run_gradient_descent(
    p: &ProblemInstance,
    nm: &NoiseModel,
    cfg: &EngineConfig,
    eta: f64,
    name: &str,
) -> Result<RunResult> {
    cfg.validate()?;
    BaselineConfig::new(BaselineKind::Gd, eta)?;
    let dim = p.dim();
    let stride = cfg.trace_stride();
    let mut oracle = StochasticOracle::new(p, *nm);
    let mut x = p.x0.clone();
    let f0 = p.eval_f(&x)?;
    let zero = Vector::zeros(dim);
    let mut trace = Vec::new();
    let mut episodes = Vec::with_capacity(cfg.episodes);
    let mut prev_delta: Option<Vector> = None;
    let mut n = 0usize;

    for k in 1..=cfg.episodes {
        let mut acc = EpisodeAccumulator::new(k, dim, eta);
        for _ in 0..cfg.episode_length {
            n += 1;
            let g = oracle.grad(&x, n as u64)?;
            if !g.is_finite() {
                return Err(Error::NonFinite { iteration: n });
            }
            let x_next = gd_step(&x, &g, eta);
            if !x_next.is_finite() {
                return Err(Error::NonFinite { iteration: n });
            }
            let delta = x_next.sub(&x);
            let change = match &prev_delta {
                Some(d) => delta.distance_sq(d),
                None => 0.0,
            };
            acc.push(&x, &delta, &g, &zero, eta, change);
            if (n - 1).is_multiple_of(stride) {
                trace.push(IterationRecord {
                    n,
                    x_prev: x.clone(),
                    delta: delta.clone(),
                    x: x_next.clone(),
                    w: x.clone(),
                    z: x_next.clone(),
                    g,
                    h: zero.clone(),
                    eta,
                });
            }
            prev_delta = Some(delta);
            x = x_next;
        }
        episodes.push(acc.finish(p, cfg.radius, &x)?);
    }

    let idx = select_output_index(&episodes, cfg.mode, cfg.seed)?;
    Ok(RunResult {
        optimizer: name.into(),
        problem: p.name.clone(),
        config: cfg.clone(),
        noise: *nm,
        x0: p.x0.clone(),
        f0,
        trace_stride: stride,
        trace,
        output: episodes[idx].w_bar.clone(),
        selected_episode: idx + 1,
        episodes,
        final_x: x,
        gradient_calls: oracle.calls(),
        wall_time_secs: 0.0,
    })
}
