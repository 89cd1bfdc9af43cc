//! The online-to-nonconvex conversion loop.
//!
//! Each iteration moves `xₙ = xₙ₋₁ + Δₙ`, queries the stochastic gradient at
//! the midpoint `wₙ = xₙ₋₁ + ½Δₙ`, builds the next hint at the extrapolated
//! point `zₙ = xₙ + ½Δₙ` with the same sample, and hands both to the online
//! learner. Iterations are grouped into `K` episodes of length `T`; each
//! episode yields an averaged iterate `w̄ᵏ`, a comparator `uᵏ` and its regret.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{NoiseModel, ProblemInstance, StochasticOracle};
use crate::vector::{self, Vector};

/// Relative slack allowed on `‖Δ‖ ≤ D` for floating-point projection.
pub const BALL_TOLERANCE: f64 = 1e-12;

/// Default cap on stored iteration records.
pub const DEFAULT_MAX_TRACE: usize = 100_000;

/// An online linear-optimization learner over the ball `‖Δ‖ ≤ D`.
///
/// The engine calls `init` once, then for every iteration `observe(gₙ)`
/// followed by `propose(hₙ₊₁)`. `episode_boundary` is called before the first
/// iteration of every episode after the first.
pub trait Learner {
    fn name(&self) -> &'static str;

    /// Whether the learner consumes hints. When `false` the engine skips the
    /// extrapolated gradient query and records `h = 0`.
    fn uses_hints(&self) -> bool {
        true
    }

    /// Returns `Δ₁` given the first hint `h₁`.
    fn init(&mut self, h1: &Vector, radius: f64) -> Vector;

    fn observe(&mut self, g: &Vector);

    /// Step size the next `propose` will use.
    fn step_size(&self) -> f64;

    /// Returns `Δₙ₊₁` given the hint `hₙ₊₁`.
    fn propose(&mut self, h_next: &Vector) -> Vector;

    fn episode_boundary(&mut self);
}

impl<L: Learner + ?Sized> Learner for &mut L {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn uses_hints(&self) -> bool {
        (**self).uses_hints()
    }
    fn init(&mut self, h1: &Vector, radius: f64) -> Vector {
        (**self).init(h1, radius)
    }
    fn observe(&mut self, g: &Vector) {
        (**self).observe(g)
    }
    fn step_size(&self) -> f64 {
        (**self).step_size()
    }
    fn propose(&mut self, h_next: &Vector) -> Vector {
        (**self).propose(h_next)
    }
    fn episode_boundary(&mut self) {
        (**self).episode_boundary()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Output is the averaged iterate with the smallest true gradient norm.
    Deterministic,
    /// Output is a uniformly sampled averaged iterate.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Iteration budget `M`.
    pub budget: usize,
    /// `K`
    pub episodes: usize,
    /// `T`
    pub episode_length: usize,
    /// `D`
    pub radius: f64,
    pub mode: Mode,
    /// Seed for stochastic output selection.
    pub seed: u64,
    /// Full traces are kept up to this many iterations; longer runs keep
    /// every `⌈M / max_trace⌉`-th record.
    pub max_trace: usize,
}

impl EngineConfig {
    /// `K = ⌊M/T⌋`.
    pub fn from_budget(budget: usize, episode_length: usize, radius: f64, mode: Mode) -> Result<Self> {
        if episode_length == 0 {
            return Err(Error::InvalidConfig("episode length T must be >= 1".into()));
        }
        let cfg = EngineConfig {
            budget,
            episodes: budget / episode_length,
            episode_length,
            radius,
            mode,
            seed: 0,
            max_trace: DEFAULT_MAX_TRACE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.episodes == 0 || self.episode_length == 0 {
            return fail(format!(
                "need K >= 1 and T >= 1, got K = {}, T = {}",
                self.episodes, self.episode_length
            ));
        }
        match self.episodes.checked_mul(self.episode_length) {
            Some(kt) if kt <= self.budget => {}
            _ => {
                return fail(format!(
                    "K*T = {}*{} exceeds budget M = {}",
                    self.episodes, self.episode_length, self.budget
                ))
            }
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return fail(format!("radius D must be > 0, got {}", self.radius));
        }
        if self.max_trace == 0 {
            return fail("max_trace must be >= 1".into());
        }
        Ok(())
    }

    /// Number of executed iterations `K·T`.
    pub fn iterations(&self) -> usize {
        self.episodes * self.episode_length
    }

    pub fn trace_stride(&self) -> usize {
        let m = self.budget.max(1);
        if m <= self.max_trace {
            1
        } else {
            m.div_ceil(self.max_trace)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub x_prev: Vector,
    pub delta: Vector,
    pub x: Vector,
    pub w: Vector,
    pub z: Vector,
    pub g: Vector,
    pub h: Vector,
    /// Step size after observing `gₙ`, i.e. the one that produces `Δₙ₊₁`.
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub k: usize,
    pub grad_sum: Vector,
    pub comparator: Vector,
    pub w_bar: Vector,
    pub regret: f64,
    /// `‖∇F(w̄ᵏ)‖` with the exact gradient.
    pub grad_norm_at_wbar: f64,
    /// `F` at the last iterate of the episode.
    pub f_end: f64,
    /// Step size before the episode's first observation.
    pub eta_start: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_mean: f64,
    /// `Σ ‖gₙ − hₙ‖²` over the episode.
    pub error_sq_sum: f64,
    /// `Σ ‖Δₙ − Δₙ₋₁‖²` over the episode, excluding `n = 1`.
    pub delta_change_sq_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub optimizer: String,
    pub problem: String,
    pub config: EngineConfig,
    pub noise: NoiseModel,
    pub x0: Vector,
    pub f0: f64,
    pub trace_stride: usize,
    pub trace: Vec<IterationRecord>,
    pub episodes: Vec<EpisodeRecord>,
    /// 1-based index of the selected episode.
    pub selected_episode: usize,
    pub output: Vector,
    pub final_x: Vector,
    pub gradient_calls: u64,
    /// Filled in by callers that have a clock.
    pub wall_time_secs: f64,
}

impl RunResult {
    /// `(1/K) Σₖ ‖∇F(w̄ᵏ)‖`.
    pub fn mean_grad_norm(&self) -> f64 {
        let k = self.episodes.len().max(1) as f64;
        self.episodes.iter().map(|e| e.grad_norm_at_wbar).sum::<f64>() / k
    }

    /// Total shifting regret `Σₖ Regᵏ`.
    pub fn total_regret(&self) -> f64 {
        self.episodes.iter().map(|e| e.regret).sum()
    }

    pub fn selected(&self) -> &EpisodeRecord {
        &self.episodes[self.selected_episode - 1]
    }
}

/// `uᵏ = −D Σgₙ / ‖Σgₙ‖`, or `0` when the sum vanishes.
pub fn comparator(grad_sum: &[f64], radius: f64) -> Vector {
    let n = vector::norm(grad_sum);
    if n > 0.0 {
        let s = -radius / n;
        grad_sum.iter().map(|g| s * g).collect::<Vec<_>>().into()
    } else {
        Vector::zeros(grad_sum.len())
    }
}

/// One episode's gradients, directions and comparator.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSlice {
    pub g: Vec<Vector>,
    pub delta: Vec<Vector>,
    pub u: Vector,
}

/// `Σₖ Σₙ ⟨gₙ, Δₙ − uᵏ⟩`.
pub fn shifting_regret(episodes: &[EpisodeSlice]) -> Result<f64> {
    let t = match episodes.first() {
        Some(e) => e.g.len(),
        None => return Ok(0.0),
    };
    let mut total = 0.0;
    for (k, e) in episodes.iter().enumerate() {
        if e.g.len() != t || e.delta.len() != t {
            return Err(Error::LengthMismatch(format!(
                "episode {} has {} gradients and {} directions, expected {}",
                k + 1,
                e.g.len(),
                e.delta.len(),
                t
            )));
        }
        for (g, d) in e.g.iter().zip(&e.delta) {
            g.check_dim(d.dim())?;
            e.u.check_dim(d.dim())?;
            total += g
                .iter()
                .zip(d.iter())
                .zip(e.u.iter())
                .map(|((g, d), u)| g * (d - u))
                .sum::<f64>();
        }
    }
    Ok(total)
}

/// `w̄ = (1/T) Σ wₙ`.
pub fn episode_average<'a, I>(ws: I) -> Result<Vector>
where
    I: IntoIterator<Item = &'a Vector>,
{
    vector::mean(ws.into_iter().map(|w| w.as_slice()))
}

/// 0-based index of the output episode.
///
/// Deterministic mode picks the smallest `grad_norm_at_wbar` (first on
/// ties); stochastic mode draws uniformly from a ChaCha stream keyed by
/// `seed`.
pub fn select_output_index(episodes: &[EpisodeRecord], mode: Mode, seed: u64) -> Result<usize> {
    if episodes.is_empty() {
        return Err(Error::EmptyInput("episode list"));
    }
    Ok(match mode {
        Mode::Deterministic => {
            let mut best = 0;
            for (i, e) in episodes.iter().enumerate() {
                if e.grad_norm_at_wbar < episodes[best].grad_norm_at_wbar {
                    best = i;
                }
            }
            best
        }
        Mode::Stochastic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            rng.random_range(0..episodes.len())
        }
    })
}

pub fn select_output(episodes: &[EpisodeRecord], mode: Mode, seed: u64) -> Result<Vector> {
    let i = select_output_index(episodes, mode, seed)?;
    Ok(episodes[i].w_bar.clone())
}

/// Running sums for the current episode.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeAccumulator {
    k: usize,
    len: usize,
    grad_sum: Vector,
    w_sum: Vector,
    /// `Σ ⟨gₙ, Δₙ⟩`
    linear_loss: f64,
    eta_start: f64,
    eta_min: f64,
    eta_max: f64,
    eta_sum: f64,
    error_sq_sum: f64,
    delta_change_sq_sum: f64,
}

impl EpisodeAccumulator {
    pub(crate) fn new(k: usize, dim: usize, eta_start: f64) -> Self {
        EpisodeAccumulator {
            k,
            len: 0,
            grad_sum: Vector::zeros(dim),
            w_sum: Vector::zeros(dim),
            linear_loss: 0.0,
            eta_start,
            eta_min: f64::INFINITY,
            eta_max: f64::NEG_INFINITY,
            eta_sum: 0.0,
            error_sq_sum: 0.0,
            delta_change_sq_sum: 0.0,
        }
    }

    pub(crate) fn push(&mut self, w: &[f64], delta: &[f64], g: &[f64], h: &[f64], eta: f64, delta_change_sq: f64) {
        self.len += 1;
        for i in 0..g.len() {
            self.grad_sum[i] += g[i];
            self.w_sum[i] += w[i];
        }
        self.linear_loss += vector::dot(g, delta);
        self.eta_min = self.eta_min.min(eta);
        self.eta_max = self.eta_max.max(eta);
        self.eta_sum += eta;
        self.error_sq_sum += g
            .iter()
            .zip(h)
            .map(|(g, h)| (g - h) * (g - h))
            .sum::<f64>();
        self.delta_change_sq_sum += delta_change_sq;
    }

    pub(crate) fn finish(self, p: &ProblemInstance, radius: f64, x_end: &[f64]) -> Result<EpisodeRecord> {
        let t = self.len as f64;
        let w_bar = self.w_sum.scaled(1.0 / t);
        let u = comparator(&self.grad_sum, radius);
        let regret = self.linear_loss - self.grad_sum.dot(&u);
        let grad_norm_at_wbar = p.eval_grad(&w_bar)?.norm();
        Ok(EpisodeRecord {
            k: self.k,
            grad_sum: self.grad_sum,
            comparator: u,
            w_bar,
            regret,
            grad_norm_at_wbar,
            f_end: p.eval_f(x_end)?,
            eta_start: self.eta_start,
            eta_min: self.eta_min,
            eta_max: self.eta_max,
            eta_mean: self.eta_sum / t,
            error_sq_sum: self.error_sq_sum,
            delta_change_sq_sum: self.delta_change_sq_sum,
        })
    }
}

fn check_ball(delta: &Vector, radius: f64, iteration: usize) -> Result<()> {
    let norm = delta.norm();
    if norm > radius * (1.0 + BALL_TOLERANCE) || !norm.is_finite() {
        return Err(Error::ContractViolation {
            iteration,
            norm,
            radius,
        });
    }
    Ok(())
}

fn check_finite(v: &Vector, iteration: usize) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { iteration })
    }
}

/// Runs `K·T` iterations of the conversion loop with `learner`.
pub fn run<L: Learner + ?Sized>(
    p: &ProblemInstance,
    nm: &NoiseModel,
    cfg: &EngineConfig,
    learner: &mut L,
) -> Result<RunResult> {
    cfg.validate()?;
    let dim = p.dim();
    let radius = cfg.radius;
    let stride = cfg.trace_stride();
    let hints = learner.uses_hints();
    let mut oracle = StochasticOracle::new(p, *nm);

    let mut x = p.x0.clone();
    let f0 = p.eval_f(&x)?;
    let mut h = if hints {
        oracle.grad(&x, 0)?
    } else {
        Vector::zeros(dim)
    };
    check_finite(&h, 0)?;
    let mut delta = learner.init(&h, radius);
    delta.check_dim(dim)?;

    let mut trace = Vec::with_capacity(cfg.iterations().div_ceil(stride).min(cfg.max_trace + 1));
    let mut episodes = Vec::with_capacity(cfg.episodes);
    let mut prev_delta: Option<Vector> = None;
    let mut n = 0usize;

    for k in 1..=cfg.episodes {
        if k > 1 {
            learner.episode_boundary();
        }
        let mut acc = EpisodeAccumulator::new(k, dim, learner.step_size());
        for _ in 0..cfg.episode_length {
            n += 1;
            check_ball(&delta, radius, n)?;
            let x_prev = x;
            x = x_prev.add_scaled(1.0, &delta);
            let w = x_prev.add_scaled(0.5, &delta);
            let z = x.add_scaled(0.5, &delta);
            let g = oracle.grad(&w, n as u64)?;
            check_finite(&g, n)?;
            let h_next = if hints {
                oracle.grad(&z, n as u64)?
            } else {
                Vector::zeros(dim)
            };
            check_finite(&h_next, n)?;

            learner.observe(&g);
            let eta = learner.step_size();
            let change = match &prev_delta {
                Some(d) => delta.distance_sq(d),
                None => 0.0,
            };
            acc.push(&w, &delta, &g, &h, eta, change);

            let next = learner.propose(&h_next);
            next.check_dim(dim)?;
            if (n - 1).is_multiple_of(stride) {
                trace.push(IterationRecord {
                    n,
                    x_prev,
                    delta: delta.clone(),
                    x: x.clone(),
                    w,
                    z,
                    g,
                    h,
                    eta,
                });
            }
            prev_delta = Some(core::mem::replace(&mut delta, next));
            h = h_next;
        }
        episodes.push(acc.finish(p, radius, &x)?);
    }

    let idx = select_output_index(&episodes, cfg.mode, cfg.seed)?;
    Ok(RunResult {
        optimizer: learner.name().into(),
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
