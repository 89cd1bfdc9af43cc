//! The online doubly optimistic gradient learner.
//!
//! Given the hint `hₙ₊₁` (the gradient at the extrapolated point
//! `zₙ = xₙ + ½Δₙ`) and the last observed error `gₙ − hₙ`, the next direction
//! is
//!
//! ```text
//! Δₙ₊₁ = Π_{‖Δ‖≤D}(Δₙ − ηₙ hₙ₊₁ − ηₙ (gₙ − hₙ))
//! ```
//!
//! with `Δ₁ = argmin_{‖Δ‖≤D} ⟨h₁, Δ⟩`. The step size is either constant or
//! the per-episode adaptive rule `ηₙ = γD / √(α + Σᵢ ‖gᵢ − hᵢ‖²)`, whose sum
//! runs over the errors observed so far in the current episode.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::engine::Learner;
use crate::error::{Error, Result};
use crate::problems::StochasticOracle;
use crate::vector::Vector;

/// Default `γ = √(3/2)`, the minimizer of `3/(2γ) + γ`.
pub const DEFAULT_GAMMA: f64 = 1.224_744_871_391_589; // sqrt(1.5)

/// Relative scale of the default `α = 1e−12 · (L1·D)²`.
pub const DEFAULT_ALPHA_SCALE: f64 = 1e-12;

/// Euclidean projection onto the ball of radius `radius`.
pub fn project_ball(v: &[f64], radius: f64) -> Vector {
    let n = crate::vector::norm(v);
    if n <= radius {
        Vector::from(v)
    } else {
        let s = radius / n;
        v.iter().map(|x| s * x).collect::<alloc::vec::Vec<_>>().into()
    }
}

/// `argmin_{‖Δ‖≤D} ⟨h₁, Δ⟩ = −D h₁/‖h₁‖`, or `0` when `h₁ = 0`.
pub fn init_delta(h1: &[f64], radius: f64) -> Vector {
    let n = crate::vector::norm(h1);
    if n > 0.0 {
        let s = -radius / n;
        h1.iter().map(|x| s * x).collect::<alloc::vec::Vec<_>>().into()
    } else {
        Vector::zeros(h1.len())
    }
}

/// The hint for the next round: `∇f(xₙ + ½Δₙ; ξₙ)`.
pub fn hint(
    oracle: &mut StochasticOracle<'_>,
    x: &[f64],
    delta: &[f64],
    sample_id: u64,
) -> Result<Vector> {
    let z = Vector::from(x).add_scaled(0.5, delta);
    oracle.grad(&z, sample_id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepSchedule {
    Constant {
        eta: f64,
    },
    Adaptive {
        gamma: f64,
        alpha: f64,
        /// `Σ ‖gᵢ − hᵢ‖²` over the errors observed in the current episode.
        accumulator: f64,
        /// Number of errors observed in the current episode.
        within_episode_index: usize,
    },
}

impl StepSchedule {
    pub fn constant(eta: f64) -> Self {
        StepSchedule::Constant { eta }
    }

    pub fn adaptive(gamma: f64, alpha: f64) -> Self {
        StepSchedule::Adaptive {
            gamma,
            alpha,
            accumulator: 0.0,
            within_episode_index: 0,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, StepSchedule::Adaptive { .. })
    }

    /// Step size for the next update.
    pub fn eta(&self, radius: f64) -> f64 {
        match self {
            StepSchedule::Constant { eta } => *eta,
            StepSchedule::Adaptive { .. } => adaptive_eta(self, radius),
        }
    }

    pub fn observe(&mut self, error_sq: f64) {
        if let StepSchedule::Adaptive {
            accumulator,
            within_episode_index,
            ..
        } = self
        {
            *accumulator += error_sq;
            *within_episode_index += 1;
        }
    }

    /// Clears the adaptive accumulator; constant schedules are unaffected.
    pub fn reset(&mut self) {
        if let StepSchedule::Adaptive {
            accumulator,
            within_episode_index,
            ..
        } = self
        {
            *accumulator = 0.0;
            *within_episode_index = 0;
        }
    }
}

/// `γD / √(α + accumulator)`. Returns `NaN` for a constant schedule.
pub fn adaptive_eta(s: &StepSchedule, radius: f64) -> f64 {
    match s {
        StepSchedule::Adaptive {
            gamma,
            alpha,
            accumulator,
            ..
        } => gamma * radius / libm::sqrt(alpha + accumulator),
        StepSchedule::Constant { .. } => f64::NAN,
    }
}

/// Learner state between rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdogState {
    pub delta: Vector,
    pub hint: Vector,
    /// `gₙ − hₙ` after the latest observation.
    pub last_error: Vector,
    pub schedule: StepSchedule,
}

impl OdogState {
    pub fn new(delta: Vector, hint: Vector, schedule: StepSchedule) -> Self {
        let dim = delta.dim();
        OdogState {
            delta,
            hint,
            last_error: Vector::zeros(dim),
            schedule,
        }
    }

    /// Records `gₙ` against the stored hint `hₙ`.
    pub fn observe(&mut self, g: &[f64]) {
        self.last_error = Vector::from(g).sub(&self.hint);
        self.schedule.observe(self.last_error.norm_sq());
    }
}

/// One optimistic step: `Δₙ₊₁ = Π(Δₙ − η hₙ₊₁ − η (gₙ − hₙ))`; stores
/// `hₙ₊₁` as the next hint.
pub fn odog_update(state: &OdogState, g: &[f64], h_next: &[f64], radius: f64) -> OdogState {
    let mut next = state.clone();
    next.observe(g);
    let eta = next.schedule.eta(radius);
    next.delta = step(&next.delta, eta, h_next, &next.last_error, radius);
    next.hint = Vector::from(h_next);
    next
}

fn step(delta: &[f64], eta: f64, h_next: &[f64], error: &[f64], radius: f64) -> Vector {
    let raw: alloc::vec::Vec<f64> = delta
        .iter()
        .zip(h_next)
        .zip(error)
        .map(|((d, h), e)| d - eta * h - eta * e)
        .collect();
    project_ball(&raw, radius)
}

/// The ODOG learner behind the engine's [`Learner`] interface.
#[derive(Debug, Clone)]
pub struct OdogLearner {
    radius: f64,
    initial_schedule: StepSchedule,
    state: Option<OdogState>,
}

impl OdogLearner {
    pub fn new(schedule: StepSchedule) -> Self {
        OdogLearner {
            radius: 0.0,
            initial_schedule: schedule,
            state: None,
        }
    }

    pub fn constant(eta: f64) -> Self {
        Self::new(StepSchedule::constant(eta))
    }

    pub fn adaptive(gamma: f64, alpha: f64) -> Self {
        Self::new(StepSchedule::adaptive(gamma, alpha))
    }

    pub fn state(&self) -> Option<&OdogState> {
        self.state.as_ref()
    }

    fn state_mut(&mut self) -> &mut OdogState {
        self.state.as_mut().expect("learner used before init")
    }
}

impl Learner for OdogLearner {
    fn name(&self) -> &'static str {
        if self.initial_schedule.is_adaptive() {
            "odog-adaptive"
        } else {
            "odog-const"
        }
    }

    fn init(&mut self, h1: &Vector, radius: f64) -> Vector {
        self.radius = radius;
        let delta = init_delta(h1, radius);
        self.state = Some(OdogState::new(delta.clone(), h1.clone(), self.initial_schedule.clone()));
        delta
    }

    fn observe(&mut self, g: &Vector) {
        self.state_mut().observe(g);
    }

    fn step_size(&self) -> f64 {
        match &self.state {
            Some(s) => s.schedule.eta(self.radius),
            None => self.initial_schedule.eta(self.radius),
        }
    }

    fn propose(&mut self, h_next: &Vector) -> Vector {
        let radius = self.radius;
        let s = self.state_mut();
        let eta = s.schedule.eta(radius);
        s.delta = step(&s.delta, eta, h_next, &s.last_error, radius);
        s.hint = h_next.clone();
        s.delta.clone()
    }

    fn episode_boundary(&mut self) {
        self.state_mut().schedule.reset();
    }
}

/// Radius, episode layout and step-size schedule for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub radius: f64,
    pub episode_length: usize,
    pub episodes: usize,
    pub schedule: StepSchedule,
}

impl HyperParams {
    /// The constant step size, if the schedule is constant.
    pub fn eta(&self) -> Option<f64> {
        match self.schedule {
            StepSchedule::Constant { eta } => Some(eta),
            StepSchedule::Adaptive { .. } => None,
        }
    }
}

fn check_common(l1: f64, l2: f64, sigma: f64, f_gap: f64, budget: usize) -> Result<()> {
    let fail = |msg: &str| Err(Error::InvalidConfig(format!("auto parameters: {msg}")));
    if !(l1 > 0.0) || !l1.is_finite() {
        return fail("L1 must be > 0");
    }
    if !(l2 >= 0.0) || !l2.is_finite() {
        return fail("L2 must be >= 0");
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return fail("sigma must be >= 0");
    }
    if !(f_gap > 0.0) || !f_gap.is_finite() {
        return fail("F(x0) - F* must be > 0");
    }
    if budget < 2 {
        return fail("budget M must be >= 2");
    }
    Ok(())
}

/// Clamps `1 ≤ T ≤ max(1, ⌊M/2⌋)`.
fn clamp_episode_length(raw: f64, budget: usize) -> usize {
    let cap = (budget / 2).max(1);
    if !raw.is_finite() || raw > cap as f64 {
        cap
    } else {
        (raw as usize).clamp(1, cap)
    }
}

fn ceil_pow(x: f64, p: f64) -> f64 {
    libm::ceil(libm::pow(x, p))
}

/// Radius, episode length, episode count and constant step size for the
/// constant-step method:
///
/// * `D = min{(2Δ_F / (33 L2^{1/5} σ^{4/5} M))^{5/7}, (2Δ_F / (15 M L1^{2/3} L2^{1/3}))^{3/7}}`,
///   first branch dropped when `σ = 0`;
/// * `T = min(max(⌈(20σ/(L2 D²))^{2/5}⌉, ⌈(10 L1/(L2 D))^{1/3}⌉), ⌊M/2⌋)`;
/// * `K = ⌊M/T⌋`, `η = 1/√(3 L1² + 12 T σ²/D²)`.
///
/// For `L2 = 0` the episode length is `⌊M/2⌋` and `D = √(Δ_F / (10 L1 K))`,
/// the minimizer of `Δ_F/(DKT) + 10 L1 D/T`.
pub fn constant_step_hyperparams(
    l1: f64,
    l2: f64,
    sigma: f64,
    f_gap: f64,
    budget: usize,
) -> Result<HyperParams> {
    check_common(l1, l2, sigma, f_gap, budget)?;
    let m = budget as f64;
    let (radius, t) = if l2 == 0.0 {
        let t = clamp_episode_length(f64::INFINITY, budget);
        let k = (budget / t) as f64;
        (libm::sqrt(f_gap / (10.0 * l1 * k)), t)
    } else {
        let deterministic = libm::pow(
            2.0 * f_gap / (15.0 * m * libm::cbrt(l1 * l1) * libm::cbrt(l2)),
            3.0 / 7.0,
        );
        let radius = if sigma > 0.0 {
            let stochastic = libm::pow(
                2.0 * f_gap / (33.0 * libm::pow(l2, 0.2) * libm::pow(sigma, 0.8) * m),
                5.0 / 7.0,
            );
            stochastic.min(deterministic)
        } else {
            deterministic
        };
        let noise_branch = ceil_pow(20.0 * sigma / (l2 * radius * radius), 0.4);
        let smooth_branch = ceil_pow(10.0 * l1 / (l2 * radius), 1.0 / 3.0);
        (radius, clamp_episode_length(noise_branch.max(smooth_branch), budget))
    };
    let eta = 1.0 / libm::sqrt(3.0 * l1 * l1 + 12.0 * t as f64 * sigma * sigma / (radius * radius));
    Ok(HyperParams {
        radius,
        episode_length: t,
        episodes: budget / t,
        schedule: StepSchedule::constant(eta),
    })
}

/// `C₁ = 3/(2γ) + γ`.
pub fn c1(gamma: f64) -> f64 {
    1.5 / gamma + gamma
}

/// `C₂ = 12/γ + 8γ + 1`.
pub fn c2(gamma: f64) -> f64 {
    12.0 / gamma + 8.0 * gamma + 1.0
}

/// Parameters for the adaptive method, with the local constant `L̂1` in place
/// of `L1`:
///
/// * `D = min{(2Δ_F / (3 M C₂^{4/5} L2^{1/5} σ^{4/5}))^{5/7}, (Δ_F / (10 M L̂1^{2/3} L2^{1/3} γ^{1/3} C₁))^{3/7}}`;
/// * `T = min(max(⌈(C₂σ/(L2 D²))^{2/5}⌉, ⌈(16 C₁^{3/2} L̂1 γ^{1/2}/(L2 D))^{1/3}⌉), ⌊M/2⌋)`;
/// * `K = ⌊M/T⌋`, schedule `adaptive(γ, α)`.
///
/// `alpha = None` selects `1e−12 (L̂1 D)²`. For `L2 = 0`, `T = ⌊M/2⌋` and
/// `D = √(Δ_F / (16 C₁^{3/2} L̂1 γ^{1/2} K))`.
pub fn adaptive_hyperparams(
    l1_hat: f64,
    l2: f64,
    sigma: f64,
    f_gap: f64,
    budget: usize,
    gamma: f64,
    alpha: Option<f64>,
) -> Result<HyperParams> {
    check_common(l1_hat, l2, sigma, f_gap, budget)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidConfig("gamma must be > 0".into()));
    }
    if let Some(a) = alpha {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidConfig("alpha must be > 0".into()));
        }
    }
    let m = budget as f64;
    let (c1, c2) = (c1(gamma), c2(gamma));
    let lipschitz_term = 16.0 * libm::pow(c1, 1.5) * l1_hat * libm::sqrt(gamma);
    let (radius, t) = if l2 == 0.0 {
        let t = clamp_episode_length(f64::INFINITY, budget);
        let k = (budget / t) as f64;
        (libm::sqrt(f_gap / (lipschitz_term * k)), t)
    } else {
        let deterministic = libm::pow(
            f_gap
                / (10.0 * m * libm::cbrt(l1_hat * l1_hat) * libm::cbrt(l2) * libm::cbrt(gamma) * c1),
            3.0 / 7.0,
        );
        let radius = if sigma > 0.0 {
            let stochastic = libm::pow(
                2.0 * f_gap / (3.0 * m * libm::pow(c2, 0.8) * libm::pow(l2, 0.2) * libm::pow(sigma, 0.8)),
                5.0 / 7.0,
            );
            stochastic.min(deterministic)
        } else {
            deterministic
        };
        let noise_branch = ceil_pow(c2 * sigma / (l2 * radius * radius), 0.4);
        let smooth_branch = ceil_pow(lipschitz_term / (l2 * radius), 1.0 / 3.0);
        (radius, clamp_episode_length(noise_branch.max(smooth_branch), budget))
    };
    let alpha = alpha.unwrap_or(DEFAULT_ALPHA_SCALE * (l1_hat * radius) * (l1_hat * radius));
    Ok(HyperParams {
        radius,
        episode_length: t,
        episodes: budget / t,
        schedule: StepSchedule::adaptive(gamma, alpha),
    })
}
