//! Runtime checks of the regret and stationarity inequalities, local
//! Lipschitz estimation and rate-slope fitting.
//!
//! Every check returns a [`BoundReport`] of the form `lhs ≤ rhs`. Per-run
//! checks allow relative slack `1e−9` and absolute slack `1e−12`; checks of
//! bounds that only hold in expectation compare a seed mean against the bound
//! plus three standard errors.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EpisodeRecord, IterationRecord, RunResult};
use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::vector::{self, Vector};

pub const REL_TOL: f64 = 1e-9;
pub const ABS_TOL: f64 = 1e-12;

/// Distances below this are skipped by the local Lipschitz estimator.
pub const MIN_DISTANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs − lhs`
    pub slack: f64,
    pub episode: Option<usize>,
    pub iteration: Option<usize>,
    pub note: String,
}

impl BoundReport {
    /// `lhs ≤ rhs + 1e−9·|rhs| + 1e−12`.
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self::with_tolerance(name, lhs, rhs, REL_TOL, ABS_TOL)
    }

    pub fn with_tolerance(name: &str, lhs: f64, rhs: f64, rel: f64, abs: f64) -> Self {
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs <= rhs + rel * rhs.abs() + abs,
            slack: rhs - lhs,
            episode: None,
            iteration: None,
            note: String::new(),
        }
    }

    pub fn at_episode(mut self, k: usize) -> Self {
        self.episode = Some(k);
        self
    }

    pub fn at_iteration(mut self, n: usize) -> Self {
        self.iteration = Some(n);
        self
    }

    pub fn note(mut self, note: String) -> Self {
        self.note = note;
        self
    }
}

/// The first unsatisfied report, or else the one with the least relative
/// slack.
pub fn worst(reports: Vec<BoundReport>) -> Option<BoundReport> {
    let key = |r: &BoundReport| r.slack / (r.rhs.abs() + r.lhs.abs()).max(1e-300);
    let mut best: Option<BoundReport> = None;
    for r in reports {
        best = Some(match best {
            None => r,
            Some(b) if !b.satisfied => b,
            Some(_) if !r.satisfied => r,
            Some(b) => {
                if key(&r) < key(&b) {
                    r
                } else {
                    b
                }
            }
        });
    }
    best
}

/// Mean and standard error over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedStats {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
}

pub fn seed_stats(samples: &[f64]) -> Result<SeedStats> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("seed samples"));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
        libm::sqrt(var / n as f64)
    } else {
        0.0
    };
    Ok(SeedStats { n, mean, std_err })
}

/// Minimum number of seeds for expectation checks.
pub const MIN_SEEDS: usize = 30;

fn seed_mean_report(name: &str, samples: &[f64], bound: f64) -> Result<BoundReport> {
    if samples.len() < MIN_SEEDS {
        return Err(Error::InvalidInput(format!(
            "{name}: expectation checks need at least {MIN_SEEDS} seeds, got {}",
            samples.len()
        )));
    }
    let s = seed_stats(samples)?;
    Ok(BoundReport::new(name, s.mean, bound + 3.0 * s.std_err).note(format!(
        "mean over {} seeds; bound {bound:.6e} + 3 SE ({:.3e})",
        s.n, s.std_err
    )))
}

fn require_contiguous(trace: &[IterationRecord]) -> Result<()> {
    for (i, r) in trace.iter().enumerate() {
        if r.n != i + 1 {
            return Err(Error::InvalidInput(
                "check needs the full iteration trace starting at n = 1".into(),
            ));
        }
    }
    Ok(())
}

/// Shifting regret against `u_list` with `(5η/2)Σ‖gₙ−hₙ‖² − (1/4η)Σ‖Δₙ−Δₙ₋₁‖²`:
///
/// `Reg ≤ 4KD²/η + (5η/2) Σₙ ‖gₙ − hₙ‖² − (1/(4η)) Σ_{n≥2} ‖Δₙ − Δₙ₋₁‖²`.
pub fn check_shifting_regret(
    trace: &[IterationRecord],
    u_list: &[Vector],
    episode_length: usize,
    eta: f64,
    radius: f64,
) -> Result<BoundReport> {
    require_contiguous(trace)?;
    let k = u_list.len();
    if k == 0 || episode_length == 0 || trace.len() != k * episode_length {
        return Err(Error::LengthMismatch(format!(
            "trace of {} iterations does not split into {k} episodes of length {episode_length}",
            trace.len()
        )));
    }
    let mut regret = 0.0;
    let mut errors = 0.0;
    let mut changes = 0.0;
    for (i, r) in trace.iter().enumerate() {
        let u = &u_list[i / episode_length];
        regret += r.g.iter().zip(r.delta.iter()).zip(u.iter()).map(|((g, d), u)| g * (d - u)).sum::<f64>();
        errors += r.g.distance_sq(&r.h);
        if i > 0 {
            changes += r.delta.distance_sq(&trace[i - 1].delta);
        }
    }
    let rhs = 4.0 * k as f64 * radius * radius / eta + 2.5 * eta * errors - changes / (4.0 * eta);
    Ok(BoundReport::new("shifting-regret", regret, rhs))
}

/// Shifting regret bound on a stored run, using its comparators and the constant step.
pub fn check_shifting_regret_run(run: &RunResult, eta: f64) -> Result<BoundReport> {
    let us: Vec<Vector> = run.episodes.iter().map(|e| e.comparator.clone()).collect();
    check_shifting_regret(&run.trace, &us, run.config.episode_length, eta, run.config.radius)
}

/// `4D²/η + (9/2)L1²ηD² + 18ηTσ²`, requiring `η ≤ 1/(√3 L1)`.
pub fn const_episode_bound(eta: f64, radius: f64, l1: f64, sigma: f64, episode_length: usize) -> Result<f64> {
    let cap = 1.0 / (libm::sqrt(3.0) * l1);
    if !(eta > 0.0) || eta > cap * (1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "episode regret bound needs 0 < eta <= 1/(sqrt(3) L1) = {cap:.6e}, got {eta:.6e}"
        )));
    }
    let d2 = radius * radius;
    Ok(4.0 * d2 / eta
        + 4.5 * l1 * l1 * eta * d2
        + 18.0 * eta * episode_length as f64 * sigma * sigma)
}

fn const_episode_note(eta: f64, sigma: f64, episode_length: usize) -> String {
    format!(
        "noise term 18*eta*T*sigma^2 = {:.6e}; with 6*eta*T*sigma^2 it would be {:.6e}",
        18.0 * eta * episode_length as f64 * sigma * sigma,
        6.0 * eta * episode_length as f64 * sigma * sigma
    )
}

/// Per-run episode regret bound for the constant step.
pub fn check_const_episode(
    regret: f64,
    eta: f64,
    radius: f64,
    l1: f64,
    sigma: f64,
    episode_length: usize,
) -> Result<BoundReport> {
    let rhs = const_episode_bound(eta, radius, l1, sigma, episode_length)?;
    Ok(BoundReport::new("episode-regret-const", regret, rhs).note(const_episode_note(eta, sigma, episode_length)))
}

/// Episode regret bound in expectation: the mean over seeds of one episode's
/// regret against the bound plus three standard errors.
pub fn check_const_episode_mean(
    regrets: &[f64],
    eta: f64,
    radius: f64,
    l1: f64,
    sigma: f64,
    episode_length: usize,
) -> Result<BoundReport> {
    let rhs = const_episode_bound(eta, radius, l1, sigma, episode_length)?;
    let r = seed_mean_report("episode-regret-const-mean", regrets, rhs)?;
    let note = format!("{}; {}", r.note, const_episode_note(eta, sigma, episode_length));
    Ok(r.note(note))
}

/// `8(3/γ+γ) D√T σ + 16(3/γ+γ)^{3/2} L̂1 γ^{1/2} D²`.
pub fn adaptive_episode_bound(gamma: f64, radius: f64, episode_length: usize, sigma: f64, l1_hat: f64) -> f64 {
    let c = 3.0 / gamma + gamma;
    8.0 * c * radius * libm::sqrt(episode_length as f64) * sigma
        + 16.0 * libm::pow(c, 1.5) * l1_hat * libm::sqrt(gamma) * radius * radius
}

fn adaptive_episode_note(gamma: f64, radius: f64, episode_length: usize, sigma: f64, l1_hat: f64) -> String {
    let c = 1.5 / gamma + gamma;
    let tight = 8.0 * c * radius * libm::sqrt(episode_length as f64) * sigma
        + 16.0 * libm::pow(c, 1.5) * l1_hat * libm::sqrt(gamma) * radius * radius;
    format!("L1_hat = {l1_hat:.6e}; with 3/(2 gamma) + gamma the bound would be {tight:.6e}")
}

pub fn check_adaptive_episode(
    regret: f64,
    gamma: f64,
    radius: f64,
    episode_length: usize,
    sigma: f64,
    l1_hat: f64,
) -> BoundReport {
    let rhs = adaptive_episode_bound(gamma, radius, episode_length, sigma, l1_hat);
    BoundReport::new("episode-regret-adaptive", regret, rhs)
        .note(adaptive_episode_note(gamma, radius, episode_length, sigma, l1_hat))
}

pub fn check_adaptive_episode_mean(
    regrets: &[f64],
    gamma: f64,
    radius: f64,
    episode_length: usize,
    sigma: f64,
    l1_hat: f64,
) -> Result<BoundReport> {
    let rhs = adaptive_episode_bound(gamma, radius, episode_length, sigma, l1_hat);
    let r = seed_mean_report("episode-regret-adaptive-mean", regrets, rhs)?;
    let note = format!("{}; {}", r.note, adaptive_episode_note(gamma, radius, episode_length, sigma, l1_hat));
    Ok(r.note(note))
}

/// `(1/K)Σ‖∇F(w̄ᵏ)‖ ≤ (F(x₀)−F*)/(DKT) + Reg/(DKT) + (L2/48)D² + (L2/2)T²D²`,
/// plus `σ/√T` when the run is noisy (then the bound holds in expectation).
pub fn check_stationarity(run: &RunResult, p: &ProblemInstance) -> BoundReport {
    let cfg = &run.config;
    let (d, k, t) = (cfg.radius, cfg.episodes as f64, cfg.episode_length as f64);
    let dkt = d * k * t;
    let sigma = run.noise.sigma;
    let mut rhs = (run.f0 - p.f_star) / dkt
        + run.total_regret() / dkt
        + p.l2 * d * d / 48.0
        + 0.5 * p.l2 * t * t * d * d;
    if sigma > 0.0 {
        rhs += sigma / libm::sqrt(t);
    }
    BoundReport::new("stationarity", run.mean_grad_norm(), rhs)
}

/// `‖∇F(w̄)‖ ≤ ‖(1/T)Σ∇F(wₙ)‖ + (L2/2)T²D²` for one episode's midpoints.
pub fn check_avg_grad(ws: &[Vector], p: &ProblemInstance, radius: f64) -> Result<BoundReport> {
    let t = ws.len();
    let w_bar = vector::mean(ws.iter().map(|w| w.as_slice()))?;
    let mut gsum = Vector::zeros(p.dim());
    for w in ws {
        let g = p.eval_grad(w)?;
        gsum = gsum.add_scaled(1.0, &g);
    }
    let lhs = p.eval_grad(&w_bar)?.norm();
    let tf = t as f64;
    let rhs = gsum.norm() / tf + 0.5 * p.l2 * tf * tf * radius * radius;
    Ok(BoundReport::new("avg-grad", lhs, rhs))
}

/// The averaged-gradient bound for every episode of a run with a full trace.
pub fn check_avg_grad_run(run: &RunResult, p: &ProblemInstance) -> Result<Vec<BoundReport>> {
    require_contiguous(&run.trace)?;
    let t = run.config.episode_length;
    let mut out = Vec::with_capacity(run.episodes.len());
    for (i, chunk) in run.trace.chunks(t).enumerate() {
        let ws: Vec<Vector> = chunk.iter().map(|r| r.w.clone()).collect();
        out.push(check_avg_grad(&ws, p, run.config.radius)?.at_episode(i + 1));
    }
    Ok(out)
}

/// `F(xₙ) − F(xₙ₋₁) ≤ ⟨∇F(wₙ), Δₙ⟩ + L2 D³/48` for every stored iteration.
pub fn check_conversion_steps(trace: &[IterationRecord], p: &ProblemInstance, radius: f64) -> Result<Vec<BoundReport>> {
    let cubic = p.l2 * radius * radius * radius / 48.0;
    trace
        .iter()
        .map(|r| {
            let lhs = p.eval_f(&r.x)? - p.eval_f(&r.x_prev)?;
            let rhs = p.eval_grad(&r.w)?.dot(&r.delta) + cubic;
            Ok(BoundReport::new("conversion-step", lhs, rhs).at_iteration(r.n))
        })
        .collect()
}

/// `‖wₙ − zₙ₋₁‖ = ½‖Δₙ − Δₙ₋₁‖` within `1e−12`, and (exact gradients only)
/// `‖gₙ − hₙ‖ ≤ L1 ‖wₙ − zₙ₋₁‖`, for `n ≥ 2`.
pub fn check_hint_geometry(trace: &[IterationRecord], l1: Option<f64>) -> Result<Vec<BoundReport>> {
    require_contiguous(trace)?;
    let mut geometry = Vec::new();
    let mut lipschitz = Vec::new();
    for pair in trace.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let gap = cur.w.distance(&prev.z);
        let half_change = 0.5 * cur.delta.distance(&prev.delta);
        geometry.push(
            BoundReport::with_tolerance("hint-geometry", libm::fabs(gap - half_change), 1e-12, 0.0, 0.0)
                .at_iteration(cur.n),
        );
        if let Some(l1) = l1 {
            lipschitz.push(BoundReport::new("hint-error", cur.g.distance(&cur.h), l1 * gap).at_iteration(cur.n));
        }
    }
    let mut out = Vec::new();
    out.extend(worst(geometry));
    out.extend(worst(lipschitz));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLipschitzEstimate {
    pub value: f64,
    /// Iteration attaining the maximum; `0` when no iteration was usable.
    pub argmax_iteration: usize,
    pub usable: usize,
}

impl LocalLipschitzEstimate {
    pub fn is_empty(&self) -> bool {
        self.usable == 0
    }
}

fn local_l1_from<F>(trace: &[IterationRecord], mut ratio_num: F) -> Result<LocalLipschitzEstimate>
where
    F: FnMut(&IterationRecord, &IterationRecord) -> Result<f64>,
{
    require_contiguous(trace)?;
    let mut est = LocalLipschitzEstimate {
        value: 0.0,
        argmax_iteration: 0,
        usable: 0,
    };
    for pair in trace.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let gap = cur.w.distance(&prev.z);
        if gap < MIN_DISTANCE {
            continue;
        }
        est.usable += 1;
        let ratio = ratio_num(prev, cur)? / gap;
        if ratio > est.value {
            est.value = ratio;
            est.argmax_iteration = cur.n;
        }
    }
    Ok(est)
}

/// `L̂1 = max ‖gₙ − hₙ‖ / ‖wₙ − zₙ₋₁‖` over `n ≥ 2`, skipping near-zero
/// distances.
pub fn estimate_local_l1(trace: &[IterationRecord]) -> Result<LocalLipschitzEstimate> {
    local_l1_from(trace, |_, cur| Ok(cur.g.distance(&cur.h)))
}

/// As [`estimate_local_l1`] but with exact gradients `∇F(wₙ)` and `∇F(zₙ₋₁)`,
/// for noisy runs.
pub fn estimate_local_l1_exact(trace: &[IterationRecord], p: &ProblemInstance) -> Result<LocalLipschitzEstimate> {
    local_l1_from(trace, |prev, cur| Ok(p.eval_grad(&cur.w)?.distance(&p.eval_grad(&prev.z)?)))
}

/// Per-episode [`estimate_local_l1`]; pairs straddling an episode boundary
/// count towards the later episode.
pub fn local_l1_per_episode(
    trace: &[IterationRecord],
    episode_length: usize,
    exact: Option<&ProblemInstance>,
) -> Result<Vec<LocalLipschitzEstimate>> {
    require_contiguous(trace)?;
    if episode_length == 0 {
        return Err(Error::InvalidInput("episode length must be >= 1".into()));
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start < trace.len() {
        let end = (start + episode_length).min(trace.len());
        let lo = start.saturating_sub(1);
        let window = &trace[lo..end];
        let est = local_l1_from_window(window, exact)?;
        out.push(est);
        start = end;
    }
    Ok(out)
}

fn local_l1_from_window(window: &[IterationRecord], exact: Option<&ProblemInstance>) -> Result<LocalLipschitzEstimate> {
    let mut est = LocalLipschitzEstimate {
        value: 0.0,
        argmax_iteration: 0,
        usable: 0,
    };
    for pair in window.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let gap = cur.w.distance(&prev.z);
        if gap < MIN_DISTANCE {
            continue;
        }
        let num = match exact {
            Some(p) => p.eval_grad(&cur.w)?.distance(&p.eval_grad(&prev.z)?),
            None => cur.g.distance(&cur.h),
        };
        est.usable += 1;
        if num / gap > est.value {
            est.value = num / gap;
            est.argmax_iteration = cur.n;
        }
    }
    Ok(est)
}

/// `‖g_fd − ∇F(x)‖ / max(‖∇F(x)‖, ‖g_fd‖)` with central differences of
/// step `delta`.
pub fn gradient_check_error(p: &ProblemInstance, x: &[f64], delta: f64) -> Result<f64> {
    let g = p.eval_grad(x)?;
    let fd = p.finite_diff_grad(x, delta)?;
    let scale = g.norm().max(fd.norm()).max(f64::MIN_POSITIVE);
    Ok(g.distance(&fd) / scale)
}

/// Least-squares slope of `ln(value)` against `ln(M)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(m, v)| !(m > 0.0) || !(v > 0.0) || !m.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidInput("slope fit needs positive finite values".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope fit needs at least two distinct budgets".into()));
    }
    Ok(sxy / sxx)
}

/// `(√Σa, Σᵢ aᵢ/√(Σ_{j≤i} aⱼ), 2√Σa)`; terms with a zero prefix sum count
/// as zero.
pub fn prefix_root_terms(a: &[f64]) -> (f64, f64, f64) {
    let mut prefix = 0.0;
    let mut middle = 0.0;
    for &x in a {
        prefix += x;
        if prefix > 0.0 {
            middle += x / libm::sqrt(prefix);
        }
    }
    let root = libm::sqrt(prefix);
    (root, middle, 2.0 * root)
}

/// `((a+b)², 2·min{(a+b)², a²} + 2b²)`
pub fn split_square_sides(a: f64, b: f64) -> (f64, f64) {
    let s = (a + b) * (a + b);
    (s, 2.0 * s.min(a * a) + 2.0 * b * b)
}

/// Randomized checks of the two helper inequalities over `instances` draws
/// each. Returns the worst report for the prefix-root lower bound, its upper
/// bound and the split-square bound, each noting the violation count.
pub fn inequality_oracles(instances: usize, seed: u64) -> Vec<BoundReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = Vec::with_capacity(instances);
    let mut upper = Vec::with_capacity(instances);
    let mut c2 = Vec::with_capacity(instances);
    for i in 0..instances {
        let len = rng.random_range(1..=64);
        let scale = libm::pow(10.0, rng.random_range(-6.0..6.0));
        let a: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    scale * rng.random::<f64>()
                }
            })
            .collect();
        let (lo, mid, hi) = prefix_root_terms(&a);
        lower.push(BoundReport::new("prefix-root-lower", lo, mid).at_iteration(i));
        upper.push(BoundReport::new("prefix-root-upper", mid, hi).at_iteration(i));

        let s = libm::pow(10.0, rng.random_range(-6.0..6.0));
        let a = s * (2.0 * rng.random::<f64>() - 1.0);
        let b = s * (2.0 * rng.random::<f64>() - 1.0);
        let (l, r) = split_square_sides(a, b);
        c2.push(BoundReport::new("split-square", l, r).at_iteration(i));
    }
    [lower, upper, c2]
        .into_iter()
        .filter_map(|rs| {
            let violations = rs.iter().filter(|r| !r.satisfied).count();
            let n = rs.len();
            worst(rs).map(|w| w.note(format!("{violations} violations in {n} instances")))
        })
        .collect()
}

/// Whether every episode's regret satisfies the per-run constant-step bound.
pub fn const_episode_reports(
    episodes: &[EpisodeRecord],
    eta: f64,
    radius: f64,
    l1: f64,
    episode_length: usize,
) -> Result<Vec<BoundReport>> {
    episodes
        .iter()
        .map(|e| Ok(check_const_episode(e.regret, eta, radius, l1, 0.0, episode_length)?.at_episode(e.k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, delta: f64, g: f64, h: f64) -> IterationRecord {
        let v = |x: f64| Vector::from([x]);
        IterationRecord {
            n,
            x_prev: v(0.0),
            delta: v(delta),
            x: v(delta),
            w: v(0.5 * delta),
            z: v(1.5 * delta),
            g: v(g),
            h: v(h),
            eta: 1.0,
        }
    }

    #[test]
    fn report_tolerance() {
        assert!(BoundReport::new("x", 1.0 + 1e-10, 1.0).satisfied);
        assert!(!BoundReport::new("x", 1.0 + 1e-8, 1.0).satisfied);
        assert!(BoundReport::new("x", 5e-13, 0.0).satisfied);
        let r = BoundReport::new("x", 1.0, 3.0);
        assert_eq!(r.slack, 2.0);
    }

    #[test]
    fn shifting_regret_zero() {
        let trace = [rec(1, -1.0, 1.0, 1.0)];
        let r = check_shifting_regret(&trace, &[Vector::from([-1.0])], 1, 0.5, 1.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.satisfied);
    }

    #[test]
    fn shifting_regret_negative_control() {
        // Δ points along the gradient for 100 rounds, against u = −D.
        let trace: Vec<_> = (1..=100).map(|n| rec(n, 1.0, 1.0, 1.0)).collect();
        let r = check_shifting_regret(&trace, &[Vector::from([-1.0])], 100, 1.0, 1.0).unwrap();
        assert_eq!(r.lhs, 200.0);
        assert!(!r.satisfied);
    }

    #[test]
    fn const_episode_arithmetic() {
        let eta = 1.0 / libm::sqrt(3.0);
        let r = check_const_episode(0.0, eta, 1.0, 1.0, 0.0, 16).unwrap();
        let want = 4.0 * libm::sqrt(3.0) + 1.5 * libm::sqrt(3.0);
        assert!((r.rhs - want).abs() < 1e-12);
        let noisy = check_const_episode(0.0, eta, 1.0, 1.0, 1.0, 16).unwrap();
        assert!((noisy.rhs - r.rhs - 18.0 * eta * 16.0).abs() < 1e-12);
        // Step-size condition violated.
        assert!(matches!(
            check_const_episode(0.0, 1.0, 1.0, 1.0, 0.0, 4),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn adaptive_episode_arithmetic() {
        assert!((adaptive_episode_bound(1.0, 1.0, 9, 0.0, 1.0) - 128.0).abs() < 1e-12);
        let g = libm::sqrt(1.5);
        assert!(adaptive_episode_bound(g, 1.0, 9, 0.3, 2.0) < adaptive_episode_bound(3.0, 1.0, 9, 0.3, 2.0));
    }

    #[test]
    fn seed_mean_needs_enough_seeds() {
        assert!(check_adaptive_episode_mean(&[0.0; 5], 1.0, 1.0, 4, 1.0, 1.0).is_err());
        let r = check_adaptive_episode_mean(&[1.0; 30], 1.0, 1.0, 4, 0.0, 1.0).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn local_l1_degenerate_trace_is_empty() {
        let trace: Vec<_> = (1..=5).map(|n| rec(n, 0.3, 1.0, 1.0)).collect();
        let mut t = trace.clone();
        // All Δ equal, and w = z_prev.
        for r in &mut t {
            r.x_prev = Vector::from([0.0]);
            r.w = Vector::from([0.15]);
            r.z = Vector::from([0.15]);
        }
        let e = estimate_local_l1(&t).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn slope_examples() {
        let c = 3.7;
        let pts: Vec<_> = [8.0, 10.0, 12.0]
            .iter()
            .map(|&e| (libm::exp2(e), c * libm::exp2(-e * 4.0 / 7.0)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() + 4.0 / 7.0).abs() < 1e-12);
        let flat = [(1.0, 2.0), (2.0, 2.0), (4.0, 2.0)];
        assert!(loglog_slope(&flat).unwrap().abs() < 1e-15);
        let pts: Vec<_> = [100.0, 400.0, 1600.0, 6400.0]
            .iter()
            .map(|&m| (m, 0.5 * libm::pow(m, -2.0 / 7.0)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() + 2.0 / 7.0).abs() < 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn helper_inequality_examples() {
        let (lo, mid, hi) = prefix_root_terms(&[1.0; 4]);
        assert_eq!((lo, hi), (2.0, 4.0));
        assert!((mid - (1.0 + 1.0 / libm::sqrt(2.0) + 1.0 / libm::sqrt(3.0) + 0.5)).abs() < 1e-15);
        assert!(lo <= mid && mid <= hi);
        let (lo, mid, hi) = prefix_root_terms(&[5.0]);
        assert!((lo - libm::sqrt(5.0)).abs() < 1e-15 && (mid - lo).abs() < 1e-15);
        assert!((hi - 2.0 * libm::sqrt(5.0)).abs() < 1e-15);
        assert_eq!(split_square_sides(1.0, -1.0), (0.0, 2.0));
    }
}
