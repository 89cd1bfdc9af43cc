//! Resolving configs into runs, executing them on a worker pool, verifying
//! the regret and stationarity bounds, and persisting the results.

use std::path::Path;
use std::time::Instant;

use odog_core::baselines::{gd_eta, run_gradient_descent, sgd_eta, OgdLearner};
use odog_core::diagnostics::{self as diag, worst, BoundReport};
use odog_core::engine::{self, EngineConfig, Mode, RunResult};
use odog_core::odog::{constant_step_hyperparams, adaptive_hyperparams, OdogLearner, StepSchedule, DEFAULT_ALPHA_SCALE, DEFAULT_GAMMA};
use odog_core::problems::{build_problem, NoiseMode, NoiseModel, ProblemInstance};
use odog_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, OptimizerKind, SweepAxis};
use crate::error::CliError;
use crate::output::{self, AggregateRow, BoundRow, SummaryRow};

/// Fully resolved parameters of one configuration point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub kind: OptimizerKind,
    pub budget: usize,
    pub sigma: f64,
    pub noise: NoiseMode,
    pub radius: f64,
    pub episode_length: usize,
    pub episodes: usize,
    /// Constant step size (ODOG constant, OGD, GD, SGD).
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub l1: f64,
    pub l1_hat: f64,
    pub max_trace: usize,
}

impl Plan {
    pub fn mode(&self) -> Mode {
        if self.sigma == 0.0 {
            Mode::Deterministic
        } else {
            Mode::Stochastic
        }
    }

    pub fn engine_config(&self, seed: u64) -> EngineConfig {
        EngineConfig {
            budget: self.budget,
            episodes: self.episodes,
            episode_length: self.episode_length,
            radius: self.radius,
            mode: self.mode(),
            seed,
            max_trace: self.max_trace,
        }
    }

    pub fn noise_model(&self, seed: u64) -> NoiseModel {
        NoiseModel {
            sigma: self.sigma,
            mode: self.noise,
            rng_seed: seed,
        }
    }
}

/// Derives `D`, `T`, `K` and the step-size parameters for `cfg` on `p`.
pub fn plan(cfg: &ExperimentConfig, p: &ProblemInstance) -> Result<Plan, CliError> {
    let o = &cfg.optimizer;
    let r = &cfg.run;
    let l1_hat = o.l1_hat.unwrap_or(p.l1);
    let gamma = o.gamma.unwrap_or(DEFAULT_GAMMA);
    let (radius, episode_length, auto_eta, auto_alpha) = if r.auto_params {
        let gap = p.initial_gap();
        match o.kind {
            OptimizerKind::OdogAdaptive => {
                let hp = adaptive_hyperparams(l1_hat, p.l2, r.sigma, gap, r.budget, gamma, o.alpha)?;
                let alpha = match hp.schedule {
                    StepSchedule::Adaptive { alpha, .. } => Some(alpha),
                    StepSchedule::Constant { .. } => None,
                };
                (hp.radius, hp.episode_length, None, alpha)
            }
            _ => {
                let hp = constant_step_hyperparams(p.l1, p.l2, r.sigma, gap, r.budget)?;
                (hp.radius, hp.episode_length, hp.eta(), None)
            }
        }
    } else {
        let radius = r.radius.ok_or_else(|| CliError::Config("run.radius is required".into()))?;
        let t = r
            .episode_length
            .ok_or_else(|| CliError::Config("run.episode_length is required".into()))?;
        (radius, t, None, None)
    };
    if episode_length == 0 || episode_length > r.budget {
        return Err(CliError::Config(format!(
            "episode length {episode_length} must lie in [1, budget = {}]",
            r.budget
        )));
    }

    let (eta, gamma, alpha) = match o.kind {
        OptimizerKind::OdogConst | OptimizerKind::O2ncOgd => {
            let eta = o.eta.or(auto_eta).ok_or_else(|| {
                CliError::Config(format!("{} needs optimizer.eta or auto_params", o.kind))
            })?;
            (Some(eta), None, None)
        }
        OptimizerKind::OdogAdaptive => {
            let alpha = o
                .alpha
                .or(auto_alpha)
                .unwrap_or(DEFAULT_ALPHA_SCALE * (l1_hat * radius) * (l1_hat * radius));
            (None, Some(gamma), Some(alpha))
        }
        OptimizerKind::Gd => (Some(o.eta.unwrap_or(gd_eta(p.l1))), None, None),
        OptimizerKind::Sgd => (Some(o.eta.unwrap_or(sgd_eta(p.l1, r.sigma, r.budget))), None, None),
    };

    let plan = Plan {
        kind: o.kind,
        budget: r.budget,
        sigma: r.sigma,
        noise: r.noise,
        radius,
        episode_length,
        episodes: r.budget / episode_length,
        eta,
        gamma,
        alpha,
        l1: p.l1,
        l1_hat,
        max_trace: r.max_trace,
    };
    plan.engine_config(0).validate()?;
    Ok(plan)
}

/// Runs one seed of `plan`, timing it.
pub fn execute(p: &ProblemInstance, plan: &Plan, seed: u64) -> Result<RunResult, CoreError> {
    let cfg = plan.engine_config(seed);
    let nm = plan.noise_model(seed);
    let start = Instant::now();
    let mut result = match plan.kind {
        OptimizerKind::OdogConst => engine::run(p, &nm, &cfg, &mut OdogLearner::constant(plan.eta.unwrap_or_default()))?,
        OptimizerKind::OdogAdaptive => engine::run(
            p,
            &nm,
            &cfg,
            &mut OdogLearner::adaptive(plan.gamma.unwrap_or(DEFAULT_GAMMA), plan.alpha.unwrap_or_default()),
        )?,
        OptimizerKind::O2ncOgd => engine::run(p, &nm, &cfg, &mut OgdLearner::new(plan.eta.unwrap_or_default()))?,
        OptimizerKind::Gd | OptimizerKind::Sgd => {
            run_gradient_descent(p, &nm, &cfg, plan.eta.unwrap_or_default(), plan.kind.name())?
        }
    };
    result.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(result)
}

pub fn summary_row(p: &ProblemInstance, plan: &Plan, seed: u64, r: &RunResult) -> SummaryRow {
    SummaryRow {
        problem: p.name.clone(),
        optimizer: plan.kind.name().into(),
        budget: plan.budget,
        sigma: plan.sigma,
        seed,
        radius: plan.radius,
        episode_length: plan.episode_length,
        episodes: plan.episodes,
        eta: plan.eta,
        gamma: plan.gamma,
        mean_grad_norm: r.mean_grad_norm(),
        output_grad_norm: r.selected().grad_norm_at_wbar,
        total_regret: r.total_regret(),
    }
}

/// Largest `‖Δₙ‖` among the stored iterations against `D`.
pub fn feasibility_report(r: &RunResult) -> BoundReport {
    let max = r.trace.iter().map(|t| t.delta.norm()).fold(0.0, f64::max);
    BoundReport::with_tolerance("feasibility", max, r.config.radius, odog_core::engine::BALL_TOLERANCE, 0.0)
}

/// An unsatisfied report when the constant step breaks `η ≤ 1/(√3 L1)`.
fn step_condition(plan: &Plan) -> Option<BoundReport> {
    let eta = plan.eta.unwrap_or_default();
    let cap = 1.0 / (3f64.sqrt() * plan.l1);
    (eta > cap * (1.0 + 1e-12)).then(|| BoundReport::with_tolerance("step-condition", eta, cap, 1e-12, 0.0))
}

/// Checks that hold for a single run of `plan`.
pub fn verify_run(p: &ProblemInstance, plan: &Plan, r: &RunResult) -> Result<Vec<BoundReport>, CoreError> {
    let mut out = Vec::new();
    if !plan.kind.ball_constrained() {
        return Ok(out);
    }
    out.push(feasibility_report(r));
    if r.trace_stride != 1 {
        return Ok(out);
    }
    let hints = matches!(plan.kind, OptimizerKind::OdogConst | OptimizerKind::OdogAdaptive);
    let exact = plan.sigma == 0.0;
    out.extend(diag::check_hint_geometry(&r.trace, (hints && exact).then_some(p.l1))?);
    out.extend(worst(diag::check_conversion_steps(&r.trace, p, plan.radius)?));
    out.extend(worst(diag::check_avg_grad_run(r, p)?));
    if !exact {
        return Ok(out);
    }
    out.push(diag::check_stationarity(r, p));
    match plan.kind {
        OptimizerKind::OdogConst => {
            out.push(diag::check_shifting_regret_run(r, plan.eta.unwrap_or_default())?);
            match step_condition(plan) {
                Some(b) => out.push(b),
                None => out.extend(worst(diag::const_episode_reports(
                    &r.episodes,
                    plan.eta.unwrap_or_default(),
                    plan.radius,
                    plan.l1,
                    plan.episode_length,
                )?)),
            }
        }
        OptimizerKind::O2ncOgd => out.push(diag::check_shifting_regret_run(r, plan.eta.unwrap_or_default())?),
        OptimizerKind::OdogAdaptive => {
            let l1s = diag::local_l1_per_episode(&r.trace, plan.episode_length, None)?;
            let gamma = plan.gamma.unwrap_or(DEFAULT_GAMMA);
            let reps = r
                .episodes
                .iter()
                .zip(&l1s)
                .map(|(e, l)| {
                    diag::check_adaptive_episode(e.regret, gamma, plan.radius, plan.episode_length, 0.0, l.value)
                        .at_episode(e.k)
                })
                .collect();
            out.extend(worst(reps));
        }
        OptimizerKind::Gd | OptimizerKind::Sgd => {}
    }
    Ok(out)
}

/// Checks of bounds that hold in expectation, over all seeds of one point.
/// Needs at least [`diag::MIN_SEEDS`] seeds and a noisy oracle.
pub fn verify_seeds(p: &ProblemInstance, plan: &Plan, runs: &[RunResult]) -> Result<Vec<BoundReport>, CoreError> {
    let mut out = Vec::new();
    if plan.sigma == 0.0 || runs.len() < diag::MIN_SEEDS || !plan.kind.ball_constrained() {
        return Ok(out);
    }
    let per_episode = |k: usize| -> Vec<f64> { runs.iter().map(|r| r.episodes[k].regret).collect() };
    match plan.kind {
        OptimizerKind::OdogConst => {
            if let Some(b) = step_condition(plan) {
                out.push(b);
            } else {
                let mut reps = Vec::new();
                for k in 0..plan.episodes {
                    reps.push(
                        diag::check_const_episode_mean(
                            &per_episode(k),
                            plan.eta.unwrap_or_default(),
                            plan.radius,
                            plan.l1,
                            plan.sigma,
                            plan.episode_length,
                        )?
                        .at_episode(k + 1),
                    );
                }
                out.extend(worst(reps));
            }
        }
        OptimizerKind::OdogAdaptive if runs.iter().all(|r| r.trace_stride == 1) => {
            let mut l1s = vec![0.0f64; plan.episodes];
            for r in runs {
                for (k, e) in diag::local_l1_per_episode(&r.trace, plan.episode_length, Some(p))?.iter().enumerate() {
                    l1s[k] = l1s[k].max(e.value);
                }
            }
            let gamma = plan.gamma.unwrap_or(DEFAULT_GAMMA);
            let mut reps = Vec::new();
            for (k, l1) in l1s.iter().enumerate() {
                reps.push(
                    diag::check_adaptive_episode_mean(&per_episode(k), gamma, plan.radius, plan.episode_length, plan.sigma, *l1)?
                        .at_episode(k + 1),
                );
            }
            out.extend(worst(reps));
        }
        _ => {}
    }
    // Stationarity bound with the noise term, in expectation.
    let gaps: Vec<f64> = runs
        .iter()
        .map(|r| {
            let b = diag::check_stationarity(r, p);
            b.lhs - b.rhs
        })
        .collect();
    let s = diag::seed_stats(&gaps)?;
    out.push(
        BoundReport::new("stationarity-mean", s.mean, 3.0 * s.std_err)
            .note(format!("mean of lhs - rhs over {} seeds against 3 SE", s.n)),
    );
    Ok(out)
}

/// A finished seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub result: Result<RunResult, String>,
}

/// All seeds of one configuration point.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub label: String,
    pub plan: Plan,
    pub seeds: Vec<SeedOutcome>,
}

impl PointOutcome {
    pub fn results(&self) -> impl Iterator<Item = &RunResult> {
        self.seeds.iter().filter_map(|s| s.result.as_ref().ok())
    }
}

/// Everything an invocation produced.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub points: Vec<PointOutcome>,
    pub summary: Vec<SummaryRow>,
    pub bounds: Vec<BoundRow>,
    pub aggregate: Vec<AggregateRow>,
    pub errors: Vec<String>,
}

impl Report {
    pub fn failed_bounds(&self) -> usize {
        self.bounds.iter().filter(|b| !b.satisfied).count()
    }

    /// `Ok` or the error that decides the exit code.
    pub fn status(&self) -> Result<(), CliError> {
        if let Some(e) = self.errors.first() {
            return Err(CliError::Contract(e.clone()));
        }
        match self.failed_bounds() {
            0 => Ok(()),
            n => Err(CliError::Verification(n)),
        }
    }
}

fn stem(p: &ProblemInstance, plan: &Plan, seed: u64) -> String {
    format!("{}_{}_M{}_sigma{}_seed{}", p.name, plan.kind.name(), plan.budget, plan.sigma, seed)
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    problem: &'a str,
    optimizer: &'a str,
    budget: usize,
    sigma: f64,
    seed: u64,
    error: String,
}

fn run_and_persist(p: &ProblemInstance, plan: &Plan, seed: u64, out: &Path) -> Result<SeedOutcome, CliError> {
    let dir = output::runs_dir(out);
    let name = stem(p, plan, seed);
    match execute(p, plan, seed) {
        Ok(r) => {
            output::write_json(&dir.join(format!("{name}.json")), &r)?;
            output::write_csv(&dir.join(format!("{name}_episodes.csv")), &output::episode_rows(&r))?;
            Ok(SeedOutcome { seed, result: Ok(r) })
        }
        Err(e) => {
            let msg = format!("{name}: {e}");
            let rec = ErrorRecord {
                problem: &p.name,
                optimizer: plan.kind.name(),
                budget: plan.budget,
                sigma: plan.sigma,
                seed,
                error: e.to_string(),
            };
            output::write_json(&dir.join(format!("{name}_error.json")), &rec)?;
            match e {
                CoreError::ContractViolation { .. } | CoreError::NonFinite { .. } => {
                    Ok(SeedOutcome { seed, result: Err(msg) })
                }
                other => Err(other.into()),
            }
        }
    }
}

/// Runs every (point, seed) pair on a pool of `cfg.run.workers` threads and
/// writes all artifacts under `cfg.run.out`.
fn execute_points(cfg: &ExperimentConfig, points: Vec<(String, ExperimentConfig)>) -> Result<Report, CliError> {
    let p = build_problem(&cfg.problem.name, &cfg.problem.params)?;
    let mut plans = Vec::with_capacity(points.len());
    for (label, c) in &points {
        c.validate()?;
        plans.push((label.clone(), plan(c, &p)?));
    }
    let out = &cfg.run.out;
    std::fs::create_dir_all(out)?;
    let jobs: Vec<(usize, u64)> = (0..plans.len())
        .flat_map(|i| cfg.run.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let done: Vec<Result<SeedOutcome, CliError>> =
        pool.install(|| jobs.par_iter().map(|&(i, s)| run_and_persist(&p, &plans[i].1, s, out)).collect());

    let mut report = Report::default();
    let mut outcomes: Vec<PointOutcome> = plans
        .into_iter()
        .map(|(label, plan)| PointOutcome {
            label,
            plan,
            seeds: Vec::new(),
        })
        .collect();
    for (&(i, _), d) in jobs.iter().zip(done) {
        outcomes[i].seeds.push(d?);
    }

    for point in &outcomes {
        let mut ok_runs = Vec::new();
        for s in &point.seeds {
            match &s.result {
                Ok(r) => {
                    let row = summary_row(&p, &point.plan, s.seed, r);
                    if cfg.run.verify {
                        for b in verify_run(&p, &point.plan, r)? {
                            report.bounds.push(BoundRow::new(&row, Some(s.seed), &b));
                        }
                    }
                    report.summary.push(row);
                    ok_runs.push(r.clone());
                }
                Err(e) => report.errors.push(e.clone()),
            }
        }
        if cfg.run.verify && !ok_runs.is_empty() {
            let ctx = summary_row(&p, &point.plan, 0, &ok_runs[0]);
            for b in verify_seeds(&p, &point.plan, &ok_runs)? {
                report.bounds.push(BoundRow::new(&ctx, None, &b));
            }
        }
    }
    output::write_summary(&out.join("summary.csv"), &report.summary)?;
    if cfg.run.verify {
        output::write_csv(&out.join("bounds.csv"), &report.bounds)?;
    }
    report.points = outcomes;
    Ok(report)
}

/// One configuration point, all seeds.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let label = cfg.optimizer.kind.name().to_string();
    execute_points(cfg, vec![(label, cfg.clone())])
}

fn aggregate(axis: SweepAxis, points: &[PointOutcome]) -> Result<Vec<AggregateRow>, CliError> {
    let mut rows = Vec::new();
    for pt in points {
        let runs: Vec<&RunResult> = pt.results().collect();
        if runs.is_empty() {
            continue;
        }
        let stats = |f: &dyn Fn(&RunResult) -> f64| diag::seed_stats(&runs.iter().map(|r| f(r)).collect::<Vec<_>>());
        let m = stats(&|r| r.mean_grad_norm())?;
        let o = stats(&|r| r.selected().grad_norm_at_wbar)?;
        let g = stats(&|r| r.total_regret())?;
        rows.push(AggregateRow {
            axis: axis.name().into(),
            value: pt.label.clone(),
            runs: runs.len(),
            mean_grad_norm_mean: m.mean,
            mean_grad_norm_se: m.std_err,
            output_grad_norm_mean: o.mean,
            output_grad_norm_se: o.std_err,
            total_regret_mean: g.mean,
            total_regret_se: g.std_err,
            loglog_slope: None,
        });
    }
    if axis == SweepAxis::Budget && rows.len() >= 3 {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .zip(&rows)
            .map(|(pt, r)| (pt.plan.budget as f64, r.mean_grad_norm_mean))
            .collect();
        if let Ok(slope) = diag::loglog_slope(&pts) {
            for r in &mut rows {
                r.loglog_slope = Some(slope);
            }
        }
    }
    Ok(rows)
}

/// Runs the cartesian product of the sweep values and seeds and writes
/// `aggregate.csv` with seed means and standard errors per value.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs an axis and values".into()))?;
    let points: Vec<(String, ExperimentConfig)> = s.values.iter().map(|v| (v.to_string(), cfg.at(s.axis, v))).collect();
    let mut report = execute_points(cfg, points)?;
    report.aggregate = aggregate(s.axis, &report.points)?;
    output::write_csv(&cfg.run.out.join("aggregate.csv"), &report.aggregate)?;
    Ok(report)
}
