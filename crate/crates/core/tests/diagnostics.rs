use odog_core::diagnostics::*;
use odog_core::engine::{run, EngineConfig, IterationRecord, Mode, RunResult};
use odog_core::odog::{constant_step_hyperparams, adaptive_hyperparams, OdogLearner, DEFAULT_GAMMA};
use odog_core::problems::{build_problem, NoiseModel, ParamMap, ParamValue, ProblemInstance, Quadratic};
use odog_core::Vector;

fn cosine(x0: f64) -> ProblemInstance {
    let mut m = ParamMap::new();
    m.insert("x0".into(), ParamValue::Float(x0));
    build_problem("cosine-quadratic", &m).unwrap()
}

fn const_run(p: &ProblemInstance, m: usize) -> (RunResult, f64) {
    let hp = constant_step_hyperparams(p.l1, p.l2, 0.0, p.initial_gap(), m).unwrap();
    let cfg = EngineConfig::from_budget(m, hp.episode_length, hp.radius, Mode::Deterministic).unwrap();
    let eta = hp.eta().unwrap();
    (run(p, &NoiseModel::deterministic(), &cfg, &mut OdogLearner::new(hp.schedule)).unwrap(), eta)
}

#[test]
fn faithful_runs_satisfy_every_per_run_bound() {
    for p in [cosine(3.0), cosine(-1.5), build_problem("logistic", &ParamMap::new()).unwrap()] {
        let (r, eta) = const_run(&p, 2048);
        assert!(check_shifting_regret_run(&r, eta).unwrap().satisfied, "{}", p.name);
        let l2 = const_episode_reports(&r.episodes, eta, r.config.radius, p.l1, r.config.episode_length).unwrap();
        assert!(l2.iter().all(|b| b.satisfied), "{}", p.name);
        assert!(check_stationarity(&r, &p).satisfied, "{}", p.name);
        assert!(check_avg_grad_run(&r, &p).unwrap().iter().all(|b| b.satisfied));
        assert!(check_conversion_steps(&r.trace, &p, r.config.radius).unwrap().iter().all(|b| b.satisfied));
        assert!(check_hint_geometry(&r.trace, Some(p.l1)).unwrap().iter().all(|b| b.satisfied));
    }
}

#[test]
fn stationarity_on_quadratic_and_single_episode() {
    let p = Quadratic::new(vec![1.0, 2.0, 3.0]).unwrap().instance(Vector::from([1.0, 1.0, 1.0])).unwrap();
    let (r, _) = const_run(&p, 512);
    let b = check_stationarity(&r, &p);
    let cfg = &r.config;
    let dkt = cfg.radius * (cfg.episodes * cfg.episode_length) as f64;
    assert!((b.rhs - (p.initial_gap() + r.total_regret()) / dkt).abs() < 1e-12);
    assert!(b.satisfied);

    let c = cosine(1.0);
    let cfg = EngineConfig::from_budget(64, 64, 0.05, Mode::Deterministic).unwrap();
    let r = run(&c, &NoiseModel::deterministic(), &cfg, &mut OdogLearner::constant(0.2)).unwrap();
    assert_eq!(r.episodes.len(), 1);
    assert!(check_stationarity(&r, &c).satisfied);
}

#[test]
fn avg_grad_examples() {
    let c = cosine(0.0);
    let w = vec![Vector::filled(10, 0.7)];
    let b = check_avg_grad(&w, &c, 0.3).unwrap();
    assert!((b.slack - 0.5 * c.l2 * 0.09).abs() < 1e-15);
    let q = Quadratic::uniform(2, 2.0).instance(Vector::zeros(2)).unwrap();
    let ws = vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 3.0]), Vector::from([-2.0, 1.0])];
    let b = check_avg_grad(&ws, &q, 1.0).unwrap();
    assert!(b.slack.abs() < 1e-15);
}

#[test]
fn local_l1_is_exact_on_quadratic() {
    let p = Quadratic::new(vec![1.0, 3.0, 2.0]).unwrap().instance(Vector::from([2.0, 2.0, 2.0])).unwrap();
    let (r, _) = const_run(&p, 1024);
    let est = estimate_local_l1(&r.trace).unwrap();
    assert!(est.value <= 3.0 * (1.0 + 1e-9));
    let uniform = Quadratic::uniform(4, 3.0).instance(Vector::filled(4, 1.0)).unwrap();
    let (r, _) = const_run(&uniform, 1024);
    let est = estimate_local_l1(&r.trace).unwrap();
    assert!((est.value - 3.0).abs() <= 1e-9, "{}", est.value);
}

#[test]
fn local_l1_stays_below_analytic_constant() {
    let p = cosine(3.0);
    let (r, _) = const_run(&p, 4096);
    let est = estimate_local_l1(&r.trace).unwrap();
    assert!(!est.is_empty());
    assert!(est.value <= p.l1 * (1.0 + 1e-9));
    let exact = estimate_local_l1_exact(&r.trace, &p).unwrap();
    assert!((exact.value - est.value).abs() <= 1e-9 * p.l1);
}

#[test]
fn adaptive_runs_satisfy_the_episode_bound() {
    let p = cosine(3.0);
    let hp = adaptive_hyperparams(p.l1, p.l2, 0.0, p.initial_gap(), 2048, DEFAULT_GAMMA, None).unwrap();
    let cfg = EngineConfig::from_budget(2048, hp.episode_length, hp.radius, Mode::Deterministic).unwrap();
    let r = run(&p, &NoiseModel::deterministic(), &cfg, &mut OdogLearner::new(hp.schedule)).unwrap();
    let l1s = local_l1_per_episode(&r.trace, hp.episode_length, None).unwrap();
    for (e, l) in r.episodes.iter().zip(&l1s) {
        let b = check_adaptive_episode(e.regret, DEFAULT_GAMMA, hp.radius, hp.episode_length, 0.0, l.value);
        assert!(b.satisfied, "episode {}: {b:?}", e.k);
    }
}

fn record(n: usize, delta: f64, g: f64, h: f64) -> IterationRecord {
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
        eta: 0.1,
    }
}

#[test]
fn tampered_traces_are_flagged() {
    // Directions chosen against the update rule.
    let (mut r, eta) = const_run(&cosine(3.0), 512);
    let d = r.config.radius;
    for it in r.trace.iter_mut() {
        let g = it.g.clone();
        it.delta = g.scaled(d / g.norm().max(1e-300));
    }
    assert!(!check_shifting_regret_run(&r, eta).unwrap().satisfied);

    // Too large a step breaks the precondition.
    assert!(check_const_episode(0.0, 1.0, 1.0, 2.0, 0.0, 4).is_err());

    // A hint that does not come from the extrapolated point.
    let trace = vec![record(1, 0.2, 1.0, 1.0), record(2, 0.2, 5.0, 1.0)];
    let reps = check_hint_geometry(&trace, Some(1.0)).unwrap();
    assert!(reps.iter().any(|b| !b.satisfied));
}

#[test]
fn helper_inequalities_hold_on_random_instances() {
    let reps = inequality_oracles(10_000, 1);
    assert_eq!(reps.len(), 3);
    for r in reps {
        assert!(r.satisfied, "{r:?}");
        assert!(r.note.starts_with("0 violations"));
    }
}

#[test]
fn thinned_traces_are_rejected_by_trace_checks() {
    let p = cosine(1.0);
    let mut cfg = EngineConfig::from_budget(100, 10, 0.1, Mode::Deterministic).unwrap();
    cfg.max_trace = 10;
    let r = run(&p, &NoiseModel::deterministic(), &cfg, &mut OdogLearner::constant(0.1)).unwrap();
    assert!(check_shifting_regret_run(&r, 0.1).is_err());
    assert!(estimate_local_l1(&r.trace).is_err());
}
