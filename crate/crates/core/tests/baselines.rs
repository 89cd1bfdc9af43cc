use odog_core::baselines::*;
use odog_core::engine::{run, EngineConfig, Mode};
use odog_core::odog::constant_step_hyperparams;
use odog_core::problems::{build_problem, NoiseModel, ParamMap, Quadratic};
use odog_core::Vector;
use proptest::prelude::*;

#[test]
fn gd_contracts_on_diagonal_quadratic() {
    let q = Quadratic::new(vec![0.5, 1.0, 3.0]).unwrap();
    let l1 = q.l1();
    let p = q.instance(Vector::from([2.0, -1.0, 4.0])).unwrap();
    let mut x = p.x0.clone();
    let mut last = x.norm();
    for _ in 0..50 {
        x = gd_step(&x, &p.eval_grad(&x).unwrap(), gd_eta(l1));
        assert!(x.norm() <= last);
        last = x.norm();
    }
}

#[test]
fn sgd_without_noise_equals_gd() {
    let p = build_problem("cosine-quadratic", &ParamMap::new()).unwrap();
    let cfg = EngineConfig::from_budget(300, 10, 0.1, Mode::Deterministic).unwrap().with_seed(4);
    let eta = sgd_eta(p.l1, 0.0, 300);
    let gd = run_gradient_descent(&p, &NoiseModel::deterministic(), &cfg, eta, "gd").unwrap();
    let sgd = run_gradient_descent(&p, &NoiseModel::shared(0.0, 4), &cfg, eta, "gd").unwrap();
    assert_eq!(gd.trace, sgd.trace);
    assert_eq!(gd.episodes, sgd.episodes);
    assert_eq!(gd.final_x, sgd.final_x);
}

#[test]
fn gd_run_reports_episodes() {
    let p = build_problem("quadratic", &ParamMap::new()).unwrap();
    let cfg = EngineConfig::from_budget(100, 10, 1.0, Mode::Deterministic).unwrap();
    let r = run_gradient_descent(&p, &NoiseModel::deterministic(), &cfg, gd_eta(p.l1), "gd").unwrap();
    assert_eq!(r.episodes.len(), 10);
    // η = 1/L1 solves a uniform quadratic in one step.
    assert_eq!(r.final_x, Vector::zeros(p.dim()));
    assert_eq!(r.gradient_calls, 100);
}

#[test]
fn o2nc_ogd_stays_feasible_in_the_engine() {
    let p = build_problem("cosine-quadratic", &ParamMap::new()).unwrap();
    let hp = constant_step_hyperparams(p.l1, p.l2, 1.0, p.initial_gap(), 2048).unwrap();
    let cfg = EngineConfig::from_budget(2048, hp.episode_length, hp.radius, Mode::Stochastic).unwrap();
    let mut l = OgdLearner::new(hp.eta().unwrap());
    let r = run(&p, &NoiseModel::shared(1.0, 0), &cfg, &mut l).unwrap();
    assert!(r.trace.iter().all(|t| t.delta.norm() <= hp.radius * (1.0 + 1e-12)));
    assert_eq!(r.optimizer, "o2nc-ogd");
}

proptest! {
    #[test]
    fn ogd_step_is_feasible(
        d in prop::collection::vec(-1.0f64..1.0, 3),
        g in prop::collection::vec(-100.0f64..100.0, 3),
        eta in 1e-4f64..10.0,
        r in 1e-3f64..3.0,
    ) {
        let start = odog_core::odog::project_ball(&d, r);
        prop_assert!(o2nc_ogd_step(&start, &g, eta, r).norm() <= r * (1.0 + 1e-12));
    }
}
