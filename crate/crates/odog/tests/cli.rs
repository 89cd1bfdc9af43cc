use std::fs;
use std::path::Path;
use std::process::Command;

use odog::config::{ExperimentConfig, OptimizerKind, SweepAxis, SweepSection, SweepValue};
use odog::output::{read_csv, read_run, AggregateRow, BoundRow, SummaryRow, SUMMARY_COLUMNS};
use odog::{run_experiment, sweep};

fn odog(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_odog"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

fn files_under(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    out.sort();
    out
}

fn base(out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.run.budget = 256;
    c.run.auto_params = true;
    c.run.out = out.to_path_buf();
    c
}

#[test]
fn single_run_writes_one_json_and_two_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = odog(
        &["run", "--problem", "quadratic", "--optimizer", "odog-const", "--sigma", "0", "--budget", "256", "--auto-params", "--seeds", "0", "--out", "o"],
        tmp.path(),
    );
    assert_eq!(code, 0);
    let files = files_under(&tmp.path().join("o"));
    assert_eq!(files.iter().filter(|f| f.ends_with(".json")).count(), 1);
    assert_eq!(files.iter().filter(|f| f.ends_with(".csv")).count(), 2);
    assert!(files.contains(&"summary.csv".to_string()));
    let header = fs::read_to_string(tmp.path().join("o/summary.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));
}

#[test]
fn repeated_runs_give_identical_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |o: &'static str| ["run", "--sigma", "0.5", "--budget", "512", "--auto-params", "--seeds", "3,4", "--out", o];
    assert_eq!(odog(&args("a"), tmp.path()).0, 0);
    assert_eq!(odog(&args("b"), tmp.path()).0, 0);
    let a = fs::read(tmp.path().join("a/summary.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/summary.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sigma_sweep_has_one_row_per_value_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = base(tmp.path());
    c.run.seeds = (0..20).collect();
    c.run.workers = 4;
    c.sweep = Some(SweepSection {
        axis: SweepAxis::Sigma,
        values: vec![SweepValue::Number(0.0), SweepValue::Number(0.1), SweepValue::Number(1.0)],
    });
    let r = sweep(&c).unwrap();
    let rows: Vec<SummaryRow> = read_csv(&tmp.path().join("summary.csv")).unwrap();
    assert_eq!(rows.len(), 60);
    assert_eq!(rows, r.summary);
    let agg: Vec<AggregateRow> = read_csv(&tmp.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.len(), 3);
    assert!(agg.iter().all(|a| a.runs == 20 && a.loglog_slope.is_none()));
}

#[test]
fn budget_sweep_reports_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = odog(
        &["sweep", "--auto-params", "--axis", "budget", "--values", "256,1024,4096,16384", "--out", "o"],
        tmp.path(),
    );
    assert_eq!(code, 0);
    let agg: Vec<AggregateRow> = read_csv(&tmp.path().join("o/aggregate.csv")).unwrap();
    assert_eq!(agg.len(), 4);
    let slope = agg[0].loglog_slope.unwrap();
    assert!(agg.iter().all(|a| a.loglog_slope == Some(slope)));
    assert!(slope < 0.0);
}

#[test]
fn optimizer_sweep_shares_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = base(tmp.path());
    c.run.sigma = 0.3;
    c.run.seeds = vec![7, 8];
    c.sweep = Some(SweepSection {
        axis: SweepAxis::Optimizer,
        values: ["odog-const", "o2nc-ogd", "gd"].iter().map(|s| SweepValue::Name(s.to_string())).collect(),
    });
    let r = sweep(&c).unwrap();
    assert_eq!(r.points.len(), 3);
    for p in &r.points {
        let seeds: Vec<u64> = p.seeds.iter().map(|s| s.seed).collect();
        assert_eq!(seeds, vec![7, 8]);
        for res in p.results() {
            assert_eq!(res.episodes.len(), p.plan.episodes);
        }
    }
    let kinds: Vec<OptimizerKind> = r.points.iter().map(|p| p.plan.kind).collect();
    assert_eq!(kinds, vec![OptimizerKind::OdogConst, OptimizerKind::O2ncOgd, OptimizerKind::Gd]);
    // Same seeds mean the first noisy gradient at x₀ is shared.
    let first = |i: usize| r.points[i].results().next().unwrap().trace[0].g.clone();
    assert_eq!(first(1), first(2));
}

#[test]
fn empty_sweep_values_are_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, text) = odog(&["sweep", "--auto-params", "--axis", "sigma", "--values", "", "--out", "o"], tmp.path());
    assert_eq!(code, 1, "{text}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "[run]\nbudget = 64\nauto_params = true\nbudgte = 3\n").unwrap();
    let (code, text) = odog(&["run", "--config", "c.toml"], tmp.path());
    assert_eq!(code, 1);
    assert!(text.contains("budgte"), "{text}");
    let (code, _) = odog(&["run", "--no-such-flag"], tmp.path());
    assert_eq!(code, 1);
}

#[test]
fn divergent_runs_persist_an_error_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "[optimizer]\nkind = \"gd\"\neta = 1e200\n[run]\nbudget = 50\nauto_params = true\nout = \"o\"\n",
    )
    .unwrap();
    let (code, _) = odog(&["run", "--config", "c.toml"], tmp.path());
    assert_eq!(code, 2);
    let files = files_under(&tmp.path().join("o"));
    assert!(files.iter().any(|f| f.ends_with("_error.json")));
}

#[test]
fn broken_step_condition_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "[optimizer]\nkind = \"odog-const\"\neta = 5.0\n[run]\nbudget = 128\nauto_params = true\nverify = true\nout = \"o\"\n",
    )
    .unwrap();
    let (code, _) = odog(&["run", "--config", "c.toml"], tmp.path());
    assert_eq!(code, 3);
    let bounds: Vec<BoundRow> = read_csv(&tmp.path().join("o/bounds.csv")).unwrap();
    assert!(bounds.iter().any(|b| b.name == "step-condition" && !b.satisfied));
}

#[test]
fn verified_runs_pass_for_every_optimizer() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["odog-const", "odog-adaptive", "o2nc-ogd", "gd", "sgd"] {
        let out = format!("o-{kind}");
        let (code, text) = odog(
            &["run", "--optimizer", kind, "--budget", "1024", "--auto-params", "--verify", "--out", &out],
            tmp.path(),
        );
        assert_eq!(code, 0, "{kind}: {text}");
    }
}

#[test]
fn run_json_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = base(tmp.path());
    c.optimizer.kind = OptimizerKind::OdogAdaptive;
    c.run.sigma = 0.2;
    let r = run_experiment(&c).unwrap();
    let mem = r.points[0].results().next().unwrap();
    let path = tmp
        .path()
        .join("runs/cosine-quadratic_odog-adaptive_M256_sigma0.2_seed0.json");
    assert_eq!(&read_run(&path).unwrap(), mem);
}

#[test]
fn manual_parameters_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let c = ExperimentConfig::from_toml(&format!(
        "[problem]\nname = \"quadratic\"\nparams = {{ dim = 3, a = [1, 2, 3] }}\n[optimizer]\nkind = \"odog-const\"\neta = 0.1\n[run]\nbudget = 100\nradius = 0.05\nepisode_length = 7\nout = '{}'\n",
        tmp.path().display()
    ))
    .unwrap();
    let r = run_experiment(&c).unwrap();
    let plan = &r.points[0].plan;
    assert_eq!((plan.episode_length, plan.episodes, plan.radius), (7, 14, 0.05));
    assert_eq!(r.summary[0].eta, Some(0.1));
}
