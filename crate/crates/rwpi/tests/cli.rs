//! End-to-end checks of the `rwpi` binary: the documented grammar, exit
//! codes, output schemas, byte-stability, and reachability of every library
//! operation from at least one verb.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rwpi"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().unwrap()).expect("stdout is json")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rwpi_cli_{tag}"));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_lists_every_verb() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for verb in [
        "gen-data",
        "select-lambda",
        "fit",
        "worst-case",
        "rwp",
        "simulate-limit",
        "experiment",
    ] {
        assert!(text.contains(verb), "help output missing verb {verb}");
    }
}

#[test]
fn usage_errors_exit_2_runtime_errors_exit_1() {
    let out = run(&["no-such-verb"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["fit", "--model", "sqrt-lasso", "--data", "x.csv", "--response", "y"]);
    assert_eq!(out.status.code(), Some(2), "missing --lambda is a usage error");
    let out = run(&[
        "fit", "--model", "sqrt-lasso", "--lambda", "0.1", "--data", "/definitely/not/here.csv",
        "--response", "y",
    ]);
    assert_eq!(out.status.code(), Some(1), "missing file is a runtime error");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/definitely/not/here.csv"));
}

#[test]
fn select_lambda_highdim_prints_choice_json() {
    let out = run(&[
        "select-lambda", "--method", "highdim", "--n", "10000", "--d", "300", "--alpha", "0.05",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["method"], "highdim");
    let lambda = v["lambda"].as_f64().unwrap();
    let delta = v["delta"].as_f64().unwrap();
    assert!((delta - lambda * lambda).abs() < 1e-12);
    assert!(lambda > 0.09 && lambda < 0.12, "lambda {lambda}");
}

#[test]
fn select_lambda_highdim_with_data_reports_growth() {
    let dir = workdir("highdim_growth");
    let data = dir.join("x.csv");
    let mut body = String::from("x1,x2\n");
    for i in 0..25 {
        body.push_str(&format!("{},{}\n", (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
    }
    std::fs::write(&data, body).unwrap();
    let v = stdout_json(&run(&[
        "select-lambda", "--method", "highdim", "--n", "25", "--alpha", "0.05", "--data",
        data.to_str().unwrap(),
    ]));
    assert!(v["growth_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn rwp_mean_example_prints_one() {
    let dir = workdir("rwp_mean");
    let data = dir.join("w.csv");
    std::fs::write(&data, "w\n0\n4\n").unwrap();
    let out = run(&[
        "rwp", "--mode", "mean", "--theta", "1", "--rho", "2", "--data",
        data.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);
    assert_eq!(v["method"], "mean-closed-form");
}

#[test]
fn fit_sqrt_lasso_at_zero_matches_ols() {
    let dir = workdir("fit_zero");
    let data = dir.join("data.csv");
    // Deterministic full-rank tall data.
    let mut body = String::from("x1,x2,y\n");
    for i in 0..24 {
        let a = (i as f64 * 0.37).sin() * 2.0;
        let b = (i as f64 * 0.71).cos() * 1.5;
        body.push_str(&format!("{a},{b},{}\n", 1.5 * a - 0.7 * b + (i as f64 * 0.13).sin()));
    }
    std::fs::write(&data, body).unwrap();
    let lasso = stdout_json(&run(&[
        "fit", "--model", "sqrt-lasso", "--lambda", "0", "--p", "1", "--data",
        data.to_str().unwrap(), "--response", "y",
    ]));
    let ols = stdout_json(&run(&[
        "fit", "--model", "ols", "--data", data.to_str().unwrap(), "--response", "y",
    ]));
    let a = lasso["beta"].as_array().unwrap();
    let b = ols["beta"].as_array().unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn worst_case_dual_reports_gamma_and_matches_closed() {
    let dir = workdir("worst_case");
    let data = dir.join("data.csv");
    std::fs::write(&data, "x1,y\n1.0,1.2\n-0.5,0.1\n2.0,2.2\n").unwrap();
    let beta = dir.join("beta.json");
    std::fs::write(&beta, "[0.9]").unwrap();
    let closed = stdout_json(&run(&[
        "worst-case", "--loss", "square", "--delta", "0.3", "--p", "2", "--data",
        data.to_str().unwrap(), "--response", "y", "--beta-file", beta.to_str().unwrap(),
    ]));
    let dual = stdout_json(&run(&[
        "worst-case", "--loss", "square", "--delta", "0.3", "--p", "2", "--data",
        data.to_str().unwrap(), "--response", "y", "--beta-file", beta.to_str().unwrap(),
        "--dual",
    ]));
    assert_eq!(dual["form"], "dual-numeric");
    assert!(dual["gamma"].as_f64().unwrap() > 0.0);
    let c = closed["value"].as_f64().unwrap();
    let d = dual["value"].as_f64().unwrap();
    assert!((c - d).abs() <= 1e-6 * (1.0 + c));
    // FitResult JSON round-trips numerically at 12 digits.
    let logistic_data = dir.join("bin.csv");
    std::fs::write(&logistic_data, "x1,y\n0.5,1\n-0.4,-1\n1.0,1\n-0.8,-1\n").unwrap();
    let hinge = stdout_json(&run(&[
        "worst-case", "--loss", "hinge", "--delta", "0.2", "--p", "2", "--data",
        logistic_data.to_str().unwrap(), "--response", "y", "--beta-file",
        beta.to_str().unwrap(),
    ]));
    assert_eq!(hinge["form"], "closed-hinge");
    let logi = stdout_json(&run(&[
        "worst-case", "--loss", "logistic", "--delta", "0.2", "--p", "2", "--data",
        logistic_data.to_str().unwrap(), "--response", "y", "--beta-file",
        beta.to_str().unwrap(),
    ]));
    assert_eq!(logi["form"], "closed-logistic");
}

#[test]
fn gen_data_writes_csv_and_echoes_ground_truth() {
    let dir = workdir("gen");
    let out = dir.join("sim.csv");
    let v = stdout_json(&run(&[
        "gen-data", "--n", "30", "--d", "6", "--sigma", "10", "--seed", "7", "--out",
        out.to_str().unwrap(),
    ]));
    let beta: Vec<f64> = v["beta_star"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(beta, vec![3.0, 2.0, 0.0, 1.5, 0.0, 0.0]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x1,x2,x3,x4,x5,x6,y\n"));
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn simulate_limit_writes_columnar_csv_and_is_byte_stable() {
    let dir = workdir("simulate");
    let out1 = dir.join("batch1.csv");
    let out2 = dir.join("batch2.csv");
    let run1 = run(&[
        "simulate-limit", "--law", "l2", "--draws", "64", "--seed", "5", "--d", "3", "--q",
        "inf", "--out", out1.to_str().unwrap(),
    ]);
    let a = std::fs::read(&out1).unwrap();
    let run2 = run(&[
        "simulate-limit", "--law", "l2", "--draws", "64", "--seed", "5", "--d", "3", "--q",
        "inf", "--out", out1.to_str().unwrap(),
    ]);
    assert_eq!(run1.stdout, run2.stdout, "stdout byte-identical across runs");
    let run3 = run(&[
        "simulate-limit", "--law", "l2", "--draws", "64", "--seed", "5", "--d", "3", "--q",
        "inf", "--out", out2.to_str().unwrap(),
    ]);
    assert!(run3.status.success());
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("law,index,value\nl2,0,"));
    let v = stdout_json(&run1);
    assert_eq!(v["law"], "l2");
    assert_eq!(v["draws"], 64);
    assert!(v["quantile"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_limit_rbar_laws_run_from_data() {
    let dir = workdir("simulate_rbar");
    let data = dir.join("w.csv");
    std::fs::write(&data, "w\n0.0\n1.0\n2.5\n-0.5\n1.5\n").unwrap();
    for law in ["rbar", "rbar1"] {
        let v = stdout_json(&run(&[
            "simulate-limit", "--law", law, "--draws", "32", "--seed", "9", "--data",
            data.to_str().unwrap(), "--q", "2",
        ]));
        assert_eq!(v["law"], law);
        assert!(v["quantile"]["value"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn simulate_limit_l1_and_l4_run_from_data() {
    let dir = workdir("simulate_l1");
    let data = dir.join("d.csv");
    let mut body = String::from("x1,x2,y\n");
    for i in 0..40 {
        let a = (i as f64 * 0.37).sin();
        let b = (i as f64 * 0.71).cos();
        body.push_str(&format!("{a},{b},{}\n", a - b + (i as f64 * 1.3).sin() * 0.3));
    }
    std::fs::write(&data, body).unwrap();
    let beta = dir.join("beta.json");
    std::fs::write(&beta, "{\"beta\":[1.0,-1.0]}").unwrap();
    let v = stdout_json(&run(&[
        "simulate-limit", "--law", "l1", "--draws", "40", "--seed", "3", "--data",
        data.to_str().unwrap(), "--response", "y", "--beta-file", beta.to_str().unwrap(),
        "--q", "2",
    ]));
    assert_eq!(v["law"], "l1");
    let v = stdout_json(&run(&[
        "simulate-limit", "--law", "l4", "--draws", "40", "--seed", "3", "--data",
        data.to_str().unwrap(), "--response", "y", "--q", "2",
    ]));
    assert_eq!(v["law"], "l4");
}

#[test]
fn logistic_fit_and_l4_selection_from_csv() {
    let dir = workdir("logistic");
    let data = dir.join("bin.csv");
    let mut body = String::from("x1,x2,y\n");
    for i in 0..50 {
        let a = (i as f64 * 0.37).sin() * 2.0;
        let b = (i as f64 * 0.71).cos();
        let label = if a - b > 0.2 { 1 } else { -1 };
        body.push_str(&format!("{a},{b},{label}\n"));
    }
    std::fs::write(&data, body).unwrap();
    let sel = stdout_json(&run(&[
        "select-lambda", "--method", "l4", "--alpha", "0.05", "--n", "50", "--data",
        data.to_str().unwrap(), "--response", "y", "--mc", "500", "--seed", "11",
    ]));
    assert_eq!(sel["method"], "l4");
    let lambda = sel["lambda"].as_f64().unwrap();
    assert!((lambda - sel["delta"].as_f64().unwrap()).abs() < 1e-15);
    let fit = stdout_json(&run(&[
        "fit", "--model", "logistic", "--lambda", &format!("{lambda}"), "--p", "1", "--data",
        data.to_str().unwrap(), "--response", "y",
    ]));
    assert_eq!(fit["converged"], true);
}

#[test]
fn select_lambda_l1_and_l2_from_data() {
    let dir = workdir("select_l1");
    let data = dir.join("d.csv");
    let mut body = String::from("x1,x2,y\n");
    for i in 0..60 {
        let a = (i as f64 * 0.37).sin() * 1.2;
        let b = (i as f64 * 0.71).cos();
        body.push_str(&format!("{a},{b},{}\n", 2.0 * a - b + (i as f64 * 1.9).sin()));
    }
    std::fs::write(&data, body).unwrap();
    let l2 = stdout_json(&run(&[
        "select-lambda", "--method", "l2", "--alpha", "0.05", "--n", "60", "--data",
        data.to_str().unwrap(), "--response", "y", "--q", "inf", "--mc", "800", "--seed", "4",
    ]));
    let l1 = stdout_json(&run(&[
        "select-lambda", "--method", "l1", "--alpha", "0.05", "--n", "60", "--data",
        data.to_str().unwrap(), "--response", "y", "--q", "inf", "--mc", "800", "--seed", "4",
    ]));
    let l2v = l2["lambda"].as_f64().unwrap();
    let l1v = l1["lambda"].as_f64().unwrap();
    assert!(l1v > 0.0 && l2v > 0.0);
    // The sharp law is stochastically below its bound.
    assert!(l1v <= l2v * 1.1, "l1 {l1v} vs l2 {l2v}");
}

#[test]
fn experiment_runs_from_config_and_writes_artifacts() {
    let dir = workdir("experiment");
    let cfg = dir.join("exp.conf");
    std::fs::write(
        &cfg,
        "kind = sim\nn = 60\nd = 5\nsigma = 2\nalpha = 0.05\nreps = 2\ntest_size = 100\n\
         methods = rwpi,ols\nseed = 3\nmethod = l2\nq = inf\nmc_draws = 300\n",
    )
    .unwrap();
    let rows = dir.join("rows.csv");
    let agg = dir.join("agg.json");
    let out = run(&[
        "experiment", "--config", cfg.to_str().unwrap(), "--out-rows", rows.to_str().unwrap(),
        "--out-json", agg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows_text = std::fs::read_to_string(&rows).unwrap();
    assert!(rows_text.starts_with("method,rep,n,d,lambda,train_mse,test_mse,l1_err,l2_err,coverage_hit"));
    assert_eq!(rows_text.lines().count(), 5);
    let agg_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&agg).unwrap()).unwrap();
    assert_eq!(agg_json.as_array().unwrap().len(), 2);
    assert_eq!(agg_json[0]["method"], "RWPI");
    assert!(agg_json[0]["coverage"].as_f64().is_some());

    // Identical invocation is byte-identical.
    let out2 = run(&[
        "experiment", "--config", cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.stdout, out2.stdout);

    // --full without full-scale keys is a usage-level config failure.
    let out3 = run(&["experiment", "--config", cfg.to_str().unwrap(), "--full"]);
    assert_eq!(out3.status.code(), Some(1));
}

#[test]
fn csv_experiment_and_full_scale_flag() {
    let dir = workdir("csv_exp");
    let data = dir.join("obs.csv");
    let mut body = String::from("a,b,c,y\n");
    for i in 0..80 {
        let t = i as f64;
        let (x1, x2, x3) = ((t * 0.37).sin(), (t * 0.71).cos(), (t * 0.13).sin());
        body.push_str(&format!(
            "{x1},{x2},{x3},{}\n",
            2.0 * x1 - x2 + 0.5 * x3 + (t * 2.3).sin() * 0.4
        ));
    }
    std::fs::write(&data, body).unwrap();
    let cfg = dir.join("exp.conf");
    std::fs::write(
        &cfg,
        format!(
            "kind = csv\ndata = {}\nresponse = y\ntrain_size = 50\nreps = 3\nalpha = 0.05\n\
             methods = rwpi,ols\nseed = 5\nmc_draws = 400\nn_full = 80\nd_full = 3\nreps_full = 4\n",
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = run(&["experiment", "--config", cfg.to_str().unwrap()]);
    let agg: serde_json::Value = stdout_json(&out);
    assert_eq!(agg[0]["method"], "RWPI");
    assert_eq!(agg[1]["method"], "OLS");
    // Response is standardized by default for csv runs: unit-scale errors.
    assert!(agg[0]["test_mean"].as_f64().unwrap() < 2.0);
    // l1/l2 coefficient errors have no ground truth here.
    assert!(agg[0]["l1_mean"].is_null());

    // A sim config with full-scale keys accepts --full.
    let sim_cfg = dir.join("sim.conf");
    std::fs::write(
        &sim_cfg,
        "kind = sim\nn = 40\nd = 5\nsigma = 1\nreps = 2\ntest_size = 50\nmethods = rwpi\n\
         seed = 2\nmc_draws = 200\nn_full = 60\nd_full = 6\nreps_full = 3\n",
    )
    .unwrap();
    let out = run(&["experiment", "--config", sim_cfg.to_str().unwrap(), "--full"]);
    let agg: serde_json::Value = stdout_json(&out);
    assert_eq!(agg[0]["n"], 60);
    assert_eq!(agg[0]["d"], 6);
}

#[test]
fn rwp_linear_q2_and_generic_verbs() {
    let dir = workdir("rwp_modes");
    let data = dir.join("d.csv");
    std::fs::write(&data, "x1,y\n1.0,2.0\n").unwrap();
    let beta = dir.join("beta.json");
    std::fs::write(&beta, "[2.0]").unwrap();
    let v = stdout_json(&run(&[
        "rwp", "--mode", "linear-q2", "--beta-file", beta.to_str().unwrap(), "--data",
        data.to_str().unwrap(), "--response", "y",
    ]));
    assert!(v["value"].as_f64().unwrap().abs() < 1e-10);

    let w = dir.join("w.csv");
    std::fs::write(&w, "w\n0\n4\n").unwrap();
    let v = stdout_json(&run(&[
        "rwp", "--mode", "generic", "--theta", "1", "--rho", "2", "--q", "2", "--seed", "5",
        "--data", w.to_str().unwrap(),
    ]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["method"], "generic-dual");
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = workdir("threads");
    let cfg = dir.join("exp.conf");
    std::fs::write(
        &cfg,
        "kind = sim\nn = 50\nd = 5\nsigma = 1\nreps = 3\ntest_size = 50\nmethods = rwpi\n\
         seed = 12\nmc_draws = 200\n",
    )
    .unwrap();
    let one = run(&["--threads", "1", "experiment", "--config", cfg.to_str().unwrap()]);
    let eight = run(&["--threads", "8", "experiment", "--config", cfg.to_str().unwrap()]);
    assert!(one.status.success() && eight.status.success());
    assert_eq!(one.stdout, eight.stdout);
}
