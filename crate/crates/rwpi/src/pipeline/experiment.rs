//! Replicated experiments: synthetic sparse regression and CSV-backed
//! regression, with penalty selection, baseline comparisons, coverage
//! bookkeeping, and table-style aggregation.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dataset::{apply_standardization, read_csv, standardize, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::norms::{dual_exponent, Exponent};
use crate::pipeline::{
    generate_linear_data, select_lambda_linear, LinearSelectInputs, SelectMethod,
};
use crate::report::{fmt_f64, JsonObject};
use crate::rng::RngSeed;
use crate::solvers::{
    cross_validate_lambda, default_cv_grid, fit_ols, fit_sqrt_lasso, CvObjective, FitCaps,
};
use crate::worstcase::worstcase_linear_closed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sim,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMethod {
    Rwpi,
    GlassoCv,
    Ols,
}

impl RunMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMethod::Rwpi => "RWPI",
            RunMethod::GlassoCv => "GLASSO_CV",
            RunMethod::Ols => "OLS",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub reps: usize,
    pub test_size: usize,
    pub methods: Vec<RunMethod>,
    pub seed: u64,
    /// Selection method used for the RWPI rows.
    pub method: SelectMethod,
    /// Transport cost exponent; the fitted penalty uses its dual.
    pub q: Exponent,
    pub mc_draws: usize,
    /// Standardize the response along with the predictors.
    pub scale_y: bool,
    pub cv_folds: usize,
    pub cv_grid_points: usize,
    // CSV experiments.
    pub data_path: Option<String>,
    pub response: Option<String>,
    pub train_size: Option<usize>,
    // Optional full-scale overrides, applied by the CLI's --full flag.
    pub n_full: Option<usize>,
    pub d_full: Option<usize>,
    pub reps_full: Option<usize>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n: 100,
            d: 10,
            sigma: 10.0,
            alpha: 0.05,
            reps: 10,
            test_size: 10_000,
            methods: vec![RunMethod::Rwpi, RunMethod::Ols],
            seed: 0,
            method: SelectMethod::L2,
            q: Exponent::Infinity,
            mc_draws: 2_000,
            scale_y: kind == ExperimentKind::Csv,
            cv_folds: 10,
            cv_grid_points: 50,
            data_path: None,
            response: None,
            train_size: None,
            n_full: None,
            d_full: None,
            reps_full: None,
        }
    }

    /// Swap in the full-scale sizes (if the config supplies them).
    pub fn at_full_scale(mut self) -> Result<Self> {
        let (n, d, reps) = match (self.n_full, self.d_full, self.reps_full) {
            (Some(n), Some(d), Some(r)) => (n, d, r),
            _ => {
                return Err(Error::Config {
                    what: "--full needs n_full, d_full and reps_full in the config".into(),
                })
            }
        };
        self.n = n;
        self.d = d;
        self.reps = reps;
        Ok(self)
    }
}

/// Parses the flat `key = value` config format (one pair per line, `#`
/// comments allowed).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut kind = ExperimentKind::Sim;
    // First pass: the kind decides the defaults.
    for line in text.lines() {
        if let Some((k, v)) = split_pair(line) {
            if k == "kind" {
                kind = match v {
                    "sim" => ExperimentKind::Sim,
                    "csv" => ExperimentKind::Csv,
                    other => {
                        return Err(Error::Config {
                            what: format!("unknown experiment kind '{other}'"),
                        })
                    }
                };
            }
        }
    }
    let mut cfg = ExperimentConfig::defaults(kind);
    for (lineno, line) in text.lines().enumerate() {
        let Some((key, value)) = split_pair(line) else {
            continue;
        };
        let bad = |what: &str| Error::Config {
            what: format!("config line {}: {what}", lineno + 1),
        };
        match key {
            "kind" => {}
            "n" => cfg.n = value.parse().map_err(|_| bad("n must be an integer"))?,
            "d" => cfg.d = value.parse().map_err(|_| bad("d must be an integer"))?,
            "sigma" => cfg.sigma = value.parse().map_err(|_| bad("sigma must be a number"))?,
            "alpha" => cfg.alpha = value.parse().map_err(|_| bad("alpha must be a number"))?,
            "reps" => cfg.reps = value.parse().map_err(|_| bad("reps must be an integer"))?,
            "test_size" => {
                cfg.test_size = value.parse().map_err(|_| bad("test_size must be an integer"))?
            }
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed must be an integer"))?,
            "mc_draws" => {
                cfg.mc_draws = value.parse().map_err(|_| bad("mc_draws must be an integer"))?
            }
            "method" => cfg.method = SelectMethod::parse(value)?,
            "q" => cfg.q = Exponent::parse(value)?,
            "scale_y" => {
                cfg.scale_y = value
                    .parse()
                    .map_err(|_| bad("scale_y must be true or false"))?
            }
            "cv_folds" => {
                cfg.cv_folds = value.parse().map_err(|_| bad("cv_folds must be an integer"))?
            }
            "cv_grid_points" => {
                cfg.cv_grid_points = value
                    .parse()
                    .map_err(|_| bad("cv_grid_points must be an integer"))?
            }
            "methods" => {
                let mut methods = Vec::new();
                for tok in value.split(',') {
                    methods.push(match tok.trim() {
                        "rwpi" => RunMethod::Rwpi,
                        "cv" => RunMethod::GlassoCv,
                        "ols" => RunMethod::Ols,
                        other => {
                            return Err(bad(&format!(
                                "unknown method '{other}' (expected rwpi, cv, ols)"
                            )))
                        }
                    });
                }
                cfg.methods = methods;
            }
            "data" => cfg.data_path = Some(value.to_string()),
            "response" => cfg.response = Some(value.to_string()),
            "train_size" => {
                cfg.train_size =
                    Some(value.parse().map_err(|_| bad("train_size must be an integer"))?)
            }
            "n_full" => cfg.n_full = Some(value.parse().map_err(|_| bad("n_full must be an integer"))?),
            "d_full" => cfg.d_full = Some(value.parse().map_err(|_| bad("d_full must be an integer"))?),
            "reps_full" => {
                cfg.reps_full =
                    Some(value.parse().map_err(|_| bad("reps_full must be an integer"))?)
            }
            other => {
                return Err(bad(&format!("unknown config key '{other}'")));
            }
        }
    }
    Ok(cfg)
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// One replication of one method.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub method: RunMethod,
    pub rep: usize,
    pub n: usize,
    pub d: usize,
    pub lambda: Option<f64>,
    pub train_mse: Option<f64>,
    pub test_mse: Option<f64>,
    pub l1_err: Option<f64>,
    pub l2_err: Option<f64>,
    pub coverage_hit: Option<bool>,
}

impl ExperimentRow {
    fn blank(method: RunMethod, rep: usize, n: usize, d: usize) -> Self {
        ExperimentRow {
            method,
            rep,
            n,
            d,
            lambda: None,
            train_mse: None,
            test_mse: None,
            l1_err: None,
            l2_err: None,
            coverage_hit: None,
        }
    }
}

/// Mean and spread (standard deviation across replications) per method,
/// matching the tables' `mean (+/- spread)` layout.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub method: RunMethod,
    pub n: usize,
    pub d: usize,
    pub train_mean: Option<f64>,
    pub train_sd: Option<f64>,
    pub test_mean: Option<f64>,
    pub test_sd: Option<f64>,
    pub l1_mean: Option<f64>,
    pub l2_mean: Option<f64>,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    /// Deterministic CSV of all rows; the byte-for-byte digest of a run.
    pub fn rows_csv(&self) -> String {
        let mut out =
            String::from("method,rep,n,d,lambda,train_mse,test_mse,l1_err,l2_err,coverage_hit\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.method.as_str(),
                r.rep,
                r.n,
                r.d,
                opt(r.lambda),
                opt(r.train_mse),
                opt(r.test_mse),
                opt(r.l1_err),
                opt(r.l2_err),
                r.coverage_hit.map(|h| if h { "1" } else { "0" }.to_string()).unwrap_or_default(),
            ));
        }
        out
    }

    pub fn aggregates_json(&self) -> String {
        let objs: Vec<String> = self
            .aggregates
            .iter()
            .map(|a| {
                JsonObject::new()
                    .field_str("method", a.method.as_str())
                    .field_usize("n", a.n)
                    .field_usize("d", a.d)
                    .field_opt_f64("train_mean", a.train_mean)
                    .field_opt_f64("train_sd", a.train_sd)
                    .field_opt_f64("test_mean", a.test_mean)
                    .field_opt_f64("test_sd", a.test_sd)
                    .field_opt_f64("l1_mean", a.l1_mean)
                    .field_opt_f64("l2_mean", a.l2_mean)
                    .field_opt_f64("coverage", a.coverage)
                    .finish()
            })
            .collect();
        format!("[{}]", objs.join(","))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Fraction of rows whose worst case dominated the optimal risk.
pub fn coverage_probability(rows: &[ExperimentRow]) -> Result<f64> {
    let hits: Vec<bool> = rows.iter().filter_map(|r| r.coverage_hit).collect();
    if hits.is_empty() {
        return Err(Error::EmptyInput {
            what: "coverage_probability needs rows with coverage populated",
        });
    }
    Ok(hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64)
}

struct PreparedSplit {
    train_std: Dataset,
    test_std: Dataset,
    x_scale: Vec<f64>,
    y_scale: f64,
}

/// Training-statistics standardization. The solvers carry no intercept, so
/// the response is always centered by the training mean (its scale is only
/// touched when `scale_y` asks for it); predictions then implicitly carry
/// the training-mean intercept.
fn prepare_split(train: &Dataset, test: &Dataset, scale_y: bool) -> Result<PreparedSplit> {
    let y_mean = train.y().mean();
    let center = |ds: &Dataset| -> Result<Dataset> {
        Dataset::new(ds.x().clone(), ds.y().map(|v| v - y_mean), ds.kind())
    };
    let (train_std, stats) = standardize(&center(train)?, scale_y)?;
    let test_std = apply_standardization(&center(test)?, &stats)?;
    Ok(PreparedSplit {
        train_std,
        test_std,
        x_scale: stats.x_scale.clone(),
        y_scale: stats.y_scale.unwrap_or(1.0),
    })
}

fn test_mse(ds: &Dataset, beta: &DVector<f64>) -> f64 {
    ds.mse(beta)
}

/// Coefficient mapped back to original predictor units.
fn original_units(beta: &DVector<f64>, split: &PreparedSplit) -> DVector<f64> {
    DVector::from_fn(beta.len(), |j, _| beta[j] * split.y_scale / split.x_scale[j])
}

fn coefficient_errors(
    beta: &DVector<f64>,
    beta_star: &DVector<f64>,
    split: &PreparedSplit,
) -> (f64, f64) {
    let orig = original_units(beta, split);
    let diff = &orig - beta_star;
    (diff.iter().map(|v| v.abs()).sum(), diff.norm())
}

/// Synthetic-data experiment. One replication: generate train/test data,
/// standardize with training statistics, select the penalty, fit, and
/// record errors plus whether the worst-case loss covered the optimal risk
/// `sigma^2`.
pub fn run_experiment_sim(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.reps == 0 {
        return Err(Error::Config { what: "reps must be positive".into() });
    }
    if cfg.methods.is_empty() {
        return Err(Error::Config { what: "methods must be nonempty".into() });
    }
    let master = RngSeed::new(cfg.seed);
    let p = dual_exponent(cfg.q)?;
    let rows: Result<Vec<Vec<ExperimentRow>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ExperimentRow>> {
            let rep_seed = master.child(rep as u64);
            let (train, beta_star) =
                generate_linear_data(cfg.n, cfg.d, cfg.sigma, rep_seed.child(0))?;
            let (test, _) =
                generate_linear_data(cfg.test_size, cfg.d, cfg.sigma, rep_seed.child(1))?;
            let split = prepare_split(&train, &test, cfg.scale_y)?;
            let mut out = Vec::new();
            for method in &cfg.methods {
                let row = match method {
                    RunMethod::Rwpi => {
                        let inputs = LinearSelectInputs::from_data(split.train_std.clone());
                        let choice = select_lambda_linear(
                            &inputs,
                            cfg.n,
                            cfg.alpha,
                            cfg.q,
                            cfg.method,
                            cfg.mc_draws,
                            rep_seed.child(2),
                        )?;
                        let fit = fit_sqrt_lasso(
                            &split.train_std,
                            choice.lambda,
                            p,
                            1e-8,
                            FitCaps::default(),
                        )?;
                        let (l1e, l2e) = coefficient_errors(&fit.beta, &beta_star, &split);
                        let wc = worstcase_linear_closed(
                            &split.train_std,
                            &fit.beta,
                            choice.delta,
                            p,
                            false,
                        )?;
                        ExperimentRow {
                            method: *method,
                            rep,
                            n: cfg.n,
                            d: cfg.d,
                            lambda: Some(choice.lambda),
                            train_mse: Some(split.train_std.mse(&fit.beta)),
                            test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                            l1_err: Some(l1e),
                            l2_err: Some(l2e),
                            coverage_hit: Some(cfg.sigma * cfg.sigma <= wc.value),
                        }
                    }
                    RunMethod::GlassoCv => {
                        let grid = default_cv_grid(&split.train_std, cfg.cv_grid_points);
                        let lambda = cross_validate_lambda(
                            &split.train_std,
                            cfg.cv_folds,
                            &grid,
                            CvObjective::SqrtLasso,
                            p,
                            rep_seed.child(3),
                        )?;
                        let fit = fit_sqrt_lasso(
                            &split.train_std,
                            lambda,
                            p,
                            1e-8,
                            FitCaps::default(),
                        )?;
                        let (l1e, l2e) = coefficient_errors(&fit.beta, &beta_star, &split);
                        ExperimentRow {
                            method: *method,
                            rep,
                            n: cfg.n,
                            d: cfg.d,
                            lambda: Some(lambda),
                            train_mse: Some(split.train_std.mse(&fit.beta)),
                            test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                            l1_err: Some(l1e),
                            l2_err: Some(l2e),
                            coverage_hit: None,
                        }
                    }
                    RunMethod::Ols => {
                        if cfg.n < cfg.d {
                            // The tables leave OLS blank when it is not
                            // applicable.
                            ExperimentRow::blank(*method, rep, cfg.n, cfg.d)
                        } else {
                            let fit = fit_ols(&split.train_std)?;
                            let (l1e, l2e) = coefficient_errors(&fit.beta, &beta_star, &split);
                            ExperimentRow {
                                method: *method,
                                rep,
                                n: cfg.n,
                                d: cfg.d,
                                lambda: Some(0.0),
                                train_mse: Some(split.train_std.mse(&fit.beta)),
                                test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                                l1_err: Some(l1e),
                                l2_err: Some(l2e),
                                coverage_hit: None,
                            }
                        }
                    }
                };
                out.push(row);
            }
            Ok(out)
        })
        .collect();
    let rows: Vec<ExperimentRow> = rows?.into_iter().flatten().collect();
    let aggregates = aggregate(&rows, &cfg.methods, cfg.n, cfg.d);
    Ok(ExperimentReport { rows, aggregates })
}

/// CSV-backed experiment: repeated uniformly random train/test splits of a
/// user-supplied dataset.
pub fn run_experiment_csv(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let path = cfg.data_path.as_ref().ok_or_else(|| Error::Config {
        what: "csv experiment needs a data path".into(),
    })?;
    let response = cfg.response.as_ref().ok_or_else(|| Error::Config {
        what: "csv experiment needs a response column".into(),
    })?;
    let train_size = cfg.train_size.ok_or_else(|| Error::Config {
        what: "csv experiment needs train_size".into(),
    })?;
    if cfg.reps == 0 {
        return Err(Error::Config { what: "reps must be positive".into() });
    }
    let full = read_csv(path, response, TaskKind::Regression)?;
    let total = full.n();
    if train_size >= total {
        return Err(Error::Config {
            what: format!(
                "train_size = {train_size} leaves no test rows out of {total}"
            ),
        });
    }
    let master = RngSeed::new(cfg.seed);
    let p = dual_exponent(cfg.q)?;
    let rows: Result<Vec<Vec<ExperimentRow>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ExperimentRow>> {
            let rep_seed = master.child(rep as u64);
            // Seeded uniform split.
            let mut order: Vec<usize> = (0..total).collect();
            let mut rng = rep_seed.stream(0);
            for i in (1..total).rev() {
                let j = rand::Rng::gen_range(&mut rng, 0..=i);
                order.swap(i, j);
            }
            let (train_rows, test_rows) = order.split_at(train_size);
            let train = subset(&full, train_rows)?;
            let test = subset(&full, test_rows)?;
            let split = prepare_split(&train, &test, cfg.scale_y)?;
            let mut out = Vec::new();
            for method in &cfg.methods {
                let row = match method {
                    RunMethod::Rwpi => {
                        let inputs = LinearSelectInputs::from_data(split.train_std.clone());
                        let choice = select_lambda_linear(
                            &inputs,
                            train_size,
                            cfg.alpha,
                            cfg.q,
                            cfg.method,
                            cfg.mc_draws,
                            rep_seed.child(2),
                        )?;
                        let fit = fit_sqrt_lasso(
                            &split.train_std,
                            choice.lambda,
                            p,
                            1e-8,
                            FitCaps::default(),
                        )?;
                        ExperimentRow {
                            method: *method,
                            rep,
                            n: train_size,
                            d: full.d(),
                            lambda: Some(choice.lambda),
                            train_mse: Some(split.train_std.mse(&fit.beta)),
                            test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                            l1_err: None,
                            l2_err: None,
                            coverage_hit: None,
                        }
                    }
                    RunMethod::GlassoCv => {
                        let grid = default_cv_grid(&split.train_std, cfg.cv_grid_points);
                        let lambda = cross_validate_lambda(
                            &split.train_std,
                            cfg.cv_folds,
                            &grid,
                            CvObjective::SqrtLasso,
                            p,
                            rep_seed.child(3),
                        )?;
                        let fit = fit_sqrt_lasso(
                            &split.train_std,
                            lambda,
                            p,
                            1e-8,
                            FitCaps::default(),
                        )?;
                        ExperimentRow {
                            method: *method,
                            rep,
                            n: train_size,
                            d: full.d(),
                            lambda: Some(lambda),
                            train_mse: Some(split.train_std.mse(&fit.beta)),
                            test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                            l1_err: None,
                            l2_err: None,
                            coverage_hit: None,
                        }
                    }
                    RunMethod::Ols => {
                        if train_size < full.d() {
                            ExperimentRow::blank(*method, rep, train_size, full.d())
                        } else {
                            let fit = fit_ols(&split.train_std)?;
                            ExperimentRow {
                                method: *method,
                                rep,
                                n: train_size,
                                d: full.d(),
                                lambda: Some(0.0),
                                train_mse: Some(split.train_std.mse(&fit.beta)),
                                test_mse: Some(test_mse(&split.test_std, &fit.beta)),
                                l1_err: None,
                                l2_err: None,
                                coverage_hit: None,
                            }
                        }
                    }
                };
                out.push(row);
            }
            Ok(out)
        })
        .collect();
    let rows: Vec<ExperimentRow> = rows?.into_iter().flatten().collect();
    let aggregates = aggregate(&rows, &cfg.methods, train_size, full.d());
    Ok(ExperimentReport { rows, aggregates })
}

fn subset(ds: &Dataset, rows: &[usize]) -> Result<Dataset> {
    let x = ds.x().select_rows(rows.iter());
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| ds.y()[i]));
    Dataset::new(x, y, ds.kind())
}

fn aggregate(
    rows: &[ExperimentRow],
    methods: &[RunMethod],
    n: usize,
    d: usize,
) -> Vec<Aggregate> {
    methods
        .iter()
        .map(|m| {
            let mine: Vec<&ExperimentRow> = rows.iter().filter(|r| r.method == *m).collect();
            let (train_mean, train_sd) = mean_sd(mine.iter().filter_map(|r| r.train_mse));
            let (test_mean, test_sd) = mean_sd(mine.iter().filter_map(|r| r.test_mse));
            let (l1_mean, _) = mean_sd(mine.iter().filter_map(|r| r.l1_err));
            let (l2_mean, _) = mean_sd(mine.iter().filter_map(|r| r.l2_err));
            let hits: Vec<bool> = mine.iter().filter_map(|r| r.coverage_hit).collect();
            Aggregate {
                method: *m,
                n,
                d,
                train_mean,
                train_sd,
                test_mean,
                test_sd,
                l1_mean,
                l2_mean,
                coverage: if hits.is_empty() {
                    None
                } else {
                    Some(hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64)
                },
            }
        })
        .collect()
}

fn mean_sd(values: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (None, None);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() as f64 - 1.0);
    (Some(mean), Some(var.sqrt()))
}
