//! The `rwpi` command-line surface.
//!
//! Exit codes: 0 on success, 2 on usage errors (unparseable or missing
//! flags, with a diagnostic naming the flag), 1 on runtime errors.
//! All randomness is driven by an explicit `--seed`; there is no
//! wall-clock default.

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use crate::cost::CostSpec;
use crate::dataset::{read_csv, write_csv, TaskKind};
use crate::error::{Error, Result};
use crate::estimating::mean_equation;
use crate::gaussian::{sample_covariance, second_moment, CovFactor};
use crate::limits::{growth_c, law_by_name, quantile, LawInputs, LimitSampleBatch};
use crate::norms::{dual_exponent, Exponent};
use crate::pipeline::{
    parse_config, run_experiment_csv, run_experiment_sim, select_lambda_linear,
    select_lambda_logistic_with_moment, CovSource, ExperimentKind,
    ExperimentReport, L1Model, LinearSelectInputs, SelectMethod,
};
use crate::profile::{rwp_generic_dual, rwp_linear_q2, rwp_mean, GenericDualOpts};
use crate::report::{
    fit_result_json, quantile_json, regularization_choice_json, rwp_value_json, worst_case_json,
    JsonObject,
};
use crate::rng::RngSeed;
use crate::solvers::{estimator_by_name, fit_ols, FitConfig};
use crate::worstcase::{
    worstcase_dual_numeric, worstcase_hinge_closed, worstcase_linear_closed,
    worstcase_logistic_closed,
};

#[derive(Parser)]
#[command(name = "rwpi", version, about = "Robust Wasserstein profile inference", disable_help_subcommand = true)]
struct Cli {
    /// Worker threads for parallel sections (default: available
    /// parallelism). Results never depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic sparse regression dataset as CSV.
    GenData {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Select the ball radius / penalty without cross-validation.
    SelectLambda {
        /// One of: l1, l2, l4, highdim.
        #[arg(long)]
        method: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        data: Option<String>,
        /// Response column; needed by l1 (pilot residuals) and l4.
        #[arg(long)]
        response: Option<String>,
        /// Transport cost exponent (default inf).
        #[arg(long)]
        q: Option<String>,
        /// Monte-Carlo draws for the sampled methods (default 2000).
        #[arg(long)]
        mc: Option<usize>,
        /// Required for the sampled methods l1/l2/l4.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit an estimator (sqrt-lasso, logistic, ols).
    Fit {
        #[arg(long)]
        model: String,
        #[arg(long)]
        lambda: Option<f64>,
        /// Penalty exponent, 1 or 2 (default 1).
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        data: String,
        #[arg(long)]
        response: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Worst-case expected loss over the transport ball at a fitted beta.
    WorstCase {
        /// One of: square, logistic, hinge.
        #[arg(long)]
        loss: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        data: String,
        #[arg(long)]
        response: String,
        #[arg(long)]
        beta_file: String,
        /// Evaluate the square loss through the scalar dual instead of the
        /// closed form.
        #[arg(long)]
        dual: bool,
        /// Use the plain norm cost (penalizes the extended (-beta, 1)).
        #[arg(long)]
        barbeta: bool,
    },
    /// Evaluate the profile function R_n.
    Rwp {
        /// One of: mean, linear-q2, generic.
        #[arg(long)]
        mode: String,
        /// Parameter vector (comma-separated) for mean/generic modes.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        beta_file: Option<String>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        data: String,
        #[arg(long)]
        response: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Seed for multistart perturbations (generic mode).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Draw a Monte-Carlo batch from a limit law and report a quantile.
    SimulateLimit {
        /// One of: rbar, rbar1, l1, l2, l4.
        #[arg(long)]
        law: String,
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        response: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        /// Transport cost exponent (default inf); laws on the dual side
        /// (rbar, rbar1, l1) apply the conjugate internally.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        beta_file: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        /// Quantile level to report (default 0.95).
        #[arg(long)]
        level: Option<f64>,
        /// Write the batch as columnar CSV (law,index,value).
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a replicated experiment from a config file.
    Experiment {
        #[arg(long)]
        config: String,
        /// Use the config's full-scale sizes (n_full/d_full/reps_full).
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out_rows: Option<String>,
        #[arg(long)]
        out_json: Option<String>,
    },
}

/// Parses and runs; returns the process exit status.
pub fn dispatch(args: Vec<String>) -> i32 {
    let mut argv = vec!["rwpi".to_string()];
    argv.extend(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are successful exits; everything else is usage.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // Only the first initialization wins; later calls are harmless
        // because results never depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_exponent(text: &Option<String>, default: Exponent, flag: &str) -> std::result::Result<Exponent, CliError> {
    match text {
        None => Ok(default),
        Some(t) => Exponent::parse(t).map_err(|_| usage(format!("{flag} must be a number >= 1 or 'inf', got '{t}'"))),
    }
}

fn parse_vector(text: &str, flag: &str) -> std::result::Result<DVector<f64>, CliError> {
    let vals: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    vals.map(DVector::from_vec)
        .map_err(|_| usage(format!("{flag} must be a comma-separated list of numbers")))
}

/// Reads a numeric CSV as a plain matrix (all columns), header required.
fn read_matrix(path: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_string(),
            what: e.to_string(),
        })?;
    let width = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_string(),
            what: e.to_string(),
        })?
        .len();
    let mut data: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_string(),
            what: format!("line {}: {e}", line + 2),
        })?;
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Csv {
                path: path.to_string(),
                what: format!("line {}: cannot parse '{field}'", line + 2),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyInput { what: "csv has no data rows" });
    }
    Ok(DMatrix::from_row_slice(rows, width, &data))
}

fn read_beta(path: &str) -> std::result::Result<DVector<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Runtime(Error::Io {
            path: path.to_string(),
            source: e,
        })
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Runtime(Error::Config {
            what: format!("beta file {path}: {e}"),
        })
    })?;
    let arr = value
        .get("beta")
        .and_then(|b| b.as_array())
        .or_else(|| value.as_array())
        .ok_or_else(|| {
            CliError::Runtime(Error::Config {
                what: format!("beta file {path}: expected a JSON array or an object with a 'beta' array"),
            })
        })?;
    let mut out = Vec::with_capacity(arr.len());
    for v in arr {
        out.push(v.as_f64().ok_or_else(|| {
            CliError::Runtime(Error::Config {
                what: format!("beta file {path}: non-numeric entry"),
            })
        })?);
    }
    Ok(DVector::from_vec(out))
}

fn write_or_print(text: &str, path: &Option<String>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> std::result::Result<(), CliError> {
    match command {
        Command::GenData { n, d, sigma, seed, out } => {
            let (ds, beta) = crate::pipeline::generate_linear_data(n, d, sigma, RngSeed::new(seed))?;
            write_csv(&ds, &out)?;
            let json = JsonObject::new()
                .field_usize("n", n)
                .field_usize("d", d)
                .field_f64("sigma", sigma)
                .field_u64("seed", seed)
                .field_str("out", &out)
                .field_vec_f64("beta_star", beta.as_slice())
                .finish();
            println!("{json}");
            Ok(())
        }
        Command::SelectLambda { method, alpha, n, d, data, response, q, mc, seed } => {
            let method = SelectMethod::parse(&method).map_err(|e| usage(e.to_string()))?;
            let q = parse_exponent(&q, Exponent::Infinity, "--q")?;
            let mc = mc.unwrap_or(2_000);
            if method != SelectMethod::Highdim && seed.is_none() {
                return Err(usage("--seed is required for the sampled methods (l1, l2, l4)"));
            }
            let seed = RngSeed::new(seed.unwrap_or(0));
            let choice = match method {
                SelectMethod::L4 => {
                    let (factor, n_eff) = match (&data, &response) {
                        (Some(path), Some(resp)) => {
                            let ds = read_csv(path, resp, TaskKind::Binary)?;
                            (CovFactor::from_covariance(&second_moment(ds.x())?)?, ds.n())
                        }
                        (Some(path), None) => {
                            let x = read_matrix(path)?;
                            (CovFactor::from_covariance(&second_moment(&x)?)?, n)
                        }
                        (None, _) => {
                            let d = d.ok_or_else(|| usage("method l4 needs --data or --d"))?;
                            (CovFactor::identity(d), n)
                        }
                    };
                    let _ = n_eff;
                    select_lambda_logistic_with_moment(&factor, n, alpha, q, mc, seed)?
                }
                SelectMethod::L1 => {
                    let path = data.as_ref().ok_or_else(|| usage("method l1 needs --data"))?;
                    let resp = response
                        .as_ref()
                        .ok_or_else(|| usage("method l1 needs --response for the pilot fit"))?;
                    let ds = read_csv(path, resp, TaskKind::Regression)?;
                    // Pilot plug-in: least-squares coefficient, residual
                    // errors, and the predictor rows as the SAA sample.
                    let pilot = fit_ols(&ds)?;
                    let resid = ds.y() - ds.x() * &pilot.beta;
                    let sigma_hat = (resid.norm_squared() / ds.n() as f64).sqrt();
                    let inputs = LinearSelectInputs {
                        cov: CovSource::Data(ds.clone()),
                        l1_model: Some(L1Model {
                            sigma: sigma_hat,
                            beta_star: pilot.beta.clone(),
                            x_saa: ds.x().clone(),
                            e_saa: resid.iter().cloned().collect(),
                        }),
                        error_factor: None,
                    };
                    select_lambda_linear(&inputs, n, alpha, q, method, mc, seed)?
                }
                SelectMethod::L2 | SelectMethod::Highdim => {
                    let cov = match (&data, d) {
                        (Some(path), _) => match &response {
                            Some(resp) => {
                                let ds = read_csv(path, resp, TaskKind::Regression)?;
                                CovSource::Data(ds)
                            }
                            None => {
                                let x = read_matrix(path)?;
                                CovSource::Factor(CovFactor::from_covariance(&sample_covariance(&x)?)?)
                            }
                        },
                        (None, Some(d)) => CovSource::Dim(d),
                        (None, None) => {
                            return Err(usage(format!(
                                "method {} needs --data or --d",
                                method.as_str()
                            )))
                        }
                    };
                    let inputs = LinearSelectInputs {
                        cov,
                        l1_model: None,
                        error_factor: None,
                    };
                    select_lambda_linear(&inputs, n, alpha, q, method, mc, seed)?
                }
            };
            let mut json = regularization_choice_json(&choice);
            if method == SelectMethod::Highdim {
                if let Some(path) = &data {
                    let x = read_matrix(path)?;
                    let c = growth_c(&x, n)?;
                    json = format!(
                        "{}{}}}",
                        &json[..json.len() - 1],
                        format_args!(",\"growth_c\":{}", crate::report::fmt_f64(c))
                    );
                }
            }
            println!("{json}");
            Ok(())
        }
        Command::Fit { model, lambda, p, data, response, out } => {
            let estimator = estimator_by_name(&model).map_err(|e| usage(e.to_string()))?;
            let kind = if model == "logistic" {
                TaskKind::Binary
            } else {
                TaskKind::Regression
            };
            let lambda = match (model.as_str(), lambda) {
                ("ols", l) => l.unwrap_or(0.0),
                (_, Some(l)) => l,
                (_, None) => return Err(usage("--lambda is required for penalized models")),
            };
            let p = parse_exponent(&p, Exponent::one(), "--p")?;
            let ds = read_csv(&data, &response, kind)?;
            let fit = estimator.fit(&ds, &FitConfig::new(lambda, p))?;
            let json = fit_result_json(&fit);
            if out.is_some() {
                write_or_print(&json, &out)?;
            }
            println!("{json}");
            Ok(())
        }
        Command::WorstCase { loss, delta, p, data, response, beta_file, dual, barbeta } => {
            let p = parse_exponent(&p, Exponent::one(), "--p")?;
            let beta = read_beta(&beta_file)?;
            let wc = match loss.as_str() {
                "square" => {
                    let ds = read_csv(&data, &response, TaskKind::Regression)?;
                    if dual {
                        worstcase_dual_numeric(&ds, &beta, delta, p, barbeta)?
                    } else {
                        worstcase_linear_closed(&ds, &beta, delta, p, barbeta)?
                    }
                }
                "logistic" => {
                    let ds = read_csv(&data, &response, TaskKind::Binary)?;
                    worstcase_logistic_closed(&ds, &beta, delta, p)?
                }
                "hinge" => {
                    let ds = read_csv(&data, &response, TaskKind::Binary)?;
                    worstcase_hinge_closed(&ds, &beta, delta, p)?
                }
                other => return Err(usage(format!("--loss must be square, logistic or hinge, got '{other}'"))),
            };
            println!("{}", worst_case_json(&wc));
            Ok(())
        }
        Command::Rwp { mode, theta, beta_file, rho, data, response, q, tol, seed, starts } => {
            let value = match mode.as_str() {
                "mean" => {
                    let theta = theta
                        .as_ref()
                        .ok_or_else(|| usage("--theta is required for --mode mean"))?;
                    let theta: f64 = theta
                        .parse()
                        .map_err(|_| usage("--theta must be a number for --mode mean"))?;
                    let rho = rho.unwrap_or(2.0);
                    let m = read_matrix(&data)?;
                    let column = single_column(&m, &response, &data)?;
                    rwp_mean(&column, theta, rho)?
                }
                "linear-q2" => {
                    let beta_file = beta_file
                        .as_ref()
                        .ok_or_else(|| usage("--beta-file is required for --mode linear-q2"))?;
                    let resp = response
                        .as_ref()
                        .ok_or_else(|| usage("--response is required for --mode linear-q2"))?;
                    let beta = read_beta(beta_file)?;
                    let ds = read_csv(&data, resp, TaskKind::Regression)?;
                    rwp_linear_q2(&ds, &beta, tol.unwrap_or(1e-8))?
                }
                "generic" => {
                    let theta = theta
                        .as_ref()
                        .ok_or_else(|| usage("--theta is required for --mode generic"))?;
                    let theta = parse_vector(theta, "--theta")?;
                    let seed = seed.ok_or_else(|| usage("--seed is required for --mode generic"))?;
                    let samples = read_matrix(&data)?;
                    if samples.ncols() != theta.len() {
                        return Err(CliError::Runtime(Error::DimensionMismatch {
                            what: "theta length vs data columns",
                            expected: samples.ncols(),
                            got: theta.len(),
                        }));
                    }
                    let eq = mean_equation(samples.ncols());
                    let cost = CostSpec::new(
                        parse_exponent(&q, Exponent::two(), "--q")?,
                        rho.unwrap_or(2.0),
                        false,
                    )?;
                    let mut opts = GenericDualOpts::new(RngSeed::new(seed));
                    if let Some(t) = tol {
                        opts.tol = t;
                    }
                    if let Some(s) = starts {
                        opts.multistarts = s;
                    }
                    rwp_generic_dual(&samples, &eq, &theta, &cost, &opts)?
                }
                other => return Err(usage(format!("--mode must be mean, linear-q2 or generic, got '{other}'"))),
            };
            println!("{}", rwp_value_json(&value));
            Ok(())
        }
        Command::SimulateLimit { law, draws, seed, data, response, d, q, rho, sigma, beta_file, theta, level, out } => {
            let law = law_by_name(&law).map_err(|e| usage(e.to_string()))?;
            let q = parse_exponent(&q, Exponent::Infinity, "--q")?;
            let seed = RngSeed::new(seed);
            let batch = build_law_inputs(
                law.as_ref(),
                q,
                rho,
                sigma,
                &data,
                &response,
                d,
                &beta_file,
                &theta,
            )
            .and_then(|inputs| Ok(law.sample(&inputs, draws, seed)?))?;
            emit_batch(&batch, &out, level)?;
            Ok(())
        }
        Command::Experiment { config, full, out_rows, out_json } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Runtime(Error::Io {
                    path: config.clone(),
                    source: e,
                })
            })?;
            let mut cfg = parse_config(&text)?;
            if full {
                cfg = cfg.at_full_scale()?;
            }
            let report = match cfg.kind {
                ExperimentKind::Sim => run_experiment_sim(&cfg)?,
                ExperimentKind::Csv => run_experiment_csv(&cfg)?,
            };
            emit_report(&report, &out_rows, &out_json)?;
            Ok(())
        }
    }
}

fn single_column(
    m: &DMatrix<f64>,
    response: &Option<String>,
    path: &str,
) -> std::result::Result<Vec<f64>, CliError> {
    if m.ncols() == 1 {
        return Ok(m.column(0).iter().cloned().collect());
    }
    match response {
        Some(_) => {
            // Re-read keyed on the response header.
            Err(usage("--mode mean expects a single-column csv; use the column name via --response with a multi-column file is not supported"))
        }
        None => Err(usage(format!(
            "--mode mean expects a single-column csv, but {path} has {} columns",
            m.ncols()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_law_inputs(
    law: &dyn crate::limits::LimitLaw,
    q: Exponent,
    rho: Option<f64>,
    sigma: Option<f64>,
    data: &Option<String>,
    response: &Option<String>,
    d: Option<usize>,
    beta_file: &Option<String>,
    theta: &Option<String>,
) -> std::result::Result<LawInputs, CliError> {
    // Laws formulated on the dual side take the conjugate exponent.
    let exponent = match law.name() {
        "rbar" | "rbar1" | "l1" => dual_exponent(q)?,
        _ => q,
    };
    let mut inputs = LawInputs::new(exponent);
    inputs.rho = rho.unwrap_or(2.0);
    match law.name() {
        "l2" => {
            inputs.error_factor = Some(crate::limits::normal_error_factor());
            inputs.cov = Some(cov_from(data, d, false)?);
        }
        "l4" => {
            inputs.cov = Some(cov_from(data, d, true)?);
        }
        "l1" => {
            let path = data.as_ref().ok_or_else(|| usage("law l1 needs --data"))?;
            let resp = response.as_ref().ok_or_else(|| usage("law l1 needs --response"))?;
            let beta_path = beta_file
                .as_ref()
                .ok_or_else(|| usage("law l1 needs --beta-file"))?;
            let ds = read_csv(path, resp, TaskKind::Regression)?;
            let beta = read_beta(beta_path)?;
            if beta.len() != ds.d() {
                return Err(CliError::Runtime(Error::DimensionMismatch {
                    what: "beta length vs predictors",
                    expected: ds.d(),
                    got: beta.len(),
                }));
            }
            let resid = ds.y() - ds.x() * &beta;
            let sigma = match sigma {
                Some(s) => s,
                None => (resid.norm_squared() / ds.n() as f64).sqrt(),
            };
            inputs.cov = Some(CovFactor::from_covariance(&sample_covariance(ds.x())?)?);
            inputs.sigma = Some(sigma);
            inputs.beta_star = Some(beta);
            inputs.e_saa = Some(resid.iter().cloned().collect());
            inputs.x_saa = Some(ds.x().clone());
        }
        "rbar" | "rbar1" => {
            // The command line exposes the mean estimating equation
            // h(w, theta) = w - theta; richer equations go through the
            // library API.
            let path = data.as_ref().ok_or_else(|| usage("laws rbar/rbar1 need --data"))?;
            let w = read_matrix(path)?;
            let m = w.ncols();
            let theta = match theta {
                Some(t) => parse_vector(t, "--theta")?,
                None => {
                    // Plug-in: the column means, i.e. the solved equation.
                    DVector::from_fn(m, |j, _| w.column(j).mean())
                }
            };
            if theta.len() != m {
                return Err(CliError::Runtime(Error::DimensionMismatch {
                    what: "theta length vs data columns",
                    expected: m,
                    got: theta.len(),
                }));
            }
            let mut h = DMatrix::zeros(w.nrows(), m);
            for i in 0..w.nrows() {
                for j in 0..m {
                    h[(i, j)] = w[(i, j)] - theta[j];
                }
            }
            inputs.h_samples = Some(h);
            inputs.dh_samples = Some(vec![DMatrix::identity(m, m); w.nrows()]);
        }
        _ => {}
    }
    Ok(inputs)
}

fn cov_from(
    data: &Option<String>,
    d: Option<usize>,
    uncentered: bool,
) -> std::result::Result<CovFactor, CliError> {
    match (data, d) {
        (Some(path), _) => {
            let x = read_matrix(path)?;
            let m = if uncentered {
                second_moment(&x)?
            } else {
                sample_covariance(&x)?
            };
            Ok(CovFactor::from_covariance(&m)?)
        }
        (None, Some(d)) => Ok(CovFactor::identity(d)),
        (None, None) => Err(usage("this law needs --data or --d")),
    }
}

fn emit_batch(
    batch: &LimitSampleBatch,
    out: &Option<String>,
    level: Option<f64>,
) -> std::result::Result<(), CliError> {
    let csv = batch.to_csv();
    if let Some(path) = out {
        std::fs::write(path, &csv).map_err(|e| {
            CliError::Runtime(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
    }
    let mut obj = JsonObject::new()
        .field_str("law", batch.law.as_str())
        .field_usize("draws", batch.values.len())
        .field_u64("seed", batch.seed.master());
    if let Some(s) = batch.meta.saa_size {
        obj = obj.field_usize("saa_size", s);
    }
    if !batch.values.is_empty() {
        let q = quantile(batch, level.unwrap_or(0.95))?;
        obj = obj.field_raw("quantile", &quantile_json(&q));
    }
    if let Some(path) = out {
        obj = obj.field_str("out", path);
    }
    println!("{}", obj.finish());
    Ok(())
}

fn emit_report(
    report: &ExperimentReport,
    out_rows: &Option<String>,
    out_json: &Option<String>,
) -> std::result::Result<(), CliError> {
    if let Some(path) = out_rows {
        std::fs::write(path, report.rows_csv()).map_err(|e| {
            CliError::Runtime(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
    }
    let json = report.aggregates_json();
    if let Some(path) = out_json {
        std::fs::write(path, &json).map_err(|e| {
            CliError::Runtime(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
    }
    println!("{json}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_verb_is_usage() {
        assert_eq!(dispatch(vec!["frobnicate".into()]), 2);
    }

    #[test]
    fn highdim_without_seed_is_fine() {
        assert_eq!(
            dispatch(vec![
                "select-lambda".into(),
                "--method".into(),
                "highdim".into(),
                "--n".into(),
                "10000".into(),
                "--d".into(),
                "300".into(),
                "--alpha".into(),
                "0.05".into(),
            ]),
            0
        );
    }

    #[test]
    fn sampled_method_without_seed_is_usage() {
        assert_eq!(
            dispatch(vec![
                "select-lambda".into(),
                "--method".into(),
                "l2".into(),
                "--n".into(),
                "100".into(),
                "--d".into(),
                "3".into(),
                "--alpha".into(),
                "0.05".into(),
            ]),
            2
        );
    }
}
