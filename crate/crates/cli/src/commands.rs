use std::cmp::Ordering;
use std::fmt::Write as _;

use gmopg::inference::{
    compare_models_with, descriptive, ttt_curve, validate_table3, Descriptive, FitResult, Lifetime,
    LifetimeDistribution, ModelConfig, ModelKind, OptimizerSettings,
};
use gmopg::simulation::{full_sample_sizes, mc_study_with, StudyOptions, DEFAULT_SAMPLE_SIZES};
use gmopg::{BaselineSpec, GmopgParams};
use serde_json::{json, Value};

use crate::data::read_dataset;
use crate::report::{csv_number, num, PlotBlock, Report};
use crate::{
    Cli, CliError, Command, EvalArgs, FitArgs, ParamArgs, SampleArgs, SimulateArgs, TttArgs,
    EXIT_NOT_CONVERGED, EXIT_OK,
};

const PLOT_POINTS: usize = 201;

pub fn dispatch(cli: &Cli, echo: &[String]) -> Result<i32, CliError> {
    match &cli.command {
        Command::Fit(args) => cmd_fit(args, cli.seed, echo),
        Command::Eval(args) => cmd_eval(args, cli.seed, echo),
        Command::Sample(args) => cmd_sample(args, cli.seed),
        Command::Simulate(args) => cmd_simulate(args, cli.seed, echo),
        Command::Ttt(args) => cmd_ttt(args, cli.seed, echo),
    }
}

pub fn params_from(args: &ParamArgs) -> Result<GmopgParams, CliError> {
    build_params(args.theta, args.alpha, args.lambda, args.beta, args.shape)
}

fn build_params(
    theta: f64,
    alpha: f64,
    lambda: f64,
    beta: f64,
    shape: Option<f64>,
) -> Result<GmopgParams, CliError> {
    let baseline = match shape {
        Some(shape) => BaselineSpec::weibull(beta, shape),
        None => BaselineSpec::exponential(beta),
    }
    .map_err(|e| CliError::Input(e.to_string()))?;
    GmopgParams::new(theta, alpha, lambda, baseline).map_err(|e| CliError::Input(e.to_string()))
}

fn params_json(p: &GmopgParams) -> Value {
    let mut v = json!({
        "theta": num(p.theta),
        "alpha": num(p.alpha),
        "lambda": num(p.lambda),
        "beta": num(p.baseline.rate()),
        "baseline": p.baseline.name(),
    });
    if let BaselineSpec::Weibull { shape, .. } = p.baseline {
        v["shape"] = num(shape);
    }
    v
}

/// Parses `start:end:points`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("invalid grid '{spec}': expected start:end:points"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, m] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b <= a {
        return Err(CliError::Input(format!(
            "invalid grid '{spec}': need 0 <= start < end"
        )));
    }
    if m < 2 {
        return Err(CliError::Input(format!(
            "invalid grid '{spec}': need at least 2 points"
        )));
    }
    Ok(linspace(a, b, m))
}

fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    let step = (b - a) / (m - 1) as f64;
    (0..m)
        .map(|i| if i + 1 == m { b } else { a + step * i as f64 })
        .collect()
}

fn descriptive_json(d: &Descriptive) -> Value {
    json!({
        "n": d.n,
        "min": num(d.min),
        "q1": num(d.q1),
        "median": num(d.median),
        "mean": num(d.mean),
        "q3": num(d.q3),
        "max": num(d.max),
        "sd": num(d.sd),
        "skewness": num(d.skewness),
        "kurtosis": num(d.kurtosis),
    })
}

fn five_number_json(d: &Descriptive) -> Value {
    json!({
        "min": num(d.min),
        "q1": num(d.q1),
        "median": num(d.median),
        "q3": num(d.q3),
        "max": num(d.max),
    })
}

fn fit_json(fit: &FitResult) -> Value {
    let parameters: Vec<Value> = fit
        .parameter_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let (lo, hi) = fit.confidence_intervals[i];
            json!({
                "name": name.as_str(),
                "estimate": num(fit.estimates[i]),
                "standard_error": num(fit.standard_errors[i]),
                "ci95": [num(lo), num(hi)],
            })
        })
        .collect();
    let fixed: Vec<Value> = ModelConfig::new(fit.model)
        .fixed
        .iter()
        .map(|f| json!({"name": f.name.as_str(), "value": num(f.value)}))
        .collect();
    let c = &fit.convergence;
    json!({
        "model": fit.model.label(),
        "tag": fit.model.tag(),
        "status": if c.converged { "converged" } else { "not_converged" },
        "parameters": parameters,
        "fixed": fixed,
        "information_error": fit.information_error,
        "log_likelihood": num(fit.log_likelihood),
        "k": fit.k(),
        "n": fit.n,
        "criteria": {
            "aic": num(fit.criteria.aic),
            "bic": num(fit.criteria.bic),
            "caic": num(fit.criteria.caic),
            "hqic": num(fit.criteria.hqic),
        },
        "gof": {
            "ks": num(fit.gof.ks),
            "ks_p_value": num(fit.gof.ks_p_value),
            "anderson_darling": num(fit.gof.anderson_darling),
            "cramer_von_mises": num(fit.gof.cramer_von_mises),
            "clamped": fit.gof.clamped,
        },
        "convergence": {
            "converged": c.converged,
            "iterations": c.iterations,
            "evaluations": c.evaluations,
            "restarts": c.restarts,
            "starts": c.starts,
            "failed_starts": c.failed_starts,
            "best_start": c.best_start,
            "gradient_norm": num(c.gradient_norm),
        },
    })
}

fn comparison_row(fit: &FitResult) -> Value {
    json!({
        "model": fit.model.label(),
        "tag": fit.model.tag(),
        "k": fit.k(),
        "log_likelihood": num(fit.log_likelihood),
        "aic": num(fit.criteria.aic),
        "bic": num(fit.criteria.bic),
        "caic": num(fit.criteria.caic),
        "hqic": num(fit.criteria.hqic),
        "anderson_darling": num(fit.gof.anderson_darling),
        "cramer_von_mises": num(fit.gof.cramer_von_mises),
        "ks": num(fit.gof.ks),
        "ks_p_value": num(fit.gof.ks_p_value),
    })
}

/// Finite AIC first in ascending order, then non-finite, stable otherwise.
fn aic_order(a: f64, b: f64) -> Ordering {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a.total_cmp(&b),
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => Ordering::Equal,
    }
}

fn distribution_block(name: String, dist: &LifetimeDistribution, grid: &[f64]) -> PlotBlock {
    let mut block = PlotBlock::new(name, &["t", "pdf", "cdf", "hazard"]);
    for &t in grid {
        let pdf = dist.ln_pdf(t).exp();
        block.rows.push(vec![t, pdf, dist.cdf(t), pdf / dist.sf(t)]);
    }
    block
}

fn ttt_block(data: &[f64]) -> Result<PlotBlock, CliError> {
    let mut block = PlotBlock::new("ttt", &["u", "ttt"]);
    block.rows = ttt_curve(data)?
        .into_iter()
        .map(|(u, t)| vec![u, t])
        .collect();
    Ok(block)
}

pub fn cmd_fit(args: &FitArgs, seed: u64, echo: &[String]) -> Result<i32, CliError> {
    let data = read_dataset(&args.data)?;
    let kinds = args
        .models
        .iter()
        .map(|m| {
            m.parse::<ModelKind>()
                .map_err(|e| CliError::Input(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(CliError::Input("no models requested".into()));
    }
    if args.starts == 0 {
        return Err(CliError::Input("--starts must be at least 1".into()));
    }
    let summary = if args.expect_table3 {
        validate_table3(&data.values).map_err(|e| CliError::Input(e.to_string()))?
    } else {
        descriptive(&data.values)?
    };

    let settings = OptimizerSettings {
        seed,
        multistarts: args.starts,
        ..Default::default()
    };
    let results = compare_models_with(&data.values, &kinds, &settings);

    let mut report = Report::new("fit", echo, Some(seed));
    report.set_input(&data);
    report.section("descriptive", descriptive_json(&summary));

    let max = data.values.iter().cloned().fold(0.0, f64::max);
    let grid = linspace(0.0, 1.1 * max, PLOT_POINTS);
    let mut all_converged = true;
    let mut models = Vec::new();
    let mut fitted: Vec<&FitResult> = Vec::new();
    for (kind, result) in &results {
        match result {
            Ok(fit) => {
                all_converged &= fit.convergence.converged;
                models.push(fit_json(fit));
                fitted.push(fit);
                report.plots.push(distribution_block(
                    format!("fit:{}", kind.tag()),
                    &fit.distribution,
                    &grid,
                ));
            }
            Err(e) => {
                all_converged = false;
                log::warn!("{} fit failed: {e}", kind.label());
                models.push(json!({
                    "model": kind.label(),
                    "tag": kind.tag(),
                    "status": "failed",
                    "error": e.to_string(),
                }));
            }
        }
    }
    fitted.sort_by(|a, b| aic_order(a.criteria.aic, b.criteria.aic));
    report.section("models", Value::Array(models));
    report.section(
        "comparison",
        Value::Array(fitted.iter().map(|f| comparison_row(f)).collect()),
    );
    report.plots.push(ttt_block(&data.values)?);
    report.emit(args.output.out.as_deref(), args.output.plot_csv.as_deref())?;
    Ok(if all_converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn cmd_eval(args: &EvalArgs, seed: u64, echo: &[String]) -> Result<i32, CliError> {
    let params = params_from(&args.params)?;
    let grid = match &args.grid {
        Some(spec) => parse_grid(spec)?,
        None => linspace(0.0, params.quantile(0.999), PLOT_POINTS),
    };
    let mut block = PlotBlock::new("eval", &["t", "pdf", "cdf", "survival", "hazard"]);
    for &t in &grid {
        block.rows.push(vec![
            t,
            params.pdf(t),
            params.cdf(t),
            params.sf(t),
            params.hazard(t),
        ]);
    }
    let mut report = Report::new("eval", echo, Some(seed));
    report.section("parameters", params_json(&params));
    report.plots.push(block);
    report.emit(args.output.out.as_deref(), args.output.plot_csv.as_deref())?;
    Ok(EXIT_OK)
}

pub fn cmd_sample(args: &SampleArgs, seed: u64) -> Result<i32, CliError> {
    let params = params_from(&args.params)?;
    let draws = params.sample(args.n, seed);
    let mut text = String::with_capacity(draws.len() * 24);
    for x in draws {
        let _ = writeln!(text, "{}", csv_number(x));
    }
    std::fs::write(&args.out, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(args: &SimulateArgs, seed: u64, echo: &[String]) -> Result<i32, CliError> {
    let truth = build_params(args.theta, args.alpha, args.lambda, args.beta, args.shape)?;
    let sizes = match (&args.ns, args.full_grid) {
        (Some(ns), _) => ns.clone(),
        (None, true) => full_sample_sizes(),
        (None, false) => DEFAULT_SAMPLE_SIZES.to_vec(),
    };
    if args.starts == 0 {
        return Err(CliError::Input("--starts must be at least 1".into()));
    }
    let options = StudyOptions {
        diagnostic_truth: args.diagnostic_truth,
        multistarts: args.starts,
        ..Default::default()
    };
    let study = mc_study_with(&truth, &sizes, args.replicates, seed, &options)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let rows: Vec<Value> = study
        .cells
        .iter()
        .map(|c| {
            json!({
                "parameter": c.parameter.as_str(),
                "n": c.n,
                "truth": num(c.truth),
                "bias": num(c.bias),
                "mse": num(c.mse),
                "converged": c.converged,
                "failed": c.failed,
                "flagged": c.flagged,
            })
        })
        .collect();
    let trends: Vec<Value> = study
        .trends
        .iter()
        .map(|t| {
            json!({
                "parameter": t.parameter.as_str(),
                "nonincreasing": t.nonincreasing,
                "shrinks": t.shrinks,
            })
        })
        .collect();

    let mut parameters: Vec<_> = Vec::new();
    for c in &study.cells {
        if !parameters.contains(&c.parameter) {
            parameters.push(c.parameter);
        }
    }
    let mut columns = vec!["n".to_string()];
    for p in &parameters {
        columns.push(format!("{}_bias", p.as_str()));
        columns.push(format!("{}_mse", p.as_str()));
    }
    let mut block = PlotBlock {
        name: "simulation".into(),
        columns,
        rows: Vec::new(),
    };
    for &n in &study.sample_sizes {
        let mut row = vec![n as f64];
        for &p in &parameters {
            let cell = study.cell(p, n);
            row.push(cell.map_or(f64::NAN, |c| c.bias));
            row.push(cell.map_or(f64::NAN, |c| c.mse));
        }
        block.rows.push(row);
    }

    let mut report = Report::new("simulate", echo, Some(seed));
    report.section(
        "simulation",
        json!({
            "truth": params_json(&study.truth),
            "sample_sizes": study.sample_sizes,
            "replicates": study.replicates,
            "diagnostic_truth": study.diagnostic_truth,
            "multistarts": args.starts,
            "rows": rows,
            "trends": trends,
            "trend_flag": study.trend_flag,
        }),
    );
    report.plots.push(block);
    report.emit(args.output.out.as_deref(), args.output.plot_csv.as_deref())?;
    let flagged = study.cells.iter().any(|c| c.flagged);
    Ok(if flagged { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

pub fn cmd_ttt(args: &TttArgs, seed: u64, echo: &[String]) -> Result<i32, CliError> {
    let data = read_dataset(&args.data)?;
    let summary = descriptive(&data.values)?;
    let mut report = Report::new("ttt", echo, Some(seed));
    report.set_input(&data);
    report.section("descriptive", descriptive_json(&summary));
    report.section("five_number_summary", five_number_json(&summary));
    report.plots.push(ttt_block(&data.values)?);
    report.emit(args.output.out.as_deref(), args.output.plot_csv.as_deref())?;
    Ok(EXIT_OK)
}
