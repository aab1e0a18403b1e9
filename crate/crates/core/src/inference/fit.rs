use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gof::{gof_statistics, GofStatistics};
use super::model::{
    Lifetime, LifetimeDistribution, ModelConfig, ModelKind, OptimizerSettings, ParamName,
};
use super::optimize::{latin_hypercube, nelder_mead, NelderMeadResult, NelderMeadSettings};
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_975: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
    pub caic: f64,
    pub hqic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    pub starts: usize,
    pub failed_starts: usize,
    /// Index of the start that produced the optimum.
    pub best_start: usize,
    pub converged: bool,
    /// Euclidean norm of the finite-difference score at the estimates.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub parameter_names: Vec<ParamName>,
    pub estimates: Vec<f64>,
    /// NaN where the observed information could not be inverted.
    pub standard_errors: Vec<f64>,
    pub confidence_intervals: Vec<(f64, f64)>,
    pub information_error: Option<String>,
    pub full_parameters: Vec<(ParamName, f64)>,
    pub distribution: LifetimeDistribution,
    pub log_likelihood: f64,
    pub n: usize,
    pub criteria: InformationCriteria,
    pub gof: GofStatistics,
    pub convergence: Convergence,
}

impl FitResult {
    pub fn k(&self) -> usize {
        self.estimates.len()
    }

    pub fn estimate(&self, name: ParamName) -> Option<f64> {
        self.full_parameters
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

pub(crate) fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Validation("data must not be empty".into()));
    }
    if let Some(bad) = data.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Validation(format!(
            "lifetimes must be finite and > 0, found {bad}"
        )));
    }
    Ok(())
}

/// Σ log f(tᵢ); −∞ when any term is undefined.
pub fn log_likelihood<L: Lifetime + ?Sized>(dist: &L, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Validation("data must not be empty".into()));
    }
    let total: f64 = data.iter().map(|&t| dist.ln_pdf(t)).sum();
    Ok(if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    })
}

pub fn information_criteria(loglik: f64, k: usize, n: usize) -> InformationCriteria {
    let (k, n) = (k as f64, n as f64);
    let deviance = -2.0 * loglik;
    InformationCriteria {
        aic: deviance + 2.0 * k,
        bic: deviance + k * n.ln(),
        caic: deviance + k * (n.ln() + 1.0),
        hqic: deviance + 2.0 * k * n.ln().ln(),
    }
}

fn free_loglik(config: &ModelConfig, free: &[f64], data: &[f64]) -> f64 {
    match config.distribution(free) {
        Ok(dist) => data.iter().map(|&t| dist.ln_pdf(t)).sum(),
        Err(_) => f64::NAN,
    }
}

/// Negative Hessian of ℓ in the free parameters, by central differences with
/// steps hᵢ = 1e−4·max(|ρᵢ|, 1), symmetrized.
pub fn observed_information(
    config: &ModelConfig,
    free: &[f64],
    data: &[f64],
) -> Result<DMatrix<f64>> {
    check_data(data)?;
    let k = free.len();
    let steps: Vec<f64> = free.iter().map(|x| 1e-4 * x.abs().max(1.0)).collect();
    let ll = |shift: &[(usize, f64)]| {
        let mut x = free.to_vec();
        for &(i, s) in shift {
            x[i] += s * steps[i];
        }
        free_loglik(config, &x, data)
    };
    let center = ll(&[]);
    let mut hessian = DMatrix::zeros(k, k);
    for i in 0..k {
        hessian[(i, i)] =
            (ll(&[(i, 1.0)]) - 2.0 * center + ll(&[(i, -1.0)])) / (steps[i] * steps[i]);
        for j in 0..i {
            let v = (ll(&[(i, 1.0), (j, 1.0)])
                - ll(&[(i, 1.0), (j, -1.0)])
                - ll(&[(i, -1.0), (j, 1.0)])
                + ll(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * steps[i] * steps[j]);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    let info = -(&hessian + hessian.transpose()) * 0.5;
    if info.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "observed information has non-finite entries".into(),
        ));
    }
    Ok(info)
}

/// √diag(I⁻¹).
pub fn standard_errors(info: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !info.is_square() || info.nrows() == 0 {
        return Err(Error::Validation(
            "information matrix must be square".into(),
        ));
    }
    let min_eigenvalue = SymmetricEigen::new(info.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let cholesky = info
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue })?;
    let inverse = cholesky.inverse();
    Ok((0..info.nrows()).map(|i| inverse[(i, i)].sqrt()).collect())
}

fn gradient_norm(config: &ModelConfig, free: &[f64], data: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..free.len() {
        let h = 1e-6 * free[i].abs().max(1.0);
        let mut up = free.to_vec();
        let mut down = free.to_vec();
        up[i] += h;
        down[i] -= h;
        let g = (free_loglik(config, &up, data) - free_loglik(config, &down, data)) / (2.0 * h);
        sum += g * g;
    }
    sum.sqrt()
}

struct Transform {
    positive: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Transform {
    fn new(config: &ModelConfig) -> Self {
        let positive: Vec<bool> = config.free.iter().map(|p| p.name.is_positive()).collect();
        let map = |v: f64, pos: bool| if pos { v.ln() } else { v };
        Transform {
            lower: config
                .free
                .iter()
                .zip(&positive)
                .map(|(p, &pos)| map(p.lower, pos))
                .collect(),
            upper: config
                .free
                .iter()
                .zip(&positive)
                .map(|(p, &pos)| map(p.upper, pos))
                .collect(),
            positive,
        }
    }

    fn to_inner(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.positive)
            .map(|(&v, &pos)| if pos { v.ln() } else { v })
            .collect()
    }

    fn to_outer(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.positive)
            .map(|(&v, &pos)| if pos { v.exp() } else { v })
            .collect()
    }
}

/// Starting point built from the sample mean: the exponential (or moment
/// exponential) fit with every shape parameter at its neutral value.
fn moment_start(config: &ModelConfig, data: &[f64]) -> Vec<f64> {
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    config
        .free
        .iter()
        .map(|p| match p.name {
            ParamName::Beta if config.kind == ModelKind::Me => mean / 2.0,
            ParamName::Beta => 1.0 / mean,
            ParamName::Lambda => 0.0,
            _ => 1.0,
        })
        .collect()
}

fn starting_points(config: &ModelConfig, transform: &Transform, data: &[f64]) -> Vec<Vec<f64>> {
    let mut starts: Vec<Vec<f64>> = config
        .extra_starts
        .iter()
        .map(|s| transform.to_inner(s))
        .collect();
    starts.push(transform.to_inner(&moment_start(config, data)));
    if config.optimizer.multistarts > 0 {
        let (lo, hi): (Vec<f64>, Vec<f64>) = config
            .free
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = p.name.start_region();
                let (a, b) = if p.name.is_positive() {
                    (a.ln(), b.ln())
                } else {
                    (a, b)
                };
                (a.max(transform.lower[i]), b.min(transform.upper[i]))
            })
            .unzip();
        starts.extend(latin_hypercube(
            config.optimizer.multistarts,
            &lo,
            &hi,
            config.optimizer.seed,
        ));
    }
    starts
}

/// Maximum-likelihood fit by multistart bounded Nelder–Mead on
/// (log θ, log α, raw λ, log β, log δ) restricted to the free parameters.
pub fn fit(data: &[f64], config: &ModelConfig) -> Result<FitResult> {
    config.validate()?;
    check_data(data)?;
    let transform = Transform::new(config);
    let objective = |z: &[f64]| -free_loglik(config, &transform.to_outer(z), data);
    let nm_settings = NelderMeadSettings {
        max_iterations: config.optimizer.max_iterations,
        tolerance: config.optimizer.tolerance,
        ..Default::default()
    };
    let starts = starting_points(config, &transform, data);
    let runs: Vec<NelderMeadResult> = starts
        .par_iter()
        .map(|z0| {
            nelder_mead(
                objective,
                z0,
                &transform.lower,
                &transform.upper,
                &nm_settings,
            )
        })
        .collect();
    let failed_starts = runs.iter().filter(|r| !r.value.is_finite()).count();
    let (best_start, mut best) = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value.is_finite())
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(i, r)| (i, r.clone()))
        .ok_or_else(|| Error::NonConvergence {
            starts: starts.len(),
            reason: "log-likelihood was not finite at any start".into(),
        })?;
    let mut iterations: usize = runs.iter().map(|r| r.iterations).sum();
    let mut evaluations: usize = runs.iter().map(|r| r.evaluations).sum();

    let mut restarts = 0;
    let mut converged = best.converged;
    while restarts < config.optimizer.max_restarts {
        let rerun = nelder_mead(
            objective,
            &best.x,
            &transform.lower,
            &transform.upper,
            &nm_settings,
        );
        restarts += 1;
        iterations += rerun.iterations;
        evaluations += rerun.evaluations;
        let improvement = best.value - rerun.value;
        converged = rerun.converged;
        if rerun.value <= best.value {
            best = rerun;
        }
        if improvement <= 1e-10 * (1.0 + best.value.abs()) {
            break;
        }
    }

    let estimates = transform.to_outer(&best.x);
    let distribution = config.distribution(&estimates)?;
    let log_likelihood = log_likelihood(&distribution, data)?;
    if !log_likelihood.is_finite() {
        return Err(Error::NonConvergence {
            starts: starts.len(),
            reason: "log-likelihood at the optimum is not finite".into(),
        });
    }
    let k = estimates.len();
    let (standard_errors, information_error) = match observed_information(config, &estimates, data)
        .and_then(|info| standard_errors(&info))
    {
        Ok(se) => (se, None),
        Err(e) => (vec![f64::NAN; k], Some(e.to_string())),
    };
    let confidence_intervals = estimates
        .iter()
        .zip(&standard_errors)
        .map(|(&x, &se)| (x - Z_975 * se, x + Z_975 * se))
        .collect();
    let gof = gof_statistics(&distribution, data)?;
    Ok(FitResult {
        model: config.kind,
        parameter_names: config.free_names(),
        full_parameters: config.full_parameters(&estimates),
        standard_errors,
        confidence_intervals,
        information_error,
        distribution,
        log_likelihood,
        n: data.len(),
        criteria: information_criteria(log_likelihood, k, data.len()),
        gof,
        convergence: Convergence {
            iterations,
            evaluations,
            restarts,
            starts: starts.len(),
            failed_starts,
            best_start,
            converged,
            gradient_norm: gradient_norm(config, &estimates, data),
        },
        estimates,
    })
}

/// Values of a fitted model's free parameters as a starting point for
/// `target`; None when some target parameter is unknown to the fit.
fn embed(fit: &FitResult, target: &ModelConfig) -> Option<Vec<f64>> {
    target
        .free
        .iter()
        .map(|p| match fit.estimate(p.name) {
            Some(v) => Some(v.clamp(p.lower, p.upper)),
            None if p.name == ParamName::Delta => Some(1.0),
            None => None,
        })
        .collect()
}

/// Fits every requested model with the same seed. Nested sub-models are
/// fitted first and their optima are added as starting points for the larger
/// models, so a larger model never reports a lower likelihood than a fitted
/// model nested in it.
pub fn compare_models(
    data: &[f64],
    kinds: &[ModelKind],
    seed: u64,
) -> Vec<(ModelKind, Result<FitResult>)> {
    let settings = OptimizerSettings {
        seed,
        ..Default::default()
    };
    compare_models_with(data, kinds, &settings)
}

/// [`compare_models`] with explicit optimizer settings for every model.
pub fn compare_models_with(
    data: &[f64],
    kinds: &[ModelKind],
    settings: &OptimizerSettings,
) -> Vec<(ModelKind, Result<FitResult>)> {
    let rank = |k: ModelKind| match k {
        ModelKind::Exp | ModelKind::Me => 0,
        ModelKind::PE | ModelKind::MoE => 1,
        ModelKind::GmoE | ModelKind::MopE => 2,
        ModelKind::GmopE => 3,
        ModelKind::GmopW => 4,
    };
    let mut order: Vec<usize> = (0..kinds.len()).collect();
    order.sort_by_key(|&i| (rank(kinds[i]), i));
    let mut done: Vec<Option<Result<FitResult>>> = (0..kinds.len()).map(|_| None).collect();
    for i in order {
        let kind = kinds[i];
        let mut config = ModelConfig::new(kind);
        config.optimizer = *settings;
        if kind != ModelKind::Me {
            for fit in done.iter().flatten().flatten() {
                if fit.model != ModelKind::Me && rank(fit.model) < rank(kind) {
                    if let Some(start) = embed(fit, &config) {
                        config.extra_starts.push(start);
                    }
                }
            }
        }
        done[i] = Some(fit(data, &config));
    }
    kinds
        .iter()
        .zip(done)
        .map(|(k, r)| (*k, r.expect("every model fitted")))
        .collect()
}
