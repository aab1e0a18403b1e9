use serde::{Deserialize, Serialize};

use crate::baseline::Baseline;
use crate::error::{Error, Result};
use crate::family::GmopgParams;

/// Truncation is grown until 1 − Σ η′ⱼ falls below this.
pub const TAIL_MASS_TARGET: f64 = 1e-10;
pub const MAX_TRUNCATION: usize = 10_000;

/// Mixture weights of the survival (η′ⱼ) and density (ηⱼ = (j + θ) η′ⱼ)
/// expansions in powers of the Poisson-G survival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub theta: f64,
    pub alpha: f64,
    pub truncation: usize,
    pub eta_prime: Vec<f64>,
    pub eta: Vec<f64>,
    /// 1 − Σ η′ⱼ over the retained terms.
    pub tail_mass: f64,
}

fn check_expansion(theta: f64, alpha: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::Validation(format!("theta must be > 0, got {theta}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedExpansion(alpha));
    }
    Ok(())
}

/// η′ⱼ = C(j + θ − 1, j)(1 − α)^j α^θ for j = 0..=J, by the ratio recursion
/// η′ⱼ₊₁ = η′ⱼ (1 − α)(j + θ)/(j + 1).
pub fn series_coefficients(theta: f64, alpha: f64, truncation: usize) -> Result<SeriesExpansion> {
    check_expansion(theta, alpha)?;
    let mut eta_prime = Vec::with_capacity(truncation + 1);
    let mut current = alpha.powf(theta);
    for j in 0..=truncation {
        eta_prime.push(current);
        current *= (1.0 - alpha) * (j as f64 + theta) / (j as f64 + 1.0);
    }
    Ok(build(theta, alpha, eta_prime))
}

fn build(theta: f64, alpha: f64, eta_prime: Vec<f64>) -> SeriesExpansion {
    let eta = eta_prime
        .iter()
        .enumerate()
        .map(|(j, w)| (j as f64 + theta) * w)
        .collect();
    let tail_mass = 1.0 - eta_prime.iter().sum::<f64>();
    SeriesExpansion {
        theta,
        alpha,
        truncation: eta_prime.len() - 1,
        eta_prime,
        eta,
        tail_mass,
    }
}

impl SeriesExpansion {
    /// Smallest truncation with tail mass below `target` (capped at
    /// [`MAX_TRUNCATION`]).
    pub fn adaptive(theta: f64, alpha: f64, target: f64) -> Result<Self> {
        check_expansion(theta, alpha)?;
        let mut eta_prime = Vec::new();
        let mut current = alpha.powf(theta);
        let mut sum = 0.0;
        for j in 0..=MAX_TRUNCATION {
            eta_prime.push(current);
            sum += current;
            // past the mode the terms decrease, so the remaining mass is
            // bounded by the geometric tail of the current ratio
            let ratio = (1.0 - alpha) * (j as f64 + theta) / (j as f64 + 1.0);
            if 1.0 - sum < target && ratio < 1.0 && current * ratio / (1.0 - ratio) < target {
                break;
            }
            current *= ratio;
        }
        Ok(build(theta, alpha, eta_prime))
    }

    /// θ/α − Σ ηⱼ, the unretained mass of the density weights.
    pub fn eta_tail(&self) -> f64 {
        self.theta / self.alpha - self.eta.iter().sum::<f64>()
    }
}

fn check_mixture<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<()> {
    params.validate()?;
    check_expansion(params.theta, params.alpha)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    Ok(())
}

/// Σ_{j ≤ J} η′ⱼ S_PG(t)^{j + θ}.
pub fn truncated_mixture_sf<B: Baseline>(
    params: &GmopgParams<B>,
    t: f64,
    truncation: usize,
) -> Result<f64> {
    check_mixture(params, t)?;
    let series = series_coefficients(params.theta, params.alpha, truncation)?;
    let ln_s = params.pg(t).ln_s;
    Ok(series
        .eta_prime
        .iter()
        .enumerate()
        .map(|(j, w)| w * ((j as f64 + params.theta) * ln_s).exp())
        .sum())
}

/// g_PG(t) Σ_{j ≤ J} ηⱼ S_PG(t)^{j + θ − 1}.
pub fn truncated_mixture_pdf<B: Baseline>(
    params: &GmopgParams<B>,
    t: f64,
    truncation: usize,
) -> Result<f64> {
    check_mixture(params, t)?;
    let series = series_coefficients(params.theta, params.alpha, truncation)?;
    let pg = params.pg(t);
    Ok(series
        .eta
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let power = j as f64 + params.theta - 1.0;
            let term = if power == 0.0 { 0.0 } else { power * pg.ln_s };
            w * (pg.ln_density + term).exp()
        })
        .sum())
}
