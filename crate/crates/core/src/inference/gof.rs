use serde::{Deserialize, Serialize};

use super::model::Lifetime;
use crate::error::{Error, Result};

const CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofStatistics {
    pub ks: f64,
    pub ks_p_value: f64,
    /// Anderson–Darling A².
    pub anderson_darling: f64,
    /// Cramér–von Mises W².
    pub cramer_von_mises: f64,
    /// Number of probability-integral values clamped away from 0 or 1.
    pub clamped: usize,
}

/// P(K > x) for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form; the alternating series converges slowly here
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for j in 1..=100 {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * c).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let sign = if j as u64 % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (-2.0 * j * j * x * x).exp();
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS, A² and W² of probability-integral values uᵢ = F(tᵢ). Sorts `u`.
pub fn gof_from_uniforms(u: &mut [f64]) -> Result<GofStatistics> {
    if u.is_empty() {
        return Err(Error::Validation("data must not be empty".into()));
    }
    if u.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("cdf returned NaN".into()));
    }
    let mut clamped = 0;
    for v in u.iter_mut() {
        if *v < CLAMP || *v > 1.0 - CLAMP {
            clamped += 1;
            *v = v.clamp(CLAMP, 1.0 - CLAMP);
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} probability-integral values clamped to [1e-15, 1 - 1e-15]");
    }
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let nf = n as f64;
    let mut ks: f64 = 0.0;
    let mut ad = 0.0;
    let mut cvm = 1.0 / (12.0 * nf);
    for i in 0..n {
        let rank = (i + 1) as f64;
        ks = ks.max(rank / nf - u[i]).max(u[i] - (rank - 1.0) / nf);
        ad += (2.0 * rank - 1.0) * (u[i].ln() + (-u[n - 1 - i]).ln_1p());
        cvm += (u[i] - (2.0 * rank - 1.0) / (2.0 * nf)).powi(2);
    }
    Ok(GofStatistics {
        ks,
        ks_p_value: kolmogorov_sf(nf.sqrt() * ks),
        anderson_darling: -nf - ad / nf,
        cramer_von_mises: cvm,
        clamped,
    })
}

pub fn gof_statistics<L: Lifetime + ?Sized>(dist: &L, data: &[f64]) -> Result<GofStatistics> {
    let mut u: Vec<f64> = data.iter().map(|&t| dist.cdf(t)).collect();
    gof_from_uniforms(&mut u)
}
