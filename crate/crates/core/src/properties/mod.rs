//! Distributional properties of GMOP-G members: mixture expansions, moments,
//! quantile shape measures, Rényi entropy, order statistics and probability
//! weighted moments.
//!
//! Quadrature of the closed-form density is the computational path; the series
//! forms exist as cross-checks and only converge for α in (0, 1).

mod entropy;
mod moments;
mod order;
mod series;

pub use entropy::{renyi_entropy, renyi_entropy_series};
pub use moments::{
    central_moment, mgf, moment_summary, moment_via_pwm, pwm_pg, quantile_shape, raw_moment,
    MomentSummary, QuantileShape,
};
pub use order::{order_statistic_pdf, order_statistic_pdf_series};
pub use series::{
    series_coefficients, truncated_mixture_pdf, truncated_mixture_sf, SeriesExpansion,
    MAX_TRUNCATION, TAIL_MASS_TARGET,
};

use crate::baseline::Baseline;
use crate::error::Result;
use crate::family::GmopgParams;
use crate::quadrature::{integrate_segments, QuadSettings, Quadrature};

const BREAK_LEVELS: [f64; 14] = [
    1e-9,
    1e-6,
    1e-3,
    0.01,
    0.1,
    0.25,
    0.5,
    0.75,
    0.9,
    0.99,
    0.999,
    1.0 - 1e-6,
    1.0 - 1e-9,
    1.0 - 1e-12,
];

/// Breakpoints 0 < Q(p₁) < … < Q(1 − 1e−12) for an adaptive integral.
pub(crate) fn quantile_breaks<B: Baseline>(params: &GmopgParams<B>) -> Vec<f64> {
    let mut breaks = vec![0.0];
    for p in BREAK_LEVELS {
        let q = params.quantile(p);
        if q.is_finite() && q > *breaks.last().unwrap() {
            breaks.push(q);
        }
    }
    breaks
}

/// ∫₀^∞ h(t, ln f(t)) dt: quantile-placed segments up to Q(1 − 1e−12), then a
/// mapped semi-infinite tail.
pub(crate) fn integrate_density<B, H>(
    params: &GmopgParams<B>,
    h: H,
    settings: QuadSettings,
) -> Result<Quadrature>
where
    B: Baseline,
    H: Fn(f64, f64) -> f64,
{
    let breaks = quantile_breaks(params);
    let n = breaks.len();
    let scale = if n >= 2 {
        (breaks[n - 1] - params.quantile(0.5)).max(breaks[n - 1] * 1e-3)
    } else {
        1.0
    };
    integrate_segments(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            let ln_f = params.ln_pdf(t);
            if ln_f == f64::NEG_INFINITY {
                0.0
            } else {
                h(t, ln_f)
            }
        },
        &breaks,
        Some(scale),
        settings,
    )
}

/// Settings for moment-type integrals: relative accuracy, no absolute floor.
pub(crate) fn relative_settings() -> QuadSettings {
    QuadSettings {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    }
}

/// ∫ pdf over the support; 1 up to quadrature error.
pub fn total_probability<B: Baseline>(params: &GmopgParams<B>) -> Result<f64> {
    params.validate()?;
    Ok(integrate_density(params, |_, ln_f| ln_f.exp(), QuadSettings::default())?.value)
}
