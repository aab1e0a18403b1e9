//! Baseline lifetime distributions G(t; ξ) on the support (0, ∞).
//!
//! The [`Baseline`] trait is the extension point: a new baseline only needs
//! its log-density, cdf, quantile and the log-density slope g'/g (used by the
//! critical-point equations). Survival and inverse-survival have defaults but
//! should be overridden when a tail-accurate closed form exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Baseline {
    /// log g(t). Unchecked: callers guarantee t > 0.
    fn ln_pdf(&self, t: f64) -> f64;

    fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    fn cdf(&self, t: f64) -> f64;

    /// Ḡ(t) = 1 − G(t).
    fn sf(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    fn ln_sf(&self, t: f64) -> f64 {
        self.sf(t).ln()
    }

    /// G⁻¹(p) for p in (0, 1).
    fn quantile(&self, p: f64) -> f64;

    /// Ḡ⁻¹(q), the point whose survival probability is q.
    fn inverse_sf(&self, q: f64) -> f64 {
        self.quantile(1.0 - q)
    }

    /// g'(t) / g(t).
    fn d_ln_pdf(&self, t: f64) -> f64;

    fn validate(&self) -> Result<()>;

    /// Parameter vector ξ in a fixed order.
    fn params(&self) -> Vec<f64>;
}

/// The two baselines used throughout: exponential and Weibull with
/// G(t) = 1 − exp(−β t^δ) (β multiplies t^δ; it is not a scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineSpec {
    Exponential { rate: f64 },
    Weibull { rate: f64, shape: f64 },
}

impl BaselineSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let spec = Self::Exponential { rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn weibull(rate: f64, shape: f64) -> Result<Self> {
        let spec = Self::Weibull { rate, shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rate(&self) -> f64 {
        match *self {
            Self::Exponential { rate } | Self::Weibull { rate, .. } => rate,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Weibull { .. } => "weibull",
        }
    }

    /// β t^δ, the cumulative hazard of the baseline.
    #[inline]
    fn cumulative_hazard(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => rate * t,
            Self::Weibull { rate, shape } => rate * t.powf(shape),
        }
    }

    /// Inverse of the cumulative hazard.
    #[inline]
    fn inverse_cumulative_hazard(&self, h: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => h / rate,
            Self::Weibull { rate, shape } => (h / rate).powf(1.0 / shape),
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

impl Baseline for BaselineSpec {
    #[inline]
    fn ln_pdf(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => rate.ln() - rate * t,
            Self::Weibull { rate, shape } => {
                let power = if shape == 1.0 {
                    0.0
                } else {
                    (shape - 1.0) * t.ln()
                };
                shape.ln() + rate.ln() + power - rate * t.powf(shape)
            }
        }
    }

    #[inline]
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        -(-self.cumulative_hazard(t)).exp_m1()
    }

    #[inline]
    fn sf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        (-self.cumulative_hazard(t)).exp()
    }

    #[inline]
    fn ln_sf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        -self.cumulative_hazard(t)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.inverse_cumulative_hazard(-(-p).ln_1p())
    }

    fn inverse_sf(&self, q: f64) -> f64 {
        self.inverse_cumulative_hazard(-q.ln())
    }

    #[inline]
    fn d_ln_pdf(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -rate,
            Self::Weibull { rate, shape } => (shape - 1.0) / t - rate * shape * t.powf(shape - 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate } => check_positive("rate (beta)", rate),
            Self::Weibull { rate, shape } => {
                check_positive("rate (beta)", rate)?;
                check_positive("shape (delta)", shape)
            }
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Self::Exponential { rate } => vec![rate],
            Self::Weibull { rate, shape } => vec![rate, shape],
        }
    }
}

fn check_support(t: f64) -> Result<()> {
    if t > 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be > 0, got {t}")))
    }
}

pub fn baseline_pdf<B: Baseline>(spec: &B, t: f64) -> Result<f64> {
    spec.validate()?;
    check_support(t)?;
    Ok(spec.pdf(t))
}

pub fn baseline_ln_pdf<B: Baseline>(spec: &B, t: f64) -> Result<f64> {
    spec.validate()?;
    check_support(t)?;
    Ok(spec.ln_pdf(t))
}

pub fn baseline_cdf<B: Baseline>(spec: &B, t: f64) -> Result<f64> {
    spec.validate()?;
    check_support(t)?;
    Ok(spec.cdf(t))
}

pub fn baseline_quantile<B: Baseline>(spec: &B, p: f64) -> Result<f64> {
    spec.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(spec.quantile(p))
}
