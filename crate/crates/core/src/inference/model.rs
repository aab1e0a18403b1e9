use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineSpec;
use crate::error::{Error, Result};
use crate::family::GmopgParams;

/// Fitted model families: GMOP-E, its nested sub-models, the moment
/// exponential comparison model and GMOP-W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "exp")]
    Exp,
    #[serde(rename = "me")]
    Me,
    #[serde(rename = "p-e")]
    PE,
    #[serde(rename = "mo-e")]
    MoE,
    #[serde(rename = "gmo-e")]
    GmoE,
    #[serde(rename = "mop-e")]
    MopE,
    #[serde(rename = "gmop-e")]
    GmopE,
    #[serde(rename = "gmop-w")]
    GmopW,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Theta,
    Alpha,
    Lambda,
    Beta,
    Delta,
}

impl ParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::Theta => "theta",
            ParamName::Alpha => "alpha",
            ParamName::Lambda => "lambda",
            ParamName::Beta => "beta",
            ParamName::Delta => "delta",
        }
    }

    /// Positive parameters are optimized on the log scale.
    pub fn is_positive(self) -> bool {
        !matches!(self, ParamName::Lambda)
    }

    fn default_bounds(self) -> (f64, f64) {
        match self {
            ParamName::Theta | ParamName::Alpha => (1e-4, 1e4),
            ParamName::Lambda => (-50.0, 50.0),
            ParamName::Beta => (1e-6, 1e6),
            ParamName::Delta => (1e-3, 1e3),
        }
    }

    /// Region the Latin-hypercube starts are drawn from.
    pub(crate) fn start_region(self) -> (f64, f64) {
        match self {
            ParamName::Theta | ParamName::Alpha => (0.05, 50.0),
            ParamName::Lambda => (-10.0, 10.0),
            ParamName::Beta | ParamName::Delta => (0.05, 10.0),
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Exp,
        ModelKind::Me,
        ModelKind::PE,
        ModelKind::MoE,
        ModelKind::GmoE,
        ModelKind::MopE,
        ModelKind::GmopE,
        ModelKind::GmopW,
    ];

    /// Sub-models obtained from GMOP-E by fixing parameters.
    pub const NESTED_IN_GMOP_E: [ModelKind; 5] = [
        ModelKind::Exp,
        ModelKind::PE,
        ModelKind::MoE,
        ModelKind::GmoE,
        ModelKind::MopE,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Exp => "exp",
            ModelKind::Me => "me",
            ModelKind::PE => "p-e",
            ModelKind::MoE => "mo-e",
            ModelKind::GmoE => "gmo-e",
            ModelKind::MopE => "mop-e",
            ModelKind::GmopE => "gmop-e",
            ModelKind::GmopW => "gmop-w",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Exp => "Exp",
            ModelKind::Me => "ME",
            ModelKind::PE => "P-E",
            ModelKind::MoE => "MO-E",
            ModelKind::GmoE => "GMO-E",
            ModelKind::MopE => "MOP-E",
            ModelKind::GmopE => "GMOP-E",
            ModelKind::GmopW => "GMOP-W",
        }
    }

    /// Full parameter vector of the model, in canonical order.
    pub fn parameters(self) -> &'static [ParamName] {
        use ParamName::*;
        match self {
            ModelKind::Me => &[Beta],
            ModelKind::GmopW => &[Theta, Alpha, Lambda, Beta, Delta],
            _ => &[Theta, Alpha, Lambda, Beta],
        }
    }

    /// Parameters held fixed to obtain the sub-model.
    pub fn default_fixed(self) -> Vec<FixedParameter> {
        use ParamName::*;
        let fixed: &[(ParamName, f64)] = match self {
            ModelKind::Exp => &[(Theta, 1.0), (Alpha, 1.0), (Lambda, 0.0)],
            ModelKind::PE => &[(Theta, 1.0), (Alpha, 1.0)],
            ModelKind::MoE => &[(Theta, 1.0), (Lambda, 0.0)],
            ModelKind::GmoE => &[(Lambda, 0.0)],
            ModelKind::MopE => &[(Theta, 1.0)],
            ModelKind::Me | ModelKind::GmopE | ModelKind::GmopW => &[],
        };
        fixed
            .iter()
            .map(|&(name, value)| FixedParameter { name, value })
            .collect()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag() == key || k.tag().replace('-', "") == key)
            .ok_or_else(|| Error::Validation(format!("unknown model tag '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParameter {
    pub name: ParamName,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParameter {
    pub name: ParamName,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub multistarts: usize,
    pub max_iterations: usize,
    /// Simplex diameter (in the optimization coordinates) at which a run stops.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            multistarts: 16,
            max_iterations: 10_000,
            tolerance: 1e-8,
            max_restarts: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub free: Vec<FreeParameter>,
    pub fixed: Vec<FixedParameter>,
    pub optimizer: OptimizerSettings,
    /// Additional starting points, one value per free parameter.
    pub extra_starts: Vec<Vec<f64>>,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        let fixed = kind.default_fixed();
        let free = kind
            .parameters()
            .iter()
            .filter(|p| !fixed.iter().any(|f| f.name == **p))
            .map(|&name| {
                let (lower, upper) = name.default_bounds();
                FreeParameter { name, lower, upper }
            })
            .collect();
        ModelConfig {
            kind,
            free,
            fixed,
            optimizer: OptimizerSettings::default(),
            extra_starts: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = seed;
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.extra_starts.push(start);
        self
    }

    pub fn free_names(&self) -> Vec<ParamName> {
        self.free.iter().map(|p| p.name).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.free {
            if !(p.lower < p.upper) || p.lower.is_nan() || p.upper.is_nan() {
                return Err(Error::Validation(format!(
                    "bounds for {} must satisfy lower < upper, got [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
            if p.name.is_positive() && !(p.lower > 0.0) {
                return Err(Error::Validation(format!(
                    "lower bound for {} must be > 0, got {}",
                    p.name, p.lower
                )));
            }
        }
        let mut seen: Vec<ParamName> = self.free.iter().map(|p| p.name).collect();
        seen.extend(self.fixed.iter().map(|p| p.name));
        seen.sort();
        let mut expected = self.kind.parameters().to_vec();
        expected.sort();
        if seen != expected {
            return Err(Error::Validation(format!(
                "free and fixed parameters of {} must cover {:?} exactly once, got {:?}",
                self.kind,
                self.kind.parameters(),
                seen
            )));
        }
        for start in &self.extra_starts {
            if start.len() != self.free.len() {
                return Err(Error::Validation(format!(
                    "starting point has {} values, model has {} free parameters",
                    start.len(),
                    self.free.len()
                )));
            }
        }
        if self.optimizer.multistarts == 0 && self.extra_starts.is_empty() {
            return Err(Error::Validation("no starting points requested".into()));
        }
        Ok(())
    }

    /// Full canonical parameter vector from the free values.
    pub fn full_parameters(&self, free: &[f64]) -> Vec<(ParamName, f64)> {
        self.kind
            .parameters()
            .iter()
            .map(|&name| {
                let value = self
                    .free
                    .iter()
                    .position(|p| p.name == name)
                    .map(|i| free[i])
                    .or_else(|| self.fixed.iter().find(|p| p.name == name).map(|p| p.value))
                    .unwrap_or(f64::NAN);
                (name, value)
            })
            .collect()
    }

    pub fn distribution(&self, free: &[f64]) -> Result<LifetimeDistribution> {
        let full = self.full_parameters(free);
        let get = |name: ParamName| {
            full.iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .unwrap_or(f64::NAN)
        };
        use ParamName::*;
        match self.kind {
            ModelKind::Me => {
                let scale = get(Beta);
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Validation(format!("beta must be > 0, got {scale}")));
                }
                Ok(LifetimeDistribution::MomentExponential { scale })
            }
            ModelKind::GmopW => {
                let baseline = BaselineSpec::weibull(get(Beta), get(Delta))?;
                Ok(LifetimeDistribution::Gmopg(GmopgParams::new(
                    get(Theta),
                    get(Alpha),
                    get(Lambda),
                    baseline,
                )?))
            }
            _ => {
                let baseline = BaselineSpec::exponential(get(Beta))?;
                Ok(LifetimeDistribution::Gmopg(GmopgParams::new(
                    get(Theta),
                    get(Alpha),
                    get(Lambda),
                    baseline,
                )?))
            }
        }
    }
}

/// Anything with a log density and cdf on (0, ∞).
pub trait Lifetime {
    fn ln_pdf(&self, t: f64) -> f64;
    fn cdf(&self, t: f64) -> f64;
}

impl<B: crate::baseline::Baseline> Lifetime for GmopgParams<B> {
    fn ln_pdf(&self, t: f64) -> f64 {
        GmopgParams::ln_pdf(self, t)
    }
    fn cdf(&self, t: f64) -> f64 {
        GmopgParams::cdf(self, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LifetimeDistribution {
    Gmopg(GmopgParams),
    /// f(t) = t e^{−t/β} / β².
    MomentExponential {
        scale: f64,
    },
}

impl LifetimeDistribution {
    pub fn sf(&self, t: f64) -> f64 {
        match self {
            LifetimeDistribution::Gmopg(p) => p.sf(t),
            LifetimeDistribution::MomentExponential { scale } => {
                let x = t / scale;
                (1.0 + x) * (-x).exp()
            }
        }
    }
}

impl Lifetime for LifetimeDistribution {
    fn ln_pdf(&self, t: f64) -> f64 {
        match self {
            LifetimeDistribution::Gmopg(p) => p.ln_pdf(t),
            LifetimeDistribution::MomentExponential { scale } => {
                if !(t > 0.0) {
                    return f64::NEG_INFINITY;
                }
                t.ln() - t / scale - 2.0 * scale.ln()
            }
        }
    }

    fn cdf(&self, t: f64) -> f64 {
        match self {
            LifetimeDistribution::Gmopg(p) => p.cdf(t),
            LifetimeDistribution::MomentExponential { scale } => {
                if !(t > 0.0) {
                    return 0.0;
                }
                let x = t / scale;
                if x < 0.5 {
                    // 1 − e^{−x}(1 + x) = Σ_{k≥2} (−1)^k (k − 1) x^k / k!
                    let mut power = x;
                    let mut sum = 0.0;
                    for k in 2..60 {
                        power *= -x / k as f64;
                        let term = -((k - 1) as f64) * power;
                        sum += term;
                        if term.abs() < 1e-17 * sum.abs() {
                            break;
                        }
                    }
                    sum
                } else {
                    1.0 - (1.0 + x) * (-x).exp()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.tag().parse::<ModelKind>().unwrap(), kind);
            assert_eq!(kind.label().parse::<ModelKind>().unwrap(), kind);
        }
        assert_eq!("GMOP-E".parse::<ModelKind>().unwrap(), ModelKind::GmopE);
        assert_eq!("gmope".parse::<ModelKind>().unwrap(), ModelKind::GmopE);
        assert!("weibull".parse::<ModelKind>().is_err());
    }

    #[test]
    fn default_configs_cover_parameters() {
        for kind in ModelKind::ALL {
            let config = ModelConfig::new(kind);
            config.validate().unwrap();
        }
        assert_eq!(ModelConfig::new(ModelKind::Exp).free.len(), 1);
        assert_eq!(ModelConfig::new(ModelKind::GmoE).free.len(), 3);
        assert_eq!(ModelConfig::new(ModelKind::GmopW).free.len(), 5);
    }

    #[test]
    fn invalid_configs() {
        let mut c = ModelConfig::new(ModelKind::PE);
        c.free[0].lower = c.free[0].upper;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::new(ModelKind::PE);
        c.fixed.push(FixedParameter {
            name: ParamName::Lambda,
            value: 0.0,
        });
        assert!(c.validate().is_err());
        let mut c = ModelConfig::new(ModelKind::GmopE);
        c.free.pop();
        assert!(c.validate().is_err());
        let c = ModelConfig::new(ModelKind::Exp).with_start(vec![1.0, 2.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn sub_model_distribution() {
        let c = ModelConfig::new(ModelKind::Exp);
        let d = c.distribution(&[2.0]).unwrap();
        let t: f64 = 0.7;
        assert!((d.ln_pdf(t) - (2f64.ln() - 2.0 * t)).abs() < 1e-12);
        assert!((d.cdf(t) - (1.0 - (-2.0 * t).exp())).abs() < 1e-12);
    }

    #[test]
    fn moment_exponential() {
        let d = LifetimeDistribution::MomentExponential { scale: 1.5 };
        let crate_quad = crate::quadrature::integrate(
            |t| if t > 0.0 { d.ln_pdf(t).exp() } else { 0.0 },
            0.0,
            80.0,
            Default::default(),
        )
        .unwrap();
        assert!((crate_quad.value - 1.0).abs() < 1e-10);
        for t in [1e-6, 0.1, 0.74, 0.76, 3.0] {
            let direct = 1.0 - (1.0 + t / 1.5) * (-t / 1.5f64).exp();
            assert!((d.cdf(t) - direct).abs() < 1e-12, "{t}");
            assert!((d.cdf(t) + d.sf(t) - 1.0).abs() < 1e-12);
        }
        // series branch keeps relative accuracy near 0
        let x: f64 = 1e-6 / 1.5;
        assert!((d.cdf(1e-6) / (x * x / 2.0) - 1.0).abs() < 1e-5);
    }
}
