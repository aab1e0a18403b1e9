//! Monte Carlo bias/MSE study of the maximum-likelihood estimators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::BaselineSpec;
use crate::error::{Error, Result};
use crate::family::GmopgParams;
use crate::inference::{fit, ModelConfig, ModelKind, ParamName};

/// Replicate-level behavior of [`mc_study_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    /// Skip fitting and report the truth as every estimate.
    pub diagnostic_truth: bool,
    /// Latin-hypercube starts per fit, in addition to the true parameters.
    pub multistarts: usize,
    /// A cell is flagged when more than this fraction of its fits fail.
    pub failure_flag_fraction: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            diagnostic_truth: false,
            multistarts: 16,
            failure_flag_fraction: 0.2,
        }
    }
}

/// Desk-scale ladder of sample sizes.
pub const DEFAULT_SAMPLE_SIZES: [usize; 4] = [10, 20, 40, 80];
/// Sample sizes 5, 10, …, 80.
pub fn full_sample_sizes() -> Vec<usize> {
    (1..=16).map(|k| 5 * k).collect()
}
pub const DEFAULT_REPLICATES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub parameter: ParamName,
    pub n: usize,
    pub truth: f64,
    pub bias: f64,
    pub mse: f64,
    pub converged: usize,
    pub failed: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTrend {
    pub parameter: ParamName,
    /// |bias| and MSE never increase along the sample-size ladder.
    pub nonincreasing: bool,
    /// |bias| and MSE at the largest n are below those at the smallest n.
    pub shrinks: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub truth: GmopgParams,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub diagnostic_truth: bool,
    pub cells: Vec<CellSummary>,
    pub trends: Vec<ParameterTrend>,
    /// Majority of parameters with nonincreasing |bias| and MSE.
    pub trend_flag: bool,
}

impl SimulationReport {
    pub fn cell(&self, parameter: ParamName, n: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.parameter == parameter && c.n == n)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent stream used by replicate `r` at sample size `n`.
pub fn replicate_seed(seed: u64, n: usize, r: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ n as u64) ^ r as u64)
}

fn model_for(truth: &GmopgParams) -> (ModelKind, Vec<(ParamName, f64)>) {
    use ParamName::*;
    match truth.baseline {
        BaselineSpec::Exponential { rate } => (
            ModelKind::GmopE,
            vec![
                (Theta, truth.theta),
                (Alpha, truth.alpha),
                (Lambda, truth.lambda),
                (Beta, rate),
            ],
        ),
        BaselineSpec::Weibull { rate, shape } => (
            ModelKind::GmopW,
            vec![
                (Theta, truth.theta),
                (Alpha, truth.alpha),
                (Lambda, truth.lambda),
                (Beta, rate),
                (Delta, shape),
            ],
        ),
    }
}

pub fn mc_study(
    truth: &GmopgParams,
    sample_sizes: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<SimulationReport> {
    mc_study_with(
        truth,
        sample_sizes,
        replicates,
        seed,
        &StudyOptions::default(),
    )
}

/// For each n, fits `replicates` independent samples from `truth` and
/// aggregates bias and MSE over the fits that converged. The report does not
/// depend on thread scheduling.
pub fn mc_study_with(
    truth: &GmopgParams,
    sample_sizes: &[usize],
    replicates: usize,
    seed: u64,
    options: &StudyOptions,
) -> Result<SimulationReport> {
    truth.validate()?;
    if replicates == 0 {
        return Err(Error::Validation("replicates must be >= 1".into()));
    }
    if sample_sizes.is_empty() || sample_sizes.iter().any(|&n| n < 5) {
        return Err(Error::Validation(
            "sample sizes must be nonempty and each >= 5".into(),
        ));
    }
    let (kind, true_values) = model_for(truth);
    let truth_vector: Vec<f64> = true_values.iter().map(|(_, v)| *v).collect();

    let mut cells = Vec::new();
    for &n in sample_sizes {
        let estimates: Vec<Option<Vec<f64>>> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                if options.diagnostic_truth {
                    return Some(truth_vector.clone());
                }
                let stream = replicate_seed(seed, n, r);
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let data = truth.sample_with(&mut rng, n);
                let mut config = ModelConfig::new(kind)
                    .with_seed(stream)
                    .with_start(truth_vector.clone());
                config.optimizer.multistarts = options.multistarts;
                match fit(&data, &config) {
                    Ok(result) if result.convergence.converged => Some(result.estimates),
                    _ => None,
                }
            })
            .collect();
        let ok: Vec<&Vec<f64>> = estimates.iter().flatten().collect();
        let converged = ok.len();
        let failed = replicates - converged;
        let flagged = failed as f64 > options.failure_flag_fraction * replicates as f64;
        for (k, &(parameter, value)) in true_values.iter().enumerate() {
            let (bias, mse) = if converged == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let m = converged as f64;
                let bias = ok.iter().map(|e| e[k] - value).sum::<f64>() / m;
                let mse = ok.iter().map(|e| (e[k] - value).powi(2)).sum::<f64>() / m;
                (bias, mse)
            };
            cells.push(CellSummary {
                parameter,
                n,
                truth: value,
                bias,
                mse,
                converged,
                failed,
                flagged,
            });
        }
    }

    let mut ladder = sample_sizes.to_vec();
    ladder.sort_unstable();
    ladder.dedup();
    let trends: Vec<ParameterTrend> = true_values
        .iter()
        .map(|&(parameter, _)| {
            let series: Vec<(f64, f64)> = ladder
                .iter()
                .map(|&n| {
                    let c = cells
                        .iter()
                        .find(|c| c.parameter == parameter && c.n == n)
                        .expect("cell exists");
                    (c.bias.abs(), c.mse)
                })
                .collect();
            let nonincreasing = series
                .windows(2)
                .all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1);
            let (first, last) = (series[0], series[series.len() - 1]);
            let shrinks = series.len() > 1 && last.0 < first.0 && last.1 < first.1;
            ParameterTrend {
                parameter,
                nonincreasing,
                shrinks,
            }
        })
        .collect();
    let improving = trends.iter().filter(|t| t.nonincreasing).count();
    Ok(SimulationReport {
        truth: *truth,
        sample_sizes: sample_sizes.to_vec(),
        replicates,
        seed,
        diagnostic_truth: options.diagnostic_truth,
        trend_flag: 2 * improving > trends.len(),
        cells,
        trends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> GmopgParams {
        GmopgParams::new(2.0, 8.0, 5.0, BaselineSpec::Exponential { rate: 0.5 }).unwrap()
    }

    #[test]
    fn diagnostic_truth_gives_zero_error() {
        let options = StudyOptions {
            diagnostic_truth: true,
            ..Default::default()
        };
        let report = mc_study_with(&truth(), &[10, 20], 1, 3, &options).unwrap();
        assert_eq!(report.cells.len(), 8);
        for c in &report.cells {
            assert_eq!((c.bias, c.mse, c.converged), (0.0, 0.0, 1));
        }
    }

    #[test]
    fn small_study_is_reproducible_and_consistent() {
        let a = mc_study(&truth(), &[20, 40], 6, 11).unwrap();
        let b = mc_study(&truth(), &[20, 40], 6, 11).unwrap();
        assert_eq!(a, b);
        for c in &a.cells {
            assert!(c.converged + c.failed == 6);
            if c.converged > 0 {
                assert!(c.mse >= c.bias * c.bias - 1e-12);
            }
        }
        assert_eq!(a.trends.len(), 4);
    }

    #[test]
    fn streams_differ_by_replicate_and_size() {
        let s = replicate_seed(1, 20, 0);
        assert_ne!(s, replicate_seed(1, 20, 1));
        assert_ne!(s, replicate_seed(1, 40, 0));
        assert_ne!(s, replicate_seed(2, 20, 0));
    }

    #[test]
    fn invalid_requests() {
        assert!(mc_study(&truth(), &[20], 0, 1).is_err());
        assert!(mc_study(&truth(), &[4], 1, 1).is_err());
        assert!(mc_study(&truth(), &[], 1, 1).is_err());
    }

    #[test]
    fn weibull_truth_uses_five_parameters() {
        let t = GmopgParams::new(
            1.5,
            2.0,
            1.0,
            BaselineSpec::Weibull {
                rate: 1.0,
                shape: 1.5,
            },
        )
        .unwrap();
        let options = StudyOptions {
            diagnostic_truth: true,
            ..Default::default()
        };
        let report = mc_study_with(&t, &[10], 2, 1, &options).unwrap();
        assert_eq!(report.cells.len(), 5);
    }
}
