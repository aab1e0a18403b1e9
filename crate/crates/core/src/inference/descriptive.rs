use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    /// Sample standard deviation (n − 1 divisor).
    pub sd: f64,
    /// m₃ / m₂^{3/2} with biased central moments; NaN for constant data.
    pub skewness: f64,
    /// m₄ / m₂²; NaN for constant data.
    pub kurtosis: f64,
}

/// Linear interpolation between order statistics at position (n − 1)p.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn descriptive(data: &[f64]) -> Result<Descriptive> {
    if data.is_empty() {
        return Err(Error::Validation("data must not be empty".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("data must be finite".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = data.len();
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let central = |k: i32| data.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / nf;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let sd = if n > 1 {
        (m2 * nf / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Descriptive {
        n,
        min: sorted[0],
        q1: sorted_quantile(&sorted, 0.25),
        median: sorted_quantile(&sorted, 0.5),
        mean,
        q3: sorted_quantile(&sorted, 0.75),
        max: sorted[n - 1],
        sd,
        skewness,
        kurtosis,
    })
}

/// Scaled total time on test: (0, 0) followed by
/// (i/n, [Σ_{j≤i} t₍ⱼ₎ + (n − i) t₍ᵢ₎] / Σ t₍ⱼ₎) for i = 1..n.
pub fn ttt_curve(data: &[f64]) -> Result<Vec<(f64, f64)>> {
    super::fit::check_data(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    let mut curve = Vec::with_capacity(n + 1);
    curve.push((0.0, 0.0));
    let mut partial = 0.0;
    for (i, &t) in sorted.iter().enumerate() {
        partial += t;
        let rank = i + 1;
        let value = if rank == n {
            1.0
        } else {
            (partial + (n - rank) as f64 * t) / total
        };
        curve.push((rank as f64 / n as f64, value));
    }
    Ok(curve)
}

/// Reference summary the 72-observation guinea-pig survival data must match.
pub const TABLE3_REFERENCE: [(&str, f64); 5] = [
    ("mean", 1.851),
    ("median", 1.560),
    ("sd", 1.200),
    ("min", 0.100),
    ("max", 7.000),
];
pub const TABLE3_N: usize = 72;
pub const TABLE3_TOLERANCE: f64 = 0.005;

/// Checks a candidate guinea-pig dataset against its published summary and
/// returns its descriptive statistics when every value matches.
pub fn validate_table3(data: &[f64]) -> Result<Descriptive> {
    let d = descriptive(data)?;
    let mut problems = Vec::new();
    if d.n != TABLE3_N {
        problems.push(format!("n = {} (expected {TABLE3_N})", d.n));
    }
    for (name, expected) in TABLE3_REFERENCE {
        let value = match name {
            "mean" => d.mean,
            "median" => d.median,
            "sd" => d.sd,
            "min" => d.min,
            _ => d.max,
        };
        if !((value - expected).abs() <= TABLE3_TOLERANCE) {
            problems.push(format!("{name} = {value:.4} (expected {expected:.3})"));
        }
    }
    if problems.is_empty() {
        Ok(d)
    } else {
        Err(Error::Dataset(format!(
            "data does not match the guinea-pig summary: {}",
            problems.join(", ")
        )))
    }
}
