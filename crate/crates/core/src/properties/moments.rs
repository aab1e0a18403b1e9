use serde::{Deserialize, Serialize};

use super::series::{SeriesExpansion, TAIL_MASS_TARGET};
use super::{integrate_density, relative_settings};
use crate::baseline::Baseline;
use crate::error::{Error, Result};
use crate::family::GmopgParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Galton skewness and Moors kurtosis from octiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileShape {
    pub skewness: f64,
    pub kurtosis: f64,
}

/// E[T^s] by adaptive quadrature of t^s f(t).
pub fn raw_moment<B: Baseline>(params: &GmopgParams<B>, s: u32) -> Result<f64> {
    params.validate()?;
    if s == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    let order = s as f64;
    let q = integrate_density(
        params,
        |t, ln_f| (order * t.ln() + ln_f).exp(),
        relative_settings(),
    )?;
    Ok(q.value)
}

/// E[(T − center)^k].
pub fn central_moment<B: Baseline>(params: &GmopgParams<B>, center: f64, k: u32) -> Result<f64> {
    params.validate()?;
    let q = integrate_density(
        params,
        |t, ln_f| (t - center).powi(k as i32) * ln_f.exp(),
        relative_settings(),
    )?;
    Ok(q.value)
}

pub fn moment_summary<B: Baseline>(params: &GmopgParams<B>) -> Result<MomentSummary> {
    let mean = raw_moment(params, 1)?;
    let variance = central_moment(params, mean, 2)?;
    if !(variance > 0.0) {
        return Err(Error::Degenerate(format!("variance is {variance}")));
    }
    let m3 = central_moment(params, mean, 3)?;
    let m4 = central_moment(params, mean, 4)?;
    Ok(MomentSummary {
        mean,
        variance,
        skewness: m3 / variance.powf(1.5),
        kurtosis: m4 / (variance * variance),
    })
}

/// Local exponential decay rate of the density far in the upper tail.
fn tail_decay_rate<B: Baseline>(params: &GmopgParams<B>) -> f64 {
    let t1 = params.quantile(1.0 - 1e-12);
    let t2 = 2.0 * t1;
    let (l1, l2) = (params.ln_pdf(t1), params.ln_pdf(t2));
    if l2 == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    -(l2 - l1) / (t2 - t1)
}

/// E[e^{sT}].
pub fn mgf<B: Baseline>(params: &GmopgParams<B>, s: f64) -> Result<f64> {
    params.validate()?;
    if !s.is_finite() {
        return Err(Error::Domain(format!("s must be finite, got {s}")));
    }
    if s > 0.0 {
        let rate = tail_decay_rate(params);
        if s >= rate {
            return Err(Error::Divergent(format!(
                "e^(sT) moment diverges: s = {s} is not below the tail decay rate {rate:.6}"
            )));
        }
    }
    let q = integrate_density(params, |t, ln_f| (s * t + ln_f).exp(), relative_settings())?;
    Ok(q.value)
}

pub fn quantile_shape<B: Baseline>(params: &GmopgParams<B>) -> Result<QuantileShape> {
    params.validate()?;
    let q = |k: f64| params.quantile(k / 8.0);
    let spread = q(6.0) - q(2.0);
    if !(spread > 0.0) {
        return Err(Error::Degenerate("interquartile range is zero".into()));
    }
    Ok(QuantileShape {
        skewness: (q(6.0) - 2.0 * q(4.0) + q(2.0)) / spread,
        kurtosis: (q(7.0) - q(5.0) + q(3.0) - q(1.0)) / spread,
    })
}

/// Γ_{p,q,r} = ∫ t^p G_PG(t)^q S_PG(t)^r g_PG(t) dt for the Poisson-G(λ)
/// member with the given baseline (λ = 0 is the baseline itself).
pub fn pwm_pg<B: Baseline + Clone>(
    lambda: f64,
    baseline: &B,
    p: u32,
    q: f64,
    r: f64,
) -> Result<f64> {
    if !(q > -1.0 && r > -1.0) {
        return Err(Error::Domain(format!(
            "probability weights need q > -1 and r > -1, got q = {q}, r = {r}"
        )));
    }
    let pg = GmopgParams::new(1.0, 1.0, lambda, baseline.clone())?;
    let power = p as f64;
    let value = integrate_density(
        &pg,
        |t, ln_f| {
            let point = pg.pg(t);
            let mut ln = ln_f;
            if p > 0 {
                ln += power * t.ln();
            }
            if q != 0.0 {
                ln += q * point.ln_f;
            }
            if r != 0.0 {
                ln += r * point.ln_s;
            }
            ln.exp()
        },
        relative_settings(),
    )?
    .value;
    if !value.is_finite() {
        return Err(Error::Divergent(format!(
            "PWM ({p}, {q}, {r}) is not finite"
        )));
    }
    Ok(value)
}

/// E[T^s] = Σⱼ ηⱼ Γ^{PG}_{s,0,j+θ−1}, truncated once both weight tails are
/// below 1e−10.
pub fn moment_via_pwm<B: Baseline + Clone>(params: &GmopgParams<B>, s: u32) -> Result<f64> {
    params.validate()?;
    if s == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    let mut series = SeriesExpansion::adaptive(params.theta, params.alpha, TAIL_MASS_TARGET)?;
    while series.eta_tail() > TAIL_MASS_TARGET && series.truncation < super::MAX_TRUNCATION {
        let next = (series.truncation * 2).min(super::MAX_TRUNCATION);
        series = super::series_coefficients(params.theta, params.alpha, next)?;
    }
    let mut total = 0.0;
    for (j, weight) in series.eta.iter().enumerate() {
        let gamma = pwm_pg(
            params.lambda,
            &params.baseline,
            s,
            0.0,
            j as f64 + params.theta - 1.0,
        )?;
        total += weight * gamma;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::BaselineSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gmop_e(theta: f64, alpha: f64, lambda: f64, beta: f64) -> GmopgParams {
        GmopgParams::new(
            theta,
            alpha,
            lambda,
            BaselineSpec::Exponential { rate: beta },
        )
        .unwrap()
    }

    #[test]
    fn table_one_first_rows() {
        let s = moment_summary(&gmop_e(10.0, 10.0, 2.0, 2.0)).unwrap();
        assert!((s.mean - 0.1572).abs() < 2e-4);
        assert!((s.variance - 0.0163).abs() < 1e-4);
        assert!((s.skewness - 1.2096).abs() < 2e-4);
        assert!((s.kurtosis - 4.6452).abs() < 2e-4);
        let half = moment_summary(&gmop_e(10.0, 10.0, 2.0, 0.5)).unwrap();
        assert!((half.skewness - s.skewness).abs() < 1e-8);
        assert!((half.kurtosis - s.kurtosis).abs() < 1e-7);
        let last = raw_moment(&gmop_e(5.0, 5.0, 10.0, 10.0), 1).unwrap();
        assert!((last - 0.0069).abs() < 2e-4);
    }

    #[test]
    fn rate_scaling() {
        let a = raw_moment(&gmop_e(10.0, 10.0, 2.0, 2.0), 1).unwrap();
        let b = raw_moment(&gmop_e(10.0, 10.0, 2.0, 1.0), 1).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-10);
        assert!((b - 0.3145).abs() < 2e-4);
    }

    #[test]
    fn exponential_reduction() {
        let p = gmop_e(1.0, 1.0, 0.0, 2.5);
        assert!((raw_moment(&p, 1).unwrap() - 0.4).abs() < 1e-12);
        assert!((raw_moment(&p, 2).unwrap() - 2.0 / 6.25).abs() < 1e-12);
    }

    #[test]
    fn moment_order_zero_rejected() {
        assert!(raw_moment(&gmop_e(1.0, 1.0, 1.0, 1.0), 0).is_err());
    }

    #[test]
    fn mgf_properties() {
        let p = gmop_e(2.0, 8.0, 5.0, 0.5);
        assert!((mgf(&p, 0.0).unwrap() - 1.0).abs() < 1e-10);
        let h = 1e-4;
        let slope = (mgf(&p, h).unwrap() - mgf(&p, -h).unwrap()) / (2.0 * h);
        assert!((slope - raw_moment(&p, 1).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn mgf_matches_monte_carlo() {
        let p = gmop_e(2.0, 8.0, 5.0, 0.5);
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = p.sample_with(&mut rng, n);
        let values: Vec<f64> = draws.iter().map(|t| (0.1 * t).exp()).collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mgf(&p, 0.1).unwrap() - mean).abs() < 3.0 * se);
    }

    #[test]
    fn mgf_divergence_is_detected() {
        // exponential-type tail decays at rate θβ = 1
        let p = gmop_e(2.0, 8.0, 5.0, 0.5);
        assert!(matches!(mgf(&p, 1.5), Err(Error::Divergent(_))));
    }

    #[test]
    fn galton_skewness_exponential() {
        let p = gmop_e(1.0, 1.0, 0.0, 1.0);
        let s = quantile_shape(&p).unwrap();
        let expected =
            (4f64.ln() - 2.0 * 2f64.ln() + (4.0f64 / 3.0).ln()) / (4f64.ln() - (4.0f64 / 3.0).ln());
        assert!((s.skewness - expected).abs() < 1e-12);
        assert!((expected - 0.2619).abs() < 1e-4);
    }

    #[test]
    fn galton_skewness_by_bisection() {
        let p = gmop_e(3.0, 2.0, 1.2, 0.7);
        let invert = |u: f64| {
            let (mut a, mut b) = (0.0, 100.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if p.cdf(m) < u {
                    a = m
                } else {
                    b = m
                }
            }
            0.5 * (a + b)
        };
        let q = |k: f64| invert(k / 8.0);
        let s = (q(6.0) - 2.0 * q(4.0) + q(2.0)) / (q(6.0) - q(2.0));
        let k = (q(7.0) - q(5.0) + q(3.0) - q(1.0)) / (q(6.0) - q(2.0));
        let shape = quantile_shape(&p).unwrap();
        assert!((shape.skewness - s).abs() < 1e-9);
        assert!((shape.kurtosis - k).abs() < 1e-9);
        assert!(shape.skewness.abs() < 1.0);
    }

    #[test]
    fn pwm_identities() {
        let b = BaselineSpec::Exponential { rate: 1.3 };
        let lambda = 2.0;
        assert!((pwm_pg(lambda, &b, 0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        let pg = gmop_e(1.0, 1.0, lambda, 1.3);
        assert!(
            (pwm_pg(lambda, &b, 1, 0.0, 0.0).unwrap() - raw_moment(&pg, 1).unwrap()).abs() < 1e-10
        );
        let sum =
            pwm_pg(lambda, &b, 0, 1.0, 0.0).unwrap() + pwm_pg(lambda, &b, 0, 0.0, 1.0).unwrap();
        assert!((sum - 1.0).abs() < 1e-10);
        assert!(pwm_pg(lambda, &b, 0, -1.0, 0.0).is_err());
    }

    #[test]
    fn moments_through_pwm() {
        let p = gmop_e(2.0, 0.5, 1.0, 1.0);
        for s in [1, 2] {
            let a = moment_via_pwm(&p, s).unwrap();
            let b = raw_moment(&p, s).unwrap();
            assert!((a - b).abs() < 1e-6, "s={s}: {a} vs {b}");
        }
        let near = gmop_e(1.0, 1.0 - 1e-6, 1.5, 1.0);
        let pg_mean = raw_moment(&gmop_e(1.0, 1.0, 1.5, 1.0), 1).unwrap();
        assert!((moment_via_pwm(&near, 1).unwrap() - pg_mean).abs() < 1e-5);
        assert!(matches!(
            moment_via_pwm(&gmop_e(2.0, 3.0, 1.0, 1.0), 1),
            Err(Error::UnsupportedExpansion(_))
        ));
    }
}
