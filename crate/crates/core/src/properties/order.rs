use super::series::series_coefficients;
use crate::baseline::Baseline;
use crate::error::{Error, Result};
use crate::family::GmopgParams;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn check_indices(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::Validation(format!(
            "order statistic index must satisfy 1 <= i <= n, got i = {i}, n = {n}"
        )));
    }
    Ok(())
}

/// Density of the i-th smallest of n draws,
/// n!/((i−1)!(n−i)!) f F^{i−1} F̄^{n−i}, evaluated in log space.
pub fn order_statistic_pdf<B: Baseline>(
    params: &GmopgParams<B>,
    i: usize,
    n: usize,
    t: f64,
) -> Result<f64> {
    params.validate()?;
    check_indices(i, n)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    let ln_sf = params.ln_sf(t);
    let ln_cdf = (-ln_sf.exp_m1()).ln();
    let ln_coefficient = ln_factorial(n) - ln_factorial(i - 1) - ln_factorial(n - i);
    let mut ln = ln_coefficient + params.ln_pdf(t);
    if i > 1 {
        ln += (i - 1) as f64 * ln_cdf;
    }
    if n > i {
        ln += (n - i) as f64 * ln_sf;
    }
    Ok(ln.exp())
}

/// The same density from the Poisson-G power expansions, truncated at
/// `truncation` terms in each sum. Each survival power F̄^m is expanded with
/// its own weights η′ₖ(θm), since F̄^m is itself a GMO transform with shape θm.
pub fn order_statistic_pdf_series<B: Baseline>(
    params: &GmopgParams<B>,
    i: usize,
    n: usize,
    t: f64,
    truncation: usize,
) -> Result<f64> {
    params.validate()?;
    check_indices(i, n)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    let (theta, alpha) = (params.theta, params.alpha);
    let pg = params.pg(t);
    let s = pg.s();
    let density = series_coefficients(theta, alpha, truncation)?
        .eta
        .iter()
        .enumerate()
        .map(|(j, w)| w * s.powf(j as f64 + theta - 1.0))
        .sum::<f64>()
        * pg.ln_density.exp();
    let mut alternating = 0.0;
    let mut binomial = 1.0;
    for l in 0..i {
        let m = (n + l - i) as f64;
        let power_sum = if m == 0.0 {
            1.0
        } else {
            series_coefficients(theta * m, alpha, truncation)?
                .eta_prime
                .iter()
                .enumerate()
                .map(|(k, w)| w * s.powf(k as f64 + theta * m))
                .sum::<f64>()
        };
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        alternating += sign * binomial * power_sum;
        binomial *= (i - 1 - l) as f64 / (l + 1) as f64;
    }
    let coefficient = (ln_factorial(n) - ln_factorial(i - 1) - ln_factorial(n - i)).exp();
    Ok(coefficient * density * alternating)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::BaselineSpec;
    use crate::quadrature::{integrate_segments, QuadSettings};

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
    fn single_observation_is_the_density() {
        let p = gmop_e(2.0, 8.0, 5.0, 0.5);
        for t in [0.1, 1.0, 4.0] {
            assert!((order_statistic_pdf(&p, 1, 1, t).unwrap() - p.pdf(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn average_over_ranks_is_the_density() {
        let p = gmop_e(1.5, 0.3, -2.0, 1.2);
        for k in 1..40 {
            let t = k as f64 * 0.1;
            let avg: f64 = (1..=5)
                .map(|i| order_statistic_pdf(&p, i, 5, t).unwrap())
                .sum::<f64>()
                / 5.0;
            assert!((avg - p.pdf(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization() {
        let p = gmop_e(2.0, 8.0, 5.0, 0.5);
        let breaks = super::super::quantile_breaks(&p);
        let q = integrate_segments(
            |t| {
                if t > 0.0 {
                    order_statistic_pdf(&p, 3, 7, t).unwrap()
                } else {
                    0.0
                }
            },
            &breaks,
            Some(breaks[breaks.len() - 1]),
            QuadSettings::default(),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn series_form_matches_direct_form() {
        let p = gmop_e(2.0, 0.6, 1.0, 1.0);
        for (i, n) in [(1, 1), (1, 3), (2, 3), (3, 3), (2, 5)] {
            for t in [0.3, 1.0, 2.5] {
                let a = order_statistic_pdf(&p, i, n, t).unwrap();
                let b = order_statistic_pdf_series(&p, i, n, t, 400).unwrap();
                assert!((a - b).abs() < 1e-8, "({i},{n}) t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn invalid_indices() {
        let p = gmop_e(2.0, 0.6, 1.0, 1.0);
        assert!(matches!(
            order_statistic_pdf(&p, 0, 3, 1.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            order_statistic_pdf(&p, 4, 3, 1.0),
            Err(Error::Validation(_))
        ));
    }
}
