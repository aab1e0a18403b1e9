//! The GMOP-G(θ, α, λ) family.
//!
//! Every quantity is evaluated as the generalized Marshall–Olkin transform
//! applied to the Poisson-G survival S = S_PG(t):
//!
//! ```text
//! F̄(t) = [α S / (1 − ᾱ S)]^θ,   1 − ᾱ S = F_PG + α S,   ᾱ = 1 − α
//! ```
//!
//! The Poisson-G pieces are kept in log space through `expm1` ratios, so both
//! signs of λ work and the λ → 0 (GMO) limit is continuous.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{Baseline, BaselineSpec};
use crate::error::{Error, Result};

/// Below this |λ| the Poisson-G layer uses its second-order series in λ.
pub const SMALL_LAMBDA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmopgParams<B = BaselineSpec> {
    pub theta: f64,
    pub alpha: f64,
    /// Poisson rate; 0 means the GMO limit.
    pub lambda: f64,
    pub baseline: B,
}

/// ln|e^x − 1|.
#[inline]
pub(crate) fn ln_abs_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().abs().ln()
    }
}

/// λ / (1 − e^{−λ}), positive for every real λ.
#[inline]
pub(crate) fn ln_lambda_factor(lambda: f64) -> f64 {
    if lambda.abs() < SMALL_LAMBDA {
        (1.0 + lambda / 2.0 + lambda * lambda / 12.0).ln()
    } else {
        lambda.abs().ln() - ln_abs_expm1(-lambda)
    }
}

/// Poisson-G quantities at a single point, all in log space.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PgPoint {
    pub ln_s: f64,
    pub ln_f: f64,
    pub ln_density: f64,
}

impl PgPoint {
    #[inline]
    pub fn s(&self) -> f64 {
        self.ln_s.exp()
    }
    #[inline]
    pub fn f(&self) -> f64 {
        self.ln_f.exp()
    }
}

/// ln|e^{−λ x} − 1| given x and ln x, accurate when λx underflows.
#[inline]
fn ln_abs_expm1_scaled(lambda: f64, x: f64, ln_x: f64) -> f64 {
    let arg = -lambda * x;
    if arg.abs() < 1e-10 {
        lambda.abs().ln() + ln_x + arg / 2.0
    } else {
        ln_abs_expm1(arg)
    }
}

pub(crate) fn pg_point<B: Baseline>(lambda: f64, baseline: &B, t: f64) -> PgPoint {
    let g_cdf = baseline.cdf(t);
    let ln_gbar = baseline.ln_sf(t);
    let gbar = ln_gbar.exp();
    let ln_g = baseline.ln_pdf(t);
    if lambda.abs() < SMALL_LAMBDA {
        let l2 = lambda * lambda;
        let s_factor = 1.0 - lambda * g_cdf / 2.0 + l2 * (2.0 * g_cdf * g_cdf - g_cdf) / 12.0;
        let f_factor = 1.0 + lambda * gbar / 2.0 - l2 * (2.0 * g_cdf - 1.0) * gbar / 12.0;
        return PgPoint {
            ln_s: ln_gbar + s_factor.ln(),
            ln_f: g_cdf.ln() + f_factor.ln(),
            ln_density: ln_g - lambda * g_cdf + ln_lambda_factor(lambda),
        };
    }
    let ln_denominator = ln_abs_expm1(-lambda);
    PgPoint {
        ln_s: -lambda * g_cdf + ln_abs_expm1_scaled(lambda, gbar, ln_gbar) - ln_denominator,
        ln_f: ln_abs_expm1_scaled(lambda, g_cdf, g_cdf.ln()) - ln_denominator,
        ln_density: ln_g - lambda * g_cdf + ln_lambda_factor(lambda),
    }
}

/// Baseline-scale probabilities (G, Ḡ) for a given Poisson-G survival and cdf.
fn pg_inverse(lambda: f64, s: f64, f: f64) -> (f64, f64) {
    if lambda == 0.0 {
        return (f, s);
    }
    if s < 0.5 {
        let em = lambda.exp_m1();
        let gbar = if em.is_finite() {
            (s * em).ln_1p() / lambda
        } else {
            // e^λ overflowed: ln(1 + s(e^λ − 1)) ≈ λ + ln s for huge λ.
            1.0 + s.ln() / lambda
        };
        let gbar = gbar.clamp(0.0, 1.0);
        (1.0 - gbar, gbar)
    } else {
        let g = (-(f * (-lambda).exp_m1()).ln_1p() / lambda).clamp(0.0, 1.0);
        (g, 1.0 - g)
    }
}

#[inline]
fn scaled_log(coefficient: f64, ln_value: f64) -> f64 {
    if coefficient == 0.0 {
        0.0
    } else {
        coefficient * ln_value
    }
}

/// Which reduced model a parameter vector is exactly equal to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum SpecialCase {
    MOP_G,
    P_G,
    GMO,
    MO,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    LocalMax,
    LocalMin,
    Inflexion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalTarget {
    Density,
    Hazard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub classification: Extremum,
    pub target: CriticalTarget,
    /// Residual of the critical-point equation at `location`.
    pub residual: f64,
    /// Second derivative of the log density (or log hazard) at `location`.
    pub curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SmallT,
    LargeT,
}

pub const CRITICAL_SCAN_POINTS: usize = 512;
pub const INFLEXION_TOLERANCE: f64 = 1e-6;

impl<B: Baseline> GmopgParams<B> {
    pub fn new(theta: f64, alpha: f64, lambda: f64, baseline: B) -> Result<Self> {
        let params = Self {
            theta,
            alpha,
            lambda,
            baseline,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::Validation(format!(
                "theta must be finite and > 0, got {}",
                self.theta
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Validation(format!(
                "alpha must be finite and > 0, got {}",
                self.alpha
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::Validation(format!(
                "lambda must be finite, got {}",
                self.lambda
            )));
        }
        self.baseline.validate()
    }

    #[inline]
    pub(crate) fn pg(&self, t: f64) -> PgPoint {
        pg_point(self.lambda, &self.baseline, t)
    }

    /// ln(1 − ᾱ S), evaluated as ln(F_PG + α S) so no cancellation occurs.
    #[inline]
    fn ln_gmo_denominator(&self, pg: &PgPoint) -> f64 {
        (pg.f() + self.alpha * pg.s()).ln()
    }

    pub fn ln_sf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let pg = self.pg(t);
        self.theta * (self.alpha.ln() + pg.ln_s - self.ln_gmo_denominator(&pg))
    }

    pub fn sf(&self, t: f64) -> f64 {
        self.ln_sf(t).exp().min(1.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.sf(t)
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NEG_INFINITY;
        }
        let pg = self.pg(t);
        self.ln_pdf_at(&pg)
    }

    #[inline]
    pub(crate) fn ln_pdf_at(&self, pg: &PgPoint) -> f64 {
        let ln_d = self.ln_gmo_denominator(pg);
        self.theta.ln()
            + self.theta * self.alpha.ln()
            + pg.ln_density
            + scaled_log(self.theta - 1.0, pg.ln_s)
            - (self.theta + 1.0) * ln_d
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    /// ln h(t) = ln θ + ln g_PG − ln S − ln(1 − ᾱ S); no survival division.
    pub fn ln_hazard(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NEG_INFINITY;
        }
        let pg = self.pg(t);
        self.theta.ln() + pg.ln_density - pg.ln_s - self.ln_gmo_denominator(&pg)
    }

    pub fn hazard(&self, t: f64) -> f64 {
        self.ln_hazard(t).exp()
    }

    /// Inverse cdf through the closed-form inversion of both layers.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        // GMO layer: w = (1 − p)^{1/θ} = αS/(1 − ᾱS).
        let ln_w = (-p).ln_1p() / self.theta;
        let w = ln_w.exp();
        let one_minus_w = -ln_w.exp_m1();
        let denominator = self.alpha * one_minus_w + w;
        let s = w / denominator;
        let f = self.alpha * one_minus_w / denominator;
        let (g, gbar) = pg_inverse(self.lambda, s, f);
        if gbar <= 0.0 {
            return f64::INFINITY;
        }
        if gbar < 0.5 {
            self.baseline.inverse_sf(gbar)
        } else if g <= 0.0 {
            0.0
        } else {
            self.baseline.quantile(g)
        }
    }

    /// `n` inverse-cdf draws from a ChaCha stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: RngCore>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.quantile(open_uniform(rng))).collect()
    }

    pub fn special_case(&self) -> SpecialCase {
        reduce_special_case(self.theta, self.alpha, self.lambda)
    }

    /// d/dt ln f(t); its zeros are the density's critical points.
    pub fn density_critical_equation(&self, t: f64) -> f64 {
        let pg = self.pg(t);
        let g = self.baseline.pdf(t);
        let ratio_s = (pg.ln_density - pg.ln_s).exp();
        let ratio_d = (pg.ln_density - self.ln_gmo_denominator(&pg)).exp();
        let mut value = self.baseline.d_ln_pdf(t) - self.lambda * g;
        if self.theta != 1.0 {
            value -= (self.theta - 1.0) * ratio_s;
        }
        value - (self.theta + 1.0) * (1.0 - self.alpha) * ratio_d
    }

    /// d/dt ln h(t); its zeros are the hazard's critical points.
    pub fn hazard_critical_equation(&self, t: f64) -> f64 {
        let pg = self.pg(t);
        let g = self.baseline.pdf(t);
        let ratio_s = (pg.ln_density - pg.ln_s).exp();
        let ratio_d = (pg.ln_density - self.ln_gmo_denominator(&pg)).exp();
        self.baseline.d_ln_pdf(t) - self.lambda * g + ratio_s - (1.0 - self.alpha) * ratio_d
    }

    pub fn density_critical_points(&self, interval: (f64, f64)) -> Result<Vec<CriticalPoint>> {
        self.validate()?;
        find_critical_points(
            |t| self.density_critical_equation(t),
            interval,
            CriticalTarget::Density,
        )
    }

    pub fn hazard_critical_points(&self, interval: (f64, f64)) -> Result<Vec<CriticalPoint>> {
        self.validate()?;
        find_critical_points(
            |t| self.hazard_critical_equation(t),
            interval,
            CriticalTarget::Hazard,
        )
    }

    pub fn asymptotic_pdf(&self, t: f64, regime: Regime) -> f64 {
        let g = self.baseline.pdf(t);
        match regime {
            Regime::SmallT => self.theta * g * ln_lambda_factor(self.lambda).exp() / self.alpha,
            Regime::LargeT => {
                let pg = self.pg(t);
                self.theta
                    * (self.theta * self.alpha.ln()
                        + ln_tail_lambda_factor(self.lambda)
                        + scaled_log(self.theta - 1.0, pg.ln_s))
                    .exp()
                    * g
            }
        }
    }

    pub fn asymptotic_cdf(&self, t: f64, regime: Regime) -> f64 {
        match regime {
            Regime::SmallT => 0.0,
            Regime::LargeT => {
                let pg = self.pg(t);
                1.0 - (self.theta * (self.alpha.ln() + pg.ln_s)).exp()
            }
        }
    }

    pub fn asymptotic_hazard(&self, t: f64, regime: Regime) -> f64 {
        match regime {
            Regime::SmallT => self.asymptotic_pdf(t, Regime::SmallT),
            Regime::LargeT => {
                let pg = self.pg(t);
                self.theta
                    * (ln_tail_lambda_factor(self.lambda) + self.baseline.ln_pdf(t) - pg.ln_s).exp()
            }
        }
    }
}

/// ln[λ e^{−λ} / (1 − e^{−λ})] = ln[λ / (e^λ − 1)].
fn ln_tail_lambda_factor(lambda: f64) -> f64 {
    if lambda.abs() < SMALL_LAMBDA {
        (1.0 - lambda / 2.0 + lambda * lambda / 12.0).ln()
    } else {
        lambda.abs().ln() - ln_abs_expm1(lambda)
    }
}

/// Uniform draw on the open interval (0, 1) from 53 random bits.
pub(crate) fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Tightest sub-model implied by exact parameter values.
pub fn reduce_special_case(theta: f64, alpha: f64, lambda: f64) -> SpecialCase {
    match (theta == 1.0, alpha == 1.0, lambda == 0.0) {
        (true, _, true) => SpecialCase::MO,
        (true, true, false) => SpecialCase::P_G,
        (true, false, false) => SpecialCase::MOP_G,
        (false, _, true) => SpecialCase::GMO,
        (false, _, false) => SpecialCase::None,
    }
}

fn find_critical_points<F: Fn(f64) -> f64>(
    equation: F,
    interval: (f64, f64),
    target: CriticalTarget,
) -> Result<Vec<CriticalPoint>> {
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "search interval must satisfy 0 < lo < hi < inf, got ({lo}, {hi})"
        )));
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..CRITICAL_SCAN_POINTS)
        .map(|i| {
            let u = i as f64 / (CRITICAL_SCAN_POINTS - 1) as f64;
            (ln_lo + u * (ln_hi - ln_lo)).exp()
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| equation(t)).collect();
    let mut points = Vec::new();
    for i in 0..grid.len() - 1 {
        let (va, vb) = (values[i], values[i + 1]);
        if !(va.is_finite() && vb.is_finite()) {
            continue;
        }
        let root = if va == 0.0 {
            grid[i]
        } else if va * vb < 0.0 {
            bisect(&equation, grid[i], grid[i + 1], va)
        } else {
            continue;
        };
        if points
            .last()
            .is_some_and(|p: &CriticalPoint| (p.location - root).abs() <= 1e-12 * root.max(1.0))
        {
            continue;
        }
        let h = 1e-5 * root;
        let curvature = (equation(root + h) - equation(root - h)) / (2.0 * h);
        let classification = if curvature.abs() < INFLEXION_TOLERANCE {
            Extremum::Inflexion
        } else if curvature < 0.0 {
            Extremum::LocalMax
        } else {
            Extremum::LocalMin
        };
        points.push(CriticalPoint {
            location: root,
            classification,
            target,
            residual: equation(root),
            curvature,
        });
    }
    Ok(points)
}

/// Bisection until the bracket is narrower than 1e-12 and the residual is
/// below 1e-10, or floating point stops making progress.
fn bisect<F: Fn(f64) -> f64>(equation: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    let mut best = (a, fa.abs());
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = equation(m);
        if fm.abs() < best.1 {
            best = (m, fm.abs());
        }
        if (b - a) < 1e-12 && fm.abs() < 1e-10 {
            return m;
        }
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    best.0
}

fn check_positive_t(t: f64) -> Result<()> {
    if t > 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be > 0, got {t}")))
    }
}

fn check_pg_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        Err(Error::Domain(format!(
            "Poisson-G requires a finite lambda != 0 (got {lambda}); use the GMO limit"
        )))
    } else {
        Ok(())
    }
}

/// (e^{−λG(t)} − e^{−λ}) / (1 − e^{−λ}).
pub fn pg_survival<B: Baseline>(lambda: f64, baseline: &B, t: f64) -> Result<f64> {
    check_pg_lambda(lambda)?;
    baseline.validate()?;
    check_positive_t(t)?;
    Ok(pg_point(lambda, baseline, t).s())
}

pub fn pg_cdf<B: Baseline>(lambda: f64, baseline: &B, t: f64) -> Result<f64> {
    check_pg_lambda(lambda)?;
    baseline.validate()?;
    check_positive_t(t)?;
    Ok(pg_point(lambda, baseline, t).f())
}

pub fn pg_pdf<B: Baseline>(lambda: f64, baseline: &B, t: f64) -> Result<f64> {
    check_pg_lambda(lambda)?;
    baseline.validate()?;
    check_positive_t(t)?;
    Ok(pg_point(lambda, baseline, t).ln_density.exp())
}

pub fn survival<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<f64> {
    params.validate()?;
    check_positive_t(t)?;
    Ok(params.sf(t))
}

pub fn cdf<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<f64> {
    params.validate()?;
    check_positive_t(t)?;
    Ok(params.cdf(t))
}

pub fn pdf<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<f64> {
    params.validate()?;
    check_positive_t(t)?;
    Ok(params.pdf(t))
}

pub fn ln_pdf<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<f64> {
    params.validate()?;
    check_positive_t(t)?;
    Ok(params.ln_pdf(t))
}

pub fn hazard<B: Baseline>(params: &GmopgParams<B>, t: f64) -> Result<f64> {
    params.validate()?;
    check_positive_t(t)?;
    Ok(params.hazard(t))
}

pub fn quantile<B: Baseline>(params: &GmopgParams<B>, p: f64) -> Result<f64> {
    params.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(params.quantile(p))
}

pub fn sample<B: Baseline>(params: &GmopgParams<B>, n: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(params.sample(n, seed))
}

/// f_X(t) / f_Y(t) for two members that differ only in α.
pub fn likelihood_ratio<B: Baseline + PartialEq>(
    x: &GmopgParams<B>,
    y: &GmopgParams<B>,
    t: f64,
) -> Result<f64> {
    x.validate()?;
    y.validate()?;
    check_positive_t(t)?;
    if x.theta != y.theta || x.lambda != y.lambda || x.baseline != y.baseline {
        return Err(Error::Validation(
            "likelihood ratio requires equal theta, lambda and baseline".into(),
        ));
    }
    let pg = x.pg(t);
    let ln_dx = x.ln_gmo_denominator(&pg);
    let ln_dy = y.ln_gmo_denominator(&pg);
    Ok((x.theta * (x.alpha / y.alpha).ln() + (x.theta + 1.0) * (ln_dy - ln_dx)).exp())
}

/// Draws from the compounding construction: the minimum over `theta` groups
/// of the minimum (α ≤ 1, N ~ Geometric(α)) or maximum (α > 1,
/// N ~ Geometric(1/α)) of N Poisson-G variables.
pub fn sample_compounding<B: Baseline + Clone>(
    theta: u32,
    alpha: f64,
    lambda: f64,
    baseline: &B,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if theta == 0 {
        return Err(Error::Validation("theta must be a positive integer".into()));
    }
    let pg = GmopgParams::new(1.0, 1.0, lambda, baseline.clone())?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Validation(format!("alpha must be > 0, got {alpha}")));
    }
    let use_max = alpha > 1.0;
    let success = if use_max { 1.0 / alpha } else { alpha };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut overall = f64::INFINITY;
        for _ in 0..theta {
            let count = geometric(&mut rng, success);
            let mut group = if use_max { 0.0 } else { f64::INFINITY };
            for _ in 0..count {
                let draw = pg.quantile(open_uniform(&mut rng));
                group = if use_max {
                    group.max(draw)
                } else {
                    group.min(draw)
                };
            }
            overall = overall.min(group);
        }
        out.push(overall);
    }
    Ok(out)
}

/// Number of trials up to and including the first success.
fn geometric<R: Rng>(rng: &mut R, success: f64) -> u64 {
    if success >= 1.0 {
        return 1;
    }
    let u = open_uniform(rng);
    1 + (u.ln() / (-success).ln_1p()).floor() as u64
}
