use super::{integrate_density, relative_settings};
use crate::baseline::Baseline;
use crate::error::{Error, Result};
use crate::family::GmopgParams;

fn check_order(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) || delta == 1.0 {
        return Err(Error::Domain(format!(
            "Renyi order must be > 0 and != 1, got {delta}"
        )));
    }
    Ok(())
}

/// I_R(δ) = log(∫ f^δ) / (1 − δ) with the integral by quadrature.
pub fn renyi_entropy<B: Baseline>(params: &GmopgParams<B>, delta: f64) -> Result<f64> {
    params.validate()?;
    check_order(delta)?;
    let integral =
        integrate_density(params, |_, ln_f| (delta * ln_f).exp(), relative_settings())?.value;
    if !(integral.is_finite() && integral > 0.0) {
        return Err(Error::Divergent(format!(
            "integral of f^delta is {integral}"
        )));
    }
    Ok(integral.ln() / (1.0 - delta))
}

/// The same entropy through the weights
/// μⱼ = θ^δ α^{δθ} (1 − α)^j Γ(δ(θ + 1) + j) / (Γ(δ(θ + 1)) j!),
/// each multiplying ∫ [g_PG S^{θ−1}]^δ S^j dt. Valid for α in (0, 1).
pub fn renyi_entropy_series<B: Baseline>(params: &GmopgParams<B>, delta: f64) -> Result<f64> {
    params.validate()?;
    check_order(delta)?;
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(Error::UnsupportedExpansion(params.alpha));
    }
    let (theta, alpha) = (params.theta, params.alpha);
    let k = delta * (theta + 1.0);
    let mut weight = theta.powf(delta) * alpha.powf(delta * theta);
    let mut total = 0.0;
    let mut quiet = 0;
    for j in 0..super::MAX_TRUNCATION {
        let power = j as f64;
        let term_integral = integrate_density(
            params,
            |t, _| {
                let pg = params.pg(t);
                (delta * (pg.ln_density + (theta - 1.0) * pg.ln_s) + power * pg.ln_s).exp()
            },
            relative_settings(),
        )?
        .value;
        let term = weight * term_integral;
        total += term;
        if term < 1e-13 * total {
            quiet += 1;
            if quiet >= 5 {
                break;
            }
        } else {
            quiet = 0;
        }
        weight *= (1.0 - alpha) * (k + power) / (power + 1.0);
    }
    Ok(total.ln() / (1.0 - delta))
}
