//! Kullback–Leibler divergence from a generating Weibull model to a
//! candidate, for complete data and for type I censoring at a fixed time.
//!
//! Under censoring the observable is the pair `(min(Y, c), 1{Y ≤ c})`, so the
//! divergence is the density part integrated over `(0, c)` plus the point
//! mass at `c`.

use crate::error::{domain, Error, Result};
use crate::special::{exp_integral_ei, log_gamma, lower_inc_gamma, EULER_GAMMA};
use crate::weibull::WeibullParams;

/// Negative results down to this are treated as rounding and reported as 0.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlInput {
    /// Data-generating model `(k₀, λ₀)`.
    pub generator: WeibullParams,
    /// Approximating model `(k₁, λ₁)`.
    pub candidate: WeibullParams,
    pub censor_time: Option<f64>,
}

impl KlInput {
    pub fn new(
        generator: WeibullParams,
        candidate: WeibullParams,
        censor_time: Option<f64>,
    ) -> Result<Self> {
        if let Some(c) = censor_time {
            if !(c > 0.0 && c.is_finite()) {
                return Err(domain(format!("censor time must be finite and positive, got {c}")));
            }
        }
        Ok(Self {
            generator,
            candidate,
            censor_time,
        })
    }
}

/// `KL` for the complete-data model.
pub fn kl_complete(generator: WeibullParams, candidate: WeibullParams) -> Result<f64> {
    let (k0, l0) = (generator.shape(), generator.scale());
    let (k1, l1) = (candidate.shape(), candidate.scale());
    let r = k1 / k0;
    // (λ₀/λ₁)^{k₁} Γ(r + 1), kept in log space until the end
    let log_moment = k1 * (l0 / l1).ln() + log_gamma(r + 1.0)?;
    let moment = log_moment.exp();
    if !moment.is_finite() {
        return Err(Error::Overflow(format!(
            "E[(Y/λ₁)^k₁] overflows for generator ({k0}, {l0}) and candidate ({k1}, {l1})"
        )));
    }
    let value = moment + (r - 1.0) * EULER_GAMMA + (k0 / k1).ln() + k1 * (l1 / l0).ln() - 1.0;
    clamp(value)
}

/// `KL` for observations censored at `c`.
pub fn kl_censored(generator: WeibullParams, candidate: WeibullParams, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("censor time must be finite and positive, got {c}")));
    }
    let (k0, l0) = (generator.shape(), generator.scale());
    let (k1, l1) = (candidate.shape(), candidate.scale());
    let r = k1 / k0;
    let log_c0 = (c / l0).ln();
    let log_c1 = (c / l1).ln();
    let z0 = (k0 * log_c0).exp();
    let z1_log = k1 * log_c1;

    // e^{−z₀} A₁, with the (c/λ₁)^{k₁} term folded into the exponent
    let survival0 = (-z0).exp();
    let a1 = survival0 * ((k1 / k0).ln() + k1 * log_c1 - k0 * log_c0 + 1.0) + (z1_log - z0).exp();

    // (λ₀/λ₁)^{k₁} γ(r + 1, z₀)
    let lower = lower_inc_gamma(r + 1.0, z0)?;
    let a2 = if lower > 0.0 {
        (k1 * (l0 / l1).ln() + lower.ln()).exp()
    } else {
        0.0
    };

    // Ei(−z₀) vanishes to double precision well before the argument limit.
    let ei = if z0 > 700.0 { 0.0 } else { exp_integral_ei(-z0)? };
    let a3 = ei - EULER_GAMMA;

    let value = a1 + a2 + (1.0 - r) * a3 + (k0 / k1).ln() + k1 * (l1 / l0).ln() - 1.0;
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "censored KL is not finite for generator ({k0}, {l0}), candidate ({k1}, {l1}), c = {c}"
        )));
    }
    clamp(value)
}

/// Dispatches on the presence of a censor time.
pub fn kl_divergence(input: &KlInput) -> Result<f64> {
    match input.censor_time {
        Some(c) => kl_censored(input.generator, input.candidate, c),
        None => kl_complete(input.generator, input.candidate),
    }
}

fn clamp(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::Overflow(format!(
            "divergence evaluated to {value:e}; precision lost to cancellation"
        )))
    }
}
