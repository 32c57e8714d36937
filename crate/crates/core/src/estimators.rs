//! Point estimators for the Weibull shape and scale.
//!
//! | method | shape estimate |
//! |--------|----------------|
//! | `ML`   | root of the profile score `d/k + Σδ log y − d Σyᵏ log y / Σyᵏ` |
//! | `ROSS` | `(n−2)/(n−0.68) · k̂_ML` (complete data only) |
//! | `MLC`  | Yang–Xie score: numerator `n−2` (complete) or `d−1` (censored) |
//! | `MMLE` | `θ̂_ML − bias(θ̂_ML)` with the first-order bias in closed form |
//!
//! Apart from MMLE, the scale is always `((1/d) Σ yᵢᵏ)^(1/k)` evaluated at the
//! method's own shape estimate.
//!
//! Two closed forms of the censored-data bias are available, see
//! [`CensoredBiasForm`]. They share the terms in `p` and `γⱼ = γ⁽ʲ⁾(1, z_c)`;
//! the default adds the terms in `L = log z_c` and `w = z_c e^{−z_c}` that
//! arise because the censoring time, not the censored proportion, is fixed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::solver::{self, SolverOptions};
use crate::special::{inc_gamma_derivs, EULER_GAMMA, ZETA3};
use crate::weibull::{CensoredSample, WeibullParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ml,
    Ross,
    Mlc,
    Mmle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ml, Method::Ross, Method::Mlc, Method::Mmle];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ml => "ML",
            Method::Ross => "ROSS",
            Method::Mlc => "MLC",
            Method::Mmle => "MMLE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ML" | "MLE" => Ok(Method::Ml),
            "ROSS" => Ok(Method::Ross),
            "MLC" => Ok(Method::Mlc),
            "MMLE" => Ok(Method::Mmle),
            _ => Err(domain(format!("unknown method {s:?}"))),
        }
    }
}

/// How the uncensored proportion `p` is estimated when correcting censored fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PPlugin {
    /// `p̂ = 1 − exp(−(c/λ̂)^k̂)` at the ML estimates.
    #[default]
    Model,
    /// `p̂ = d/n`.
    UncensoredFraction,
}

impl FromStr for PPlugin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(PPlugin::Model),
            "d_over_n" | "d-over-n" => Ok(PPlugin::UncensoredFraction),
            _ => Err(domain(format!("unknown p plug-in {s:?} (expected model or d_over_n)"))),
        }
    }
}

impl fmt::Display for PPlugin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PPlugin::Model => "model",
            PPlugin::UncensoredFraction => "d_over_n",
        })
    }
}

/// Which closed form of the censored-data bias to use.
///
/// Both come from `K⁻¹ A vec(K⁻¹)` with the same information matrix and
/// differ in the derivatives `∂κᵢⱼ/∂θₗ` inside `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CensoredBiasForm {
    /// Derivatives taken with the censoring time `c` held fixed, so that
    /// `z_c = (c/λ)ᵏ` moves with `(k, λ)`. This is the bias of ML under
    /// type I censoring.
    #[default]
    FixedCensorTime,
    /// Derivatives taken with `p` held fixed. Matches the displayed `f`,
    /// `f₁`, `f₂` formulas; overstates the shape bias for `p < 1`.
    Published,
}

impl FromStr for CensoredBiasForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-c" | "fixed_c" => Ok(CensoredBiasForm::FixedCensorTime),
            "published" => Ok(CensoredBiasForm::Published),
            _ => Err(domain(format!(
                "unknown censored bias form {s:?} (expected fixed-c or published)"
            ))),
        }
    }
}

impl fmt::Display for CensoredBiasForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CensoredBiasForm::FixedCensorTime => "fixed-c",
            CensoredBiasForm::Published => "published",
        })
    }
}

/// Settings for the MMLE correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MmleOptions {
    pub p_plugin: PPlugin,
    pub bias_form: CensoredBiasForm,
}

impl MmleOptions {
    pub fn with_plugin(p_plugin: PPlugin) -> Self {
        Self {
            p_plugin,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorReport {
    pub method: Method,
    pub params: WeibullParams,
    /// Uncensored proportion used by a censored-data MMLE correction.
    pub p_hat: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// False when the MMLE scale correction would leave `λ ≤ 0` and the ML
    /// scale was kept instead. Always true for the other methods.
    pub scale_corrected: bool,
}

/// Additive first-order biases of the ML estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasAdjustment {
    pub bias_k: f64,
    pub bias_lambda: f64,
}

/// The functions `f(p)`, `f₁(p)`, `f₂(p)` of the censored-data bias,
/// `bias_k = k f/n`, `bias_λ = λ (f₁/(nk²) + f₂/(nk))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasFactors {
    pub p: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Profile score in the shape, with values rescaled by their maximum.
///
/// With `lᵢ = log(yᵢ/y_max)` and weights `wᵢ = exp(k lᵢ) ∈ (0, 1]`,
/// `score(k) = a/k + Σδ l − d·E_w[l]`, `score'(k) = −a/k² − d·Var_w[l]`.
struct ShapeScore {
    log_scaled: Vec<f64>,
    event_log_sum: f64,
    d: f64,
    y_max: f64,
}

impl ShapeScore {
    fn new(sample: &CensoredSample) -> Self {
        let y_max = sample.values().iter().cloned().fold(0.0, f64::max);
        let log_scaled: Vec<f64> = sample.values().iter().map(|y| (y / y_max).ln()).collect();
        let event_log_sum = log_scaled
            .iter()
            .zip(sample.events())
            .filter(|(_, &e)| e)
            .map(|(l, _)| l)
            .sum();
        Self {
            log_scaled,
            event_log_sum,
            d: sample.uncensored_count() as f64,
            y_max,
        }
    }

    fn weighted_moments(&self, k: f64) -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &self.log_scaled {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        (s0, s1, s2)
    }

    fn eval(&self, numerator: f64, k: f64) -> (f64, f64) {
        let (s0, s1, s2) = self.weighted_moments(k);
        let mean = s1 / s0;
        let var = (s2 / s0 - mean * mean).max(0.0);
        (
            numerator / k + self.event_log_sum - self.d * mean,
            -numerator / (k * k) - self.d * var,
        )
    }

    fn scale_at(&self, k: f64) -> f64 {
        let (s0, _, _) = self.weighted_moments(k);
        self.y_max * (s0 / self.d).powf(1.0 / k)
    }
}

/// Value of the shape score with the given numerator (`d` for ML, `d−1`
/// or `n−2` for MLC) at `k`, together with its derivative.
pub fn shape_score(sample: &CensoredSample, numerator: f64, k: f64) -> (f64, f64) {
    ShapeScore::new(sample).eval(numerator, k)
}

/// Moment-style starting value `1.2 / sd(log y)` over uncensored values.
fn starting_shape(sample: &CensoredSample) -> f64 {
    let logs: Vec<f64> = sample
        .values()
        .iter()
        .zip(sample.events())
        .filter(|(_, &e)| e)
        .map(|(y, _)| y.ln())
        .collect();
    if logs.len() < 2 {
        return 1.0;
    }
    let m = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / m;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (m - 1.0);
    if var > 0.0 {
        1.2 / var.sqrt()
    } else {
        1.0
    }
}

/// Solves the shape score with the given numerator and derives the scale.
fn solve_shape(sample: &CensoredSample, numerator: f64) -> Result<(WeibullParams, usize)> {
    let d = sample.uncensored_count();
    if d == 0 {
        return Err(Error::NoSolution("no uncensored observations".into()));
    }
    let score = ShapeScore::new(sample);
    // As k → ∞ the score tends to Σδ l, which must be negative for a root.
    if score.event_log_sum >= 0.0 {
        return Err(Error::NoSolution(
            "every uncensored value equals the sample maximum; the shape estimate diverges".into(),
        ));
    }
    let root = solver::solve_decreasing(
        |k| score.eval(numerator, k),
        starting_shape(sample),
        &SolverOptions::default(),
    )?;
    let params = WeibullParams::new(root.x, score.scale_at(root.x))?;
    Ok((params, root.iterations))
}

fn report(method: Method, params: WeibullParams, iterations: usize) -> EstimatorReport {
    EstimatorReport {
        method,
        params,
        p_hat: None,
        iterations,
        converged: true,
        scale_corrected: true,
    }
}

/// Maximum likelihood fit for complete or type I censored data.
pub fn fit_ml(sample: &CensoredSample) -> Result<EstimatorReport> {
    let d = sample.uncensored_count();
    if !sample.is_censored() && sample.len() < 2 {
        return Err(Error::NoSolution("at least two observations are required".into()));
    }
    let (params, iterations) = solve_shape(sample, d as f64)?;
    Ok(report(Method::Ml, params, iterations))
}

/// Multiplicative shape correction `(n−2)/(n−0.68)`.
pub fn ross_factor(n: usize) -> f64 {
    let n = n as f64;
    (n - 2.0) / (n - 0.68)
}

/// Ross's corrected shape for complete data, with the scale re-derived.
pub fn fit_ross(sample: &CensoredSample) -> Result<EstimatorReport> {
    if sample.is_censored() {
        return Err(Error::Unsupported(
            "the Ross correction is only implemented for complete data".into(),
        ));
    }
    let n = sample.len();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "the Ross correction needs n >= 3, got {n}"
        )));
    }
    let ml = fit_ml(sample)?;
    let k = ross_factor(n) * ml.params.shape();
    let params = WeibullParams::new(k, ShapeScore::new(sample).scale_at(k))?;
    Ok(report(Method::Ross, params, ml.iterations))
}

/// Yang–Xie modified-profile-likelihood shape estimate.
pub fn fit_mlc(sample: &CensoredSample) -> Result<EstimatorReport> {
    let numerator = if sample.is_censored() {
        let d = sample.uncensored_count();
        if d < 2 {
            return Err(Error::Precondition(format!(
                "MLC needs at least two uncensored observations, got {d}"
            )));
        }
        (d - 1) as f64
    } else {
        let n = sample.len();
        if n < 3 {
            return Err(Error::Precondition(format!(
                "MLC needs at least three observations, got {n}"
            )));
        }
        (n - 2) as f64
    };
    let (params, iterations) = solve_shape(sample, numerator)?;
    Ok(report(Method::Mlc, params, iterations))
}

/// Shape bias constant for complete data, `18(π² − 2ζ(3))/π⁴ ≈ 1.3795`.
pub fn complete_shape_bias_constant() -> f64 {
    18.0 * (PI * PI - 2.0 * ZETA3) / PI.powi(4)
}

/// Scale bias constants for complete data: `(C₁, C₂) ≈ (0.5543, −0.3698)`.
pub fn complete_scale_bias_constants() -> (f64, f64) {
    let g = EULER_GAMMA;
    let pi2 = PI * PI;
    let c1 = 3.0 * (g - 1.0).powi(2) / pi2 + 0.5;
    let c2 = 36.0 * (g - 1.0) * ZETA3 / (pi2 * pi2) + (15.0 - 12.0 * g) / pi2 - 1.0;
    (c1, c2)
}

/// First-order bias of the complete-data ML estimates at `params`.
pub fn bias_complete(params: WeibullParams, n: usize) -> Result<BiasAdjustment> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    let (k, lambda, n) = (params.shape(), params.scale(), n as f64);
    let (c1, c2) = complete_scale_bias_constants();
    Ok(BiasAdjustment {
        bias_k: k * complete_shape_bias_constant() / n,
        bias_lambda: lambda * (c1 / (n * k * k) + c2 / (n * k)),
    })
}

/// `f(p)`, `f₁(p)` and `f₂(p)` for an uncensored proportion `p ∈ (0, 1)`,
/// in the default form.
pub fn bias_factors(p: f64) -> Result<BiasFactors> {
    bias_factors_with(p, CensoredBiasForm::default())
}

/// `f(p)`, `f₁(p)` and `f₂(p)` in the requested form.
pub fn bias_factors_with(p: f64, form: CensoredBiasForm) -> Result<BiasFactors> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("uncensored proportion must be in (0, 1), got {p}")));
    }
    let z_c = -(-p).ln_1p();
    let [_, g1, g2, g3] = inc_gamma_derivs(z_c)?;
    let denom = g1 * g1 - g2 * p;
    if denom.abs() < 1e-14 {
        return Err(Error::Singular(format!(
            "γ₁² − γ₂p = {denom:e} at p = {p}; the censored bias is undefined"
        )));
    }
    let denom_sq = 2.0 * denom * denom;
    let mut f = (-3.0 * (2.0 * g1 + g2) * g1 * p + (6.0 * g2 + g3) * p * p + 2.0 * g1.powi(3))
        / denom_sq;
    let f1 = -(p + 2.0 * g1 + g2) / (2.0 * denom);
    let mut f2 = ((5.0 * g2 + g3) * p * p
        + (-5.0 * g1 * g1 + (g2 + g3) * g1 - 2.0 * g2 * g2) * p
        + (g2 - 2.0 * g1) * g1 * g1)
        / denom_sq;
    if form == CensoredBiasForm::FixedCensorTime {
        let l = z_c.ln();
        let w = z_c * (1.0 - p);
        let q = l * l * p - 2.0 * l * g1 - l * p + g1 + g2;
        let scale = 2.0 * w * q / denom_sq;
        f -= scale * (l * p - g1);
        f2 -= scale * (l * g1 + l * p - g1 - g2);
    }
    Ok(BiasFactors { p, f, f1, f2 })
}

/// First-order bias of the type I censored ML estimates at `params`, for a
/// sample of size `n` with uncensored proportion `p`.
pub fn bias_censored(params: WeibullParams, n: usize, p: f64) -> Result<BiasAdjustment> {
    bias_censored_with(params, n, p, CensoredBiasForm::default())
}

pub fn bias_censored_with(
    params: WeibullParams,
    n: usize,
    p: f64,
    form: CensoredBiasForm,
) -> Result<BiasAdjustment> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    let BiasFactors { f, f1, f2, .. } = bias_factors_with(p, form)?;
    let (k, lambda, n) = (params.shape(), params.scale(), n as f64);
    Ok(BiasAdjustment {
        bias_k: k * f / n,
        bias_lambda: lambda * (f1 / (n * k * k) + f2 / (n * k)),
    })
}

/// Uncensored proportion used by the censored correction.
pub fn estimate_p(sample: &CensoredSample, ml: &WeibullParams, plugin: PPlugin) -> Option<f64> {
    let c = sample.censor_time()?;
    Some(match plugin {
        PPlugin::Model => ml.uncensored_fraction(c),
        PPlugin::UncensoredFraction => sample.uncensored_count() as f64 / sample.len() as f64,
    })
}

/// Applies the first-order bias correction to an existing ML fit of `sample`.
///
/// For censored data the correction is evaluated at the plug-in `p̂`; when
/// `p̂` rounds to 1 the complete-data correction (its limit) is used.
pub fn adjust_ml(
    sample: &CensoredSample,
    ml: &EstimatorReport,
    opts: MmleOptions,
) -> Result<EstimatorReport> {
    let n = sample.len();
    let p_hat = estimate_p(sample, &ml.params, opts.p_plugin);
    let bias = match p_hat {
        Some(p) if p < 1.0 => bias_censored_with(ml.params, n, p, opts.bias_form)?,
        _ => bias_complete(ml.params, n)?,
    };
    let (k, lambda) = (ml.params.shape(), ml.params.scale());
    let k_adj = k - bias.bias_k;
    if !(k_adj > 0.0) {
        return Err(Error::CorrectionOvershoot {
            parameter: "shape",
            estimate: k,
            bias: bias.bias_k,
        });
    }
    // The 1/k² term in the scale bias can exceed λ̂ itself when k̂ is small
    // and censoring is heavy. The shape correction does not depend on λ̃, so
    // keep it and fall back to the ML scale.
    let lambda_adj = lambda - bias.bias_lambda;
    let scale_corrected = lambda_adj > 0.0;
    Ok(EstimatorReport {
        method: Method::Mmle,
        params: WeibullParams::new(k_adj, if scale_corrected { lambda_adj } else { lambda })?,
        p_hat,
        iterations: ml.iterations,
        converged: ml.converged,
        scale_corrected,
    })
}

/// Bias-adjusted ML estimate `θ̃ = θ̂_ML − bias(θ̂_ML)`.
pub fn fit_mmle(sample: &CensoredSample, opts: MmleOptions) -> Result<EstimatorReport> {
    let ml = fit_ml(sample)?;
    adjust_ml(sample, &ml, opts)
}

/// Runs one estimator by tag.
pub fn fit(sample: &CensoredSample, method: Method, opts: MmleOptions) -> Result<EstimatorReport> {
    match method {
        Method::Ml => fit_ml(sample),
        Method::Ross => fit_ross(sample),
        Method::Mlc => fit_mlc(sample),
        Method::Mmle => fit_mmle(sample, opts),
    }
}
