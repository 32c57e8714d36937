//! Browser demo: bias curve, KL explorer and data fitting.
//!
//! The exported functions are thin `wasm-bindgen` shims over plain Rust
//! functions that are tested natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;
use weibull_bias::dataset::parse_data;
use weibull_bias::divergence::{kl_divergence, KlInput};
use weibull_bias::estimators::bias_factors_with;
use weibull_bias::{fit, CensoredBiasForm, Method, MmleOptions, PPlugin, WeibullParams};

fn form(published: bool) -> CensoredBiasForm {
    if published {
        CensoredBiasForm::Published
    } else {
        CensoredBiasForm::FixedCensorTime
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<impl Iterator<Item = f64>, String> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) || steps < 2 {
        return Err(format!("bad grid [{lo}, {hi}] with {steps} steps"));
    }
    Ok((0..steps).map(move |i| lo + (hi - lo) * i as f64 / (steps - 1) as f64))
}

/// Rows `(p, f(p), bias_k)` flattened, for `n` observations at shape `k`.
pub fn bias_curve_rows(
    k: f64,
    n: usize,
    p_min: f64,
    p_max: f64,
    steps: usize,
    published: bool,
) -> Result<Vec<f64>, String> {
    if !(0.0 < p_min && p_max < 1.0) {
        return Err("p range must lie inside (0, 1)".into());
    }
    if !(k > 0.0) || n == 0 {
        return Err("need k > 0 and n ≥ 1".into());
    }
    let mut out = Vec::with_capacity(3 * steps);
    for p in grid(p_min, p_max, steps)? {
        let f = bias_factors_with(p, form(published)).map_err(|e| e.to_string())?.f;
        out.extend([p, f, k * f / n as f64]);
    }
    Ok(out)
}

/// `KL(generator ‖ Weibull(k₁, λ₁))` for `k₁` on a grid, flattened as
/// `(k₁, KL)` pairs. A non-positive `censor_time` means complete data.
pub fn kl_profile_rows(
    k0: f64,
    lambda0: f64,
    lambda1: f64,
    censor_time: f64,
    k1_min: f64,
    k1_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let generator = WeibullParams::new(k0, lambda0).map_err(|e| e.to_string())?;
    let c = (censor_time > 0.0).then_some(censor_time);
    let mut out = Vec::with_capacity(2 * steps);
    for k1 in grid(k1_min, k1_max, steps)? {
        let candidate = WeibullParams::new(k1, lambda1).map_err(|e| e.to_string())?;
        let input = KlInput::new(generator, candidate, c).map_err(|e| e.to_string())?;
        // points where the closed form overflows are left out of the plot
        if let Ok(v) = kl_divergence(&input) {
            out.extend([k1, v]);
        }
    }
    Ok(out)
}

/// Fits every applicable estimator and renders a text table.
pub fn fit_report(text: &str, p_plugin: &str, published: bool) -> Result<String, String> {
    let sample = parse_data(text).map_err(|e| e.to_string())?;
    let opts = MmleOptions {
        p_plugin: p_plugin.parse::<PPlugin>().map_err(|e| e.to_string())?,
        bias_form: form(published),
    };
    let mut out = format!(
        "n = {}, uncensored = {}{}\n\n{:<6} {:>10} {:>10} {:>8}\n",
        sample.len(),
        sample.uncensored_count(),
        sample.censor_time().map(|c| format!(", censor time = {c}")).unwrap_or_default(),
        "method",
        "k",
        "lambda",
        "p_hat"
    );
    for method in Method::ALL {
        if method == Method::Ross && sample.is_censored() {
            continue;
        }
        match fit(&sample, method, opts) {
            Ok(r) => {
                let p_hat = r.p_hat.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{:<6} {:>10.4} {:>10.4} {:>8}",
                    method.as_str(),
                    r.params.shape(),
                    r.params.scale(),
                    p_hat
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<6} {e}", method.as_str());
            }
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn bias_curve(
    k: f64,
    n: usize,
    p_min: f64,
    p_max: f64,
    steps: usize,
    published: bool,
) -> Result<Vec<f64>, JsError> {
    bias_curve_rows(k, n, p_min, p_max, steps, published).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn kl_profile(
    k0: f64,
    lambda0: f64,
    lambda1: f64,
    censor_time: f64,
    k1_min: f64,
    k1_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    kl_profile_rows(k0, lambda0, lambda1, censor_time, k1_min, k1_max, steps)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fit_text(text: &str, p_plugin: &str, published: bool) -> Result<String, JsError> {
    fit_report(text, p_plugin, published).map_err(|e| JsError::new(&e))
}
