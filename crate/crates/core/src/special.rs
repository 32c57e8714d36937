//! Scalar special functions used by the bias formulas and the divergences.
//!
//! The central routine is [`inc_gamma_derivs`], which evaluates the
//! derivatives of the lower incomplete gamma function `γ(z, x)` with respect
//! to `z` at `z = 1`:
//!
//! ```text
//! γ⁽ʲ⁾(1, x) = ∫₀ˣ (log t)ʲ e⁻ᵗ dt,   j = 0..3
//! ```
//!
//! On `[0, min(x, 1)]` the integral is summed from the exponential series,
//! which handles the logarithmic singularity at the origin exactly. The rest
//! of the range is integrated with adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Apéry's constant ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

/// Second polygamma function at one, ψ⁽²⁾(1) = −2ζ(3).
pub const PSI2_AT_1: f64 = -2.0 * ZETA3;

/// Beyond this point `(log t)³ e⁻ᵗ` is below 1e-40 and the tail is dropped.
const INTEGRATION_CUTOFF: f64 = 120.0;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<const N: usize>(
    f: &impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
) -> ([f64; N], f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];

    let fc = f(center);
    for c in 0..N {
        kronrod[c] = GK_WEIGHTS[7] * fc[c];
        gauss[c] = G_WEIGHTS[3] * fc[c];
    }
    for (i, &node) in GK_NODES.iter().enumerate().take(7) {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kronrod[c] += GK_WEIGHTS[i] * s;
            if i % 2 == 1 {
                gauss[c] += G_WEIGHTS[i / 2] * s;
            }
        }
    }
    let mut err = 0.0_f64;
    for c in 0..N {
        kronrod[c] *= half;
        gauss[c] *= half;
        err = err.max((kronrod[c] - gauss[c]).abs());
    }
    (kronrod, err)
}

/// Adaptive Gauss–Kronrod quadrature of a vector-valued integrand on `[a, b]`.
///
/// An interval is accepted when the Kronrod/Gauss difference (the worst
/// component) is below its share of `abs_tol`, or below `rel_tol` times the
/// largest component of its estimate.
pub(crate) fn integrate_adaptive<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> [f64; N] {
    const MAX_DEPTH: u32 = 50;
    let total = b - a;
    let mut result = [0.0; N];
    let mut stack = vec![(a, b, 0_u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (est, err) = gauss_kronrod_15(&f, lo, hi);
        let scale = est.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let budget = abs_tol * (hi - lo) / total;
        if err <= budget || err <= rel_tol * scale || depth >= MAX_DEPTH {
            for c in 0..N {
                result[c] += est[c];
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    result
}

/// `∫₀ᵃ (log t)ʲ e⁻ᵗ dt` for `j = 1..3` and `0 < a ≤ 1`, by termwise
/// integration of the exponential series.
fn log_moments_near_zero(a: f64) -> [f64; 3] {
    let log_a = a.ln();
    let mut out = [0.0; 3];
    // coef = (-1)^n a^(n+1) / n!
    let mut coef = a;
    for n in 0..60 {
        let m = (n + 1) as f64;
        // ∫₀ᵃ t^(m-1) (log t)^j dt = a^m Σᵢ (-1)^i j!/(j-i)! L^(j-i) / m^(i+1)
        let inv_m = 1.0 / m;
        let t1 = log_a * inv_m - inv_m * inv_m;
        let t2 = log_a * log_a * inv_m - 2.0 * log_a * inv_m * inv_m + 2.0 * inv_m.powi(3);
        let t3 = log_a.powi(3) * inv_m - 3.0 * log_a * log_a * inv_m * inv_m
            + 6.0 * log_a * inv_m.powi(3)
            - 6.0 * inv_m.powi(4);
        let terms = [coef * t1, coef * t2, coef * t3];
        for (acc, t) in out.iter_mut().zip(terms) {
            *acc += t;
        }
        let small = terms
            .iter()
            .zip(out.iter())
            .all(|(t, s)| t.abs() <= 1e-18 * s.abs().max(1e-300));
        if n > 3 && small {
            break;
        }
        coef *= -a / m;
    }
    out
}

/// All four derivatives `γ⁽ʲ⁾(1, x)`, `j = 0..3`, sharing one quadrature pass.
pub fn inc_gamma_derivs(x: f64) -> Result<[f64; 4]> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("incomplete gamma derivative needs finite x > 0, got {x}")));
    }
    let head = log_moments_near_zero(x.min(1.0));
    let mut tail = [0.0; 3];
    if x > 1.0 {
        let upper = x.min(INTEGRATION_CUTOFF);
        tail = integrate_adaptive(
            |t| {
                let l = t.ln();
                let e = (-t).exp();
                [l * e, l * l * e, l * l * l * e]
            },
            1.0,
            upper,
            1e-15,
            1e-15,
        );
    }
    Ok([
        -(-x).exp_m1(),
        head[0] + tail[0],
        head[1] + tail[1],
        head[2] + tail[2],
    ])
}

/// `γ⁽ʲ⁾(1, x) = ∫₀ˣ (log t)ʲ e⁻ᵗ dt` for `j ∈ {0, 1, 2, 3}` and `x > 0`.
pub fn inc_gamma_deriv(j: usize, x: f64) -> Result<f64> {
    if j > 3 {
        return Err(domain(format!("derivative order must be 0..=3, got {j}")));
    }
    Ok(inc_gamma_derivs(x)?[j])
}

/// Exponential integral `Ei(z)` for negative `z`, i.e. `−E₁(−z)`.
pub fn exp_integral_ei(z: f64) -> Result<f64> {
    if !(z < 0.0 && z.is_finite()) {
        return Err(domain(format!("Ei is only supported for finite z < 0, got {z}")));
    }
    let x = -z;
    let e1 = if x <= 1.0 {
        // E₁(x) = −γ − ln x − Σ (−x)ⁿ / (n·n!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..100 {
            let nf = n as f64;
            term *= -x / nf;
            let add = term / nf;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz on the continued fraction for e^x E₁(x).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    };
    Ok(-e1)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("log_gamma needs finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    // exact on the small integers
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function via `exp(log_gamma)`.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

fn check_inc_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("incomplete gamma needs finite s > 0, got {s}")));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    Ok(())
}

/// `γ(s, x) / (e⁻ˣ xˢ)` from the power series; used for `x < s + 1`.
fn lower_series_scaled(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

/// `Γ(s, x) / (e⁻ˣ xˢ)` from the Legendre continued fraction; used for `x ≥ s + 1`.
fn upper_fraction_scaled(s: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Upper incomplete gamma function `Γ(s, x) = ∫ₓ^∞ tˢ⁻¹ e⁻ᵗ dt` (not regularized).
pub fn upper_inc_gamma(s: f64, x: f64) -> Result<f64> {
    check_inc_gamma_args(s, x)?;
    let log_gamma_s = ln_gamma_unchecked(s);
    if x == 0.0 {
        return Ok(log_gamma_s.exp());
    }
    let log_prefactor = s * x.ln() - x;
    if x < s + 1.0 {
        let lower = (log_prefactor).exp() * lower_series_scaled(s, x);
        Ok(log_gamma_s.exp() - lower)
    } else {
        Ok((log_prefactor + upper_fraction_scaled(s, x).ln()).exp())
    }
}

/// Lower incomplete gamma function `γ(s, x) = Γ(s) − Γ(s, x)` (not regularized).
///
/// Evaluated directly from the series where it is small, so it does not
/// suffer the cancellation of forming the difference.
pub fn lower_inc_gamma(s: f64, x: f64) -> Result<f64> {
    check_inc_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_prefactor = s * x.ln() - x;
    if x < s + 1.0 {
        Ok((log_prefactor + lower_series_scaled(s, x).ln()).exp())
    } else {
        let upper = (log_prefactor + upper_fraction_scaled(s, x).ln()).exp();
        Ok(ln_gamma_unchecked(s).exp() - upper)
    }
}
