//! Reference computations for tests only.
//!
//! Nothing here shares code with the library routines it checks: quadrature
//! is double-exponential rather than Gauss–Kronrod, roots come from plain
//! bisection, and likelihood maxima from a grid plus golden-section search.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature on a finite interval, refined until successive
/// levels agree to `tol` relative.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (2.0 * u.abs()).exp();
        // distance of the node from the nearer endpoint, without cancellation
        let offset = 2.0 * half / (e + 1.0);
        let x = if t >= 0.0 { b - offset } else { a + offset };
        if x <= a || x >= b {
            return 0.0;
        }
        let w = FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 4.0;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _level in 0..14 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h * half;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Exp-sinh quadrature on `[a, ∞)` for integrands with at most an
/// integrable endpoint singularity at `a` and exponential decay.
pub fn tanh_sinh_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    let eval = |t: f64| -> f64 {
        let v = FRAC_PI_2 * t.sinh();
        if v > 11.5 {
            return 0.0;
        }
        let offset = v.exp();
        if offset == 0.0 {
            return 0.0;
        }
        let x = a + offset;
        if x <= a {
            return 0.0;
        }
        let w = FRAC_PI_2 * t.cosh() * offset;
        let r = f(x) * w;
        if r.is_finite() {
            r
        } else {
            0.0
        }
    };
    let (t_lo, t_hi) = (-5.0_f64, 3.2_f64);
    let nodes = |h: f64, odd_only: bool| -> f64 {
        let k_min = (t_lo / h).ceil() as i64;
        let k_max = (t_hi / h).floor() as i64;
        (k_min..=k_max)
            .filter(|k| !odd_only || k.rem_euclid(2) == 1)
            .map(|k| eval(k as f64 * h))
            .sum()
    };
    let mut h = 0.5;
    let mut sum = nodes(h, false);
    let mut estimate = sum * h;
    for _level in 0..14 {
        h *= 0.5;
        sum += nodes(h, true);
        let next = sum * h;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Plain bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisection(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0, "bisection bracket has no sign change");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo) > x_tol * (1.0 + c.abs()) {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Weibull log-likelihood written directly from the density and survival
/// function: events contribute `log pdf`, censored records `−(c/λ)ᵏ`.
pub fn loglik_first_principles(k: f64, lambda: f64, values: &[f64], events: &[bool]) -> f64 {
    values
        .iter()
        .zip(events)
        .map(|(&y, &event)| {
            let z = (y / lambda).powf(k);
            if event {
                k.ln() - lambda.ln() + (k - 1.0) * (y / lambda).ln() - z
            } else {
                -z
            }
        })
        .sum()
}

/// Brute-force ML fit: the scale is profiled out in closed form, the shape
/// is located on a log grid over `[0.01, 50]` and refined by golden section.
pub fn ml_by_grid_search(values: &[f64], events: &[bool]) -> (f64, f64) {
    let d = events.iter().filter(|&&e| e).count() as f64;
    let scale_at = |k: f64| -> f64 {
        let m = values.iter().cloned().fold(0.0, f64::max);
        let s: f64 = values.iter().map(|y| (y / m).powf(k)).sum();
        m * (s / d).powf(1.0 / k)
    };
    let profile = |k: f64| loglik_first_principles(k, scale_at(k), values, events);
    let steps = 4000;
    let (lo, hi) = (0.01f64.ln(), 50f64.ln());
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (lo + (hi - lo) * i as f64 / steps as f64).exp())
        .collect();
    let best = (0..=steps)
        .max_by(|&a, &b| profile(grid[a]).total_cmp(&profile(grid[b])))
        .unwrap();
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(steps)];
    let k = golden_max(profile, a, b, 1e-13);
    (k, scale_at(k))
}
