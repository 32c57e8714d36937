//! Safeguarded Newton–bisection for strictly decreasing functions on `(0, ∞)`.
//!
//! Iterates in `u = log x`, so multiplicative brackets such as `[1e-6, 1e6]`
//! are searched evenly. A Newton step is accepted only when it lands inside
//! the current bracket and at least halves the residual; otherwise the
//! bracket is bisected. Termination is therefore guaranteed once a sign
//! change has been found.

use crate::error::{ConvergenceFailure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Accept `x` when `|f(x)|·x` falls below this.
    pub residual_tolerance: f64,
    /// Accept when the bracket is narrower than this, relative to `x`.
    pub bracket_tolerance: f64,
    pub max_iterations: usize,
    /// Hard limits on the bracket search.
    pub lower_cap: f64,
    pub upper_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-10,
            bracket_tolerance: 1e-12,
            max_iterations: 200,
            lower_cap: 1e-6,
            upper_cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x)·x` at the returned point.
    pub scaled_residual: f64,
    pub iterations: usize,
}

/// Finds the root of a strictly decreasing `f` on `(0, ∞)`.
///
/// `f` returns the value and derivative at `x`. The search starts at `x0`
/// and expands geometrically until the sign changes; failing to find a
/// sign change inside the caps is reported as [`Error::NoSolution`].
pub fn solve_decreasing<F>(f: F, x0: f64, opts: &SolverOptions) -> Result<Root>
where
    F: Fn(f64) -> (f64, f64),
{
    let (lo_cap, hi_cap) = (opts.lower_cap.ln(), opts.upper_cap.ln());
    let mut u = x0.clamp(opts.lower_cap, opts.upper_cap).ln();
    let mut iterations = 0;

    let eval = |u: f64| -> Result<(f64, f64)> {
        let x = u.exp();
        let (v, dv) = f(x);
        if !v.is_finite() {
            return Err(Error::NoSolution(format!("function is not finite at x = {x}")));
        }
        // derivative with respect to u = log x
        Ok((v, dv * x))
    };

    let (mut fu, mut dfu) = eval(u)?;
    if converged(fu, u, opts) {
        return Ok(root(u, fu, iterations));
    }

    // Expand away from the start until the sign flips.
    let (mut lo, mut hi);
    let mut step = std::f64::consts::LN_2;
    if fu > 0.0 {
        lo = u;
        loop {
            let next = (u + step).min(hi_cap);
            iterations += 1;
            let (fv, dv) = eval(next)?;
            if fv <= 0.0 {
                hi = next;
                if fv.abs() < fu.abs() {
                    (u, fu, dfu) = (next, fv, dv);
                }
                break;
            }
            (lo, u, fu, dfu) = (next, next, fv, dv);
            if next >= hi_cap {
                return Err(Error::NoSolution(format!(
                    "function stays positive up to x = {}",
                    opts.upper_cap
                )));
            }
            step *= 2.0;
        }
    } else {
        hi = u;
        loop {
            let next = (u - step).max(lo_cap);
            iterations += 1;
            let (fv, dv) = eval(next)?;
            if fv >= 0.0 {
                lo = next;
                if fv.abs() < fu.abs() {
                    (u, fu, dfu) = (next, fv, dv);
                }
                break;
            }
            (hi, u, fu, dfu) = (next, next, fv, dv);
            if next <= lo_cap {
                return Err(Error::NoSolution(format!(
                    "function stays negative down to x = {}",
                    opts.lower_cap
                )));
            }
            step *= 2.0;
        }
    }

    while iterations < opts.max_iterations {
        if converged(fu, u, opts) || hi - lo <= opts.bracket_tolerance {
            return Ok(root(u, fu, iterations));
        }
        iterations += 1;

        let newton = if dfu < 0.0 { u - fu / dfu } else { f64::NAN };
        let candidate = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let (mut fc, mut dfc) = eval(candidate)?;
        let mut next = candidate;
        if candidate == newton && fc.abs() > 0.5 * fu.abs() {
            // Newton made poor progress; tighten with a bisection step too.
            if fc > 0.0 {
                lo = candidate;
            } else {
                hi = candidate;
            }
            next = 0.5 * (lo + hi);
            (fc, dfc) = eval(next)?;
        }
        if fc > 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        (u, fu, dfu) = (next, fc, dfc);
    }

    let x = u.exp();
    Err(Error::Convergence(ConvergenceFailure {
        iterations,
        last_x: x,
        residual: fu * x,
        bracket: (lo.exp(), hi.exp()),
    }))
}

fn converged(fu: f64, u: f64, opts: &SolverOptions) -> bool {
    fu == 0.0 || (fu * u.exp()).abs() <= opts.residual_tolerance
}

fn root(u: f64, fu: f64, iterations: usize) -> Root {
    let x = u.exp();
    Root {
        x,
        scaled_residual: fu * x,
        iterations,
    }
}
