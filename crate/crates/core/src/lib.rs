//! Weibull estimation with small-sample bias adjustment.
//!
//! Covers maximum likelihood fitting for complete and type I censored data,
//! the Ross and Yang–Xie alternatives, first-order (Cox–Snell) bias
//! corrections in closed and matrix form, Kullback–Leibler divergences
//! between Weibull models, and a Monte Carlo harness comparing estimators.

// `!(x > 0.0)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cox_snell;
pub mod dataset;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod simulation;
pub mod solver;
pub mod special;
pub mod weibull;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
pub use estimators::{
    bias_censored, bias_complete, fit, fit_ml, fit_mlc, fit_mmle, fit_ross, BiasAdjustment,
    CensoredBiasForm, EstimatorReport, Method, MmleOptions, PPlugin,
};
pub use weibull::{CensoredSample, WeibullParams};
