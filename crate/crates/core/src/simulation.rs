//! Monte Carlo comparison of shape estimators.
//!
//! Each cell `(n, p, k*)` draws `replicates` samples from Weibull(k*, 1),
//! censors them at the `p`-quantile when `p < 1`, fits every requested
//! method and records the bias and MSE of the shape estimate together with
//! the mean KL divergence from the generating model to the fitted one.
//!
//! Samples with fewer than `min_uncensored` events are redrawn, and the
//! redraws are counted. Every replicate owns its own ChaCha stream keyed by
//! `(master_seed, cell, replicate)`, and results are reduced in replicate
//! order, so output does not depend on the number of worker threads.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::divergence::{kl_censored, kl_complete};
use crate::error::{Error, Result};
use crate::estimators::{
    adjust_ml, fit, fit_ml, CensoredBiasForm, EstimatorReport, Method, MmleOptions, PPlugin,
};
use crate::weibull::WeibullParams;

/// Scale of the generating model.
pub const LAMBDA_STAR: f64 = 1.0;

/// Upper bound on redraws for a single replicate.
const MAX_REDRAWS: u64 = 1_000_000;

pub const CSV_HEADER: &str = "n,p,k_star,method,bias,mse,mean_kl,used_replicates,discarded,failed_fits";

/// How samples with too few events are handled.
pub const DISCARD_POLICY: &str = "resample";

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_values: Vec<usize>,
    pub k_star_values: Vec<f64>,
    /// Uncensored proportions; `1` means complete data.
    pub p_values: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub min_uncensored: usize,
    pub p_plugin: PPlugin,
    pub bias_form: CensoredBiasForm,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    /// The complete-data grid: `n ∈ {10, 20, 50}`, `k* ∈ {0.5, 1, 5, 10}`.
    pub fn paper_complete(replicates: usize, master_seed: u64) -> Self {
        Self {
            n_values: vec![10, 20, 50],
            k_star_values: vec![0.5, 1.0, 5.0, 10.0],
            p_values: vec![1.0],
            replicates,
            master_seed,
            methods: vec![Method::Ml, Method::Mlc, Method::Mmle],
            min_uncensored: 2,
            p_plugin: PPlugin::Model,
            bias_form: CensoredBiasForm::FixedCensorTime,
            threads: None,
        }
    }

    /// The censored grid: `n ∈ {10, 20, 30}`, `p ∈ {0.3, 0.5, 0.7, 0.9}`,
    /// `k* ∈ {0.5, 1, 5, 10}`.
    pub fn paper_censored(replicates: usize, master_seed: u64) -> Self {
        Self {
            n_values: vec![10, 20, 30],
            p_values: vec![0.3, 0.5, 0.7, 0.9],
            ..Self::paper_complete(replicates, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.n_values.is_empty() || self.k_star_values.is_empty() || self.p_values.is_empty() {
            return fail("the n, k* and p grids must all be non-empty".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if self.min_uncensored == 0 {
            return fail("min_uncensored must be at least 1".into());
        }
        if let Some(0) = self.threads {
            return fail("threads must be at least 1".into());
        }
        for &k in &self.k_star_values {
            if !(k > 0.0 && k.is_finite()) {
                return fail(format!("k* must be finite and positive, got {k}"));
            }
        }
        for &p in &self.p_values {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("p must lie in (0, 1], got {p}"));
            }
        }
        for &n in &self.n_values {
            if n < 2 || n < self.min_uncensored {
                return fail(format!(
                    "n = {n} is too small (need n >= 2 and n >= min_uncensored = {})",
                    self.min_uncensored
                ));
            }
            for &p in &self.p_values {
                let accept = 1.0 - binomial_lower_tail(n, p, self.min_uncensored);
                if accept < 1e-6 {
                    return fail(format!(
                        "with n = {n}, p = {p} a sample has {} or more events with probability {accept:e}",
                        self.min_uncensored
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn mmle_options(&self) -> MmleOptions {
        MmleOptions {
            p_plugin: self.p_plugin,
            bias_form: self.bias_form,
        }
    }

    fn methods_for(&self, p: f64) -> Vec<Method> {
        let mut methods: Vec<Method> = self
            .methods
            .iter()
            .copied()
            .filter(|&m| p == 1.0 || m != Method::Ross)
            .collect();
        methods.sort();
        methods.dedup();
        methods
    }
}

/// `P(X < m)` for `X ~ Binomial(n, p)`.
pub fn binomial_lower_tail(n: usize, p: f64, m: usize) -> f64 {
    if p >= 1.0 {
        return if m > n { 1.0 } else { 0.0 };
    }
    let mut term = (1.0 - p).powi(n as i32);
    let mut total = 0.0;
    for j in 0..m.min(n + 1) {
        total += term;
        term *= (n - j) as f64 / (j + 1) as f64 * p / (1.0 - p);
    }
    total.min(1.0)
}

/// Aggregates for one `(n, p, k*, method)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub n: usize,
    pub p: f64,
    pub k_star: f64,
    pub method: Method,
    pub bias: f64,
    pub mse: f64,
    pub mean_kl: f64,
    /// Fits that entered the averages.
    pub used_replicates: usize,
    /// Samples redrawn for having too few events.
    pub discarded: u64,
    pub failed_fits: usize,
    /// Monte Carlo standard errors of `bias` and `mse`.
    pub bias_se: f64,
    pub mse_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub rows: Vec<CellRow>,
    pub replicates: usize,
    pub master_seed: u64,
    pub discard_policy: &'static str,
}

impl SimulationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                format_sig6(r.p),
                format_sig6(r.k_star),
                r.method,
                format_sig6(r.bias),
                format_sig6(r.mse),
                format_sig6(r.mean_kl),
                r.used_replicates,
                r.discarded,
                r.failed_fits
            );
        }
        out
    }

    pub fn find(&self, n: usize, p: f64, k_star: f64, method: Method) -> Option<&CellRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.p == p && r.k_star == k_star && r.method == method)
    }
}

/// Six significant digits, switching to exponent form outside `[1e-4, 1e6)`
/// like C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        return format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Seed for a cell's generator: the master seed and the cell key laid
/// side by side.
fn cell_seed(master_seed: u64, n: usize, p: f64, k_star: f64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&p.to_bits().to_le_bytes());
    seed[24..32].copy_from_slice(&k_star.to_bits().to_le_bytes());
    seed
}

struct Replicate {
    discarded: u64,
    /// Per method: `(k̂ − k*, KL)` or `None` when the fit failed.
    outcomes: Vec<Option<(f64, f64)>>,
}

fn run_replicate(
    config: &SimulationConfig,
    methods: &[Method],
    generator: WeibullParams,
    n: usize,
    censor: Option<f64>,
    seed: [u8; 32],
    index: usize,
) -> Result<Replicate> {
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index as u64);
    let mut discarded = 0;
    let sample = loop {
        let mut sample = generator.sample(n, &mut rng)?;
        if let Some(c) = censor {
            sample = sample.apply_censoring(c)?;
        }
        if sample.uncensored_count() >= config.min_uncensored {
            break sample;
        }
        discarded += 1;
        if discarded >= MAX_REDRAWS {
            return Err(Error::Config(format!(
                "replicate {index} needed more than {MAX_REDRAWS} redraws"
            )));
        }
    };

    let ml = if methods.iter().any(|&m| m == Method::Ml || m == Method::Mmle) {
        Some(fit_ml(&sample))
    } else {
        None
    };
    let outcomes = methods
        .iter()
        .map(|&method| {
            let fitted: Result<EstimatorReport> = match (method, &ml) {
                (Method::Ml, Some(ml)) => ml.clone(),
                (Method::Mmle, Some(ml)) => ml
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|r| adjust_ml(&sample, r, config.mmle_options())),
                _ => fit(&sample, method, config.mmle_options()),
            };
            let params = fitted.ok()?.params;
            let kl = match censor {
                Some(c) => kl_censored(generator, params, c),
                None => kl_complete(generator, params),
            }
            .ok()?;
            Some((params.shape() - generator.shape(), kl))
        })
        .collect();
    Ok(Replicate {
        discarded,
        outcomes,
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Runs every replicate of one cell and returns a row per method.
pub fn run_cell(config: &SimulationConfig, n: usize, p: f64, k_star: f64) -> Result<Vec<CellRow>> {
    let generator = WeibullParams::new(k_star, LAMBDA_STAR)?;
    let censor = if p < 1.0 {
        Some(generator.censor_threshold_for_p(p)?)
    } else {
        None
    };
    let methods = config.methods_for(p);
    let seed = cell_seed(config.master_seed, n, p, k_star);

    let replicates: Vec<Replicate> = (0..config.replicates)
        .into_par_iter()
        .map(|i| run_replicate(config, &methods, generator, n, censor, seed, i))
        .collect::<Result<_>>()?;

    let discarded: u64 = replicates.iter().map(|r| r.discarded).sum();
    let rows = methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let (errors, kls): (Vec<f64>, Vec<f64>) =
                replicates.iter().filter_map(|r| r.outcomes[j]).unzip();
            let squared: Vec<f64> = errors.iter().map(|e| e * e).collect();
            let (bias, bias_se) = mean_and_se(&errors);
            let (mse, mse_se) = mean_and_se(&squared);
            let (mean_kl, _) = mean_and_se(&kls);
            CellRow {
                n,
                p,
                k_star,
                method,
                bias,
                mse,
                mean_kl,
                used_replicates: errors.len(),
                discarded,
                failed_fits: config.replicates - errors.len(),
                bias_se,
                mse_se,
            }
        })
        .collect();
    Ok(rows)
}

/// Runs the full grid, cells in `(n, p, k*)` order.
pub fn run(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut rows = Vec::new();
    pool.install(|| -> Result<()> {
        for &n in &config.n_values {
            for &p in &config.p_values {
                for &k_star in &config.k_star_values {
                    rows.extend(run_cell(config, n, p, k_star)?);
                }
            }
        }
        Ok(())
    })?;
    Ok(SimulationReport {
        rows,
        replicates: config.replicates,
        master_seed: config.master_seed,
        discard_policy: DISCARD_POLICY,
    })
}
