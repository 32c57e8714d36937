//! The two-parameter Weibull model and type I censored samples.

use rand::distr::{Distribution, Open01};
use rand::Rng;

use crate::error::{domain, Error, Result};

/// Shape `k` and scale `λ` of a Weibull distribution.
///
/// Density: `(k/λᵏ) y^(k−1) exp(−(y/λ)ᵏ)` for `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    shape: f64,
    scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(domain(format!("shape must be finite and > 0, got {shape}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("scale must be finite and > 0, got {scale}")));
        }
        Ok(Self { shape, scale })
    }

    #[inline]
    pub fn shape(&self) -> f64 {
        self.shape
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn ln_pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(domain(format!("density is evaluated at y > 0, got {y}")));
        }
        let (k, lambda) = (self.shape, self.scale);
        let r = y / lambda;
        Ok(k.ln() - lambda.ln() + (k - 1.0) * r.ln() - r.powf(k))
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.ln_pdf(y)?.exp())
    }

    /// `P(Y ≤ y)`; zero for `y ≤ 0`.
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        -(-(y / self.scale).powf(self.shape)).exp_m1()
    }

    /// `P(Y > y)`.
    pub fn survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        (-(y / self.scale).powf(self.shape)).exp()
    }

    /// Inverse of [`cdf`](Self::cdf) on the open unit interval.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile needs 0 < u < 1, got {u}")));
        }
        Ok(self.scale * (-(-u).ln_1p()).powf(1.0 / self.shape))
    }

    /// Censoring time `c` at which a fraction `p` of items fail before `c`.
    pub fn censor_threshold_for_p(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("uncensored fraction must be in (0, 1), got {p}")));
        }
        self.quantile(p)
    }

    /// Expected fraction of uncensored records, `1 − exp(−(c/λ)ᵏ)`.
    pub fn uncensored_fraction(&self, c: f64) -> f64 {
        self.cdf(c)
    }

    /// `n` independent draws by inversion; the result is a complete sample.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CensoredSample> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let values = (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(rng);
                self.scale * (-(-u).ln_1p()).powf(1.0 / self.shape)
            })
            .collect();
        CensoredSample::complete(values)
    }

    /// Log-likelihood of a complete or type I censored sample,
    /// `d·log(k/λᵏ) − λ⁻ᵏ Σ yᵢᵏ + (k−1) Σ δᵢ log yᵢ`.
    pub fn log_likelihood(&self, sample: &CensoredSample) -> f64 {
        let (k, lambda) = (self.shape, self.scale);
        let d = sample.uncensored_count() as f64;
        let mut power_sum = 0.0;
        let mut event_log_sum = 0.0;
        for (&y, &event) in sample.values.iter().zip(&sample.events) {
            power_sum += (y / lambda).powf(k);
            if event {
                event_log_sum += y.ln();
            }
        }
        d * (k.ln() - k * lambda.ln()) - power_sum + (k - 1.0) * event_log_sum
    }
}

/// Observations `yᵢ` with event indicators `δᵢ` and, for type I censored
/// data, the common censoring time `c`.
///
/// Censored records carry `y = c`. A record exactly at `c` with `δ = 1` is an
/// event (`Δ = I(T ≤ c)`). Without a censoring time every record is an event.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    values: Vec<f64>,
    events: Vec<bool>,
    censor_time: Option<f64>,
}

impl CensoredSample {
    /// A complete (uncensored) sample.
    pub fn complete(values: Vec<f64>) -> Result<Self> {
        let events = vec![true; values.len()];
        Self::validated(values, events, None)
    }

    /// A type I censored sample with censoring time `censor_time`.
    pub fn censored(values: Vec<f64>, events: Vec<bool>, censor_time: f64) -> Result<Self> {
        if !(censor_time > 0.0 && censor_time.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "censoring time must be finite and > 0, got {censor_time}"
            )));
        }
        Self::validated(values, events, Some(censor_time))
    }

    fn validated(values: Vec<f64>, events: Vec<bool>, censor_time: Option<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("sample is empty".into()));
        }
        if values.len() != events.len() {
            return Err(Error::InvalidSample(format!(
                "{} values but {} indicators",
                values.len(),
                events.len()
            )));
        }
        for (i, (&y, &event)) in values.iter().zip(&events).enumerate() {
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::InvalidSample(format!(
                    "record {i}: value must be finite and > 0, got {y}"
                )));
            }
            match censor_time {
                Some(c) if event && y > c => {
                    return Err(Error::InvalidSample(format!(
                        "record {i}: event at {y} after censoring time {c}"
                    )));
                }
                Some(c) if !event && y != c => {
                    return Err(Error::InvalidSample(format!(
                        "record {i}: censored record has value {y}, expected {c}"
                    )));
                }
                None if !event => {
                    return Err(Error::InvalidSample(format!(
                        "record {i}: censored record in a sample without censoring time"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            values,
            events,
            censor_time,
        })
    }

    /// Replaces each value by `min(y, c)`; records with `y ≤ c` stay events.
    /// Only defined for complete samples.
    pub fn apply_censoring(&self, c: f64) -> Result<Self> {
        if self.is_censored() {
            return Err(Error::InvalidSample("sample is already censored".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("censoring time must be finite and > 0, got {c}")));
        }
        let mut values = Vec::with_capacity(self.len());
        let mut events = Vec::with_capacity(self.len());
        for &y in &self.values {
            let observed = y <= c;
            values.push(if observed { y } else { c });
            events.push(observed);
        }
        Self::censored(values, events, c)
    }

    /// Multiplies every value (and the censoring time) by `s > 0`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(domain(format!("scale factor must be finite and > 0, got {s}")));
        }
        let values = self.values.iter().map(|y| y * s).collect();
        Self::validated(values, self.events.clone(), self.censor_time.map(|c| c * s))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn censor_time(&self) -> Option<f64> {
        self.censor_time
    }

    pub fn is_censored(&self) -> bool {
        self.censor_time.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of uncensored records, `d = Σ δᵢ`.
    pub fn uncensored_count(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }
}
