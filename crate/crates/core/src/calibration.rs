//! Log-transform least-squares calibration with 99% student-t confidence
//! intervals.
//!
//! Corpus growth is fitted as `ln N(t) = alpha t + ln beta`, the initial
//! Zipf shape as `ln p_k = -a ln k + b` truncated at the sample mean word
//! rank, and the turnover power law reuses the same engine on
//! `ln z = b ln y + ln a`.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::distributions::{neumaier_sum, rank_weighted_mean_sorted};
use crate::error::{Error, Result};

/// Confidence level of every interval in this module.
pub const CONFIDENCE: f64 = 0.99;

/// Point estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided confidence level, fixed at 0.99.
    pub confidence: f64,
    pub n_points: usize,
    /// Residual variance of the underlying linear fit, SSE / (n - 2).
    pub residual_variance: f64,
}

impl FitResult {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    fn negated(self) -> FitResult {
        FitResult {
            estimate: -self.estimate,
            ci_low: -self.ci_high,
            ci_high: -self.ci_low,
            ..self
        }
    }
}

/// Ordinary least squares of `y_log` on `x`, returning (slope, intercept)
/// with student-t intervals at n - 2 degrees of freedom.
pub fn fit_loglinear(x: &[f64], y_log: &[f64]) -> Result<(FitResult, FitResult)> {
    let n = x.len();
    if y_log.len() != n {
        return Err(Error::Shape(format!(
            "{} x values vs {} y values",
            n,
            y_log.len()
        )));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "least squares needs at least 3 points, got {n}"
        )));
    }
    if x.iter().chain(y_log).any(|v| !v.is_finite()) {
        return Err(Error::Domain("fit inputs must be finite".into()));
    }
    let nf = n as f64;
    let x_mean = neumaier_sum(x.iter().copied()) / nf;
    let y_mean = neumaier_sum(y_log.iter().copied()) / nf;
    let sxx = neumaier_sum(x.iter().map(|&v| (v - x_mean) * (v - x_mean)));
    let sxy = neumaier_sum(
        x.iter()
            .zip(y_log)
            .map(|(&xv, &yv)| (xv - x_mean) * (yv - y_mean)),
    );
    if sxx <= 0.0 {
        return Err(Error::SingularDesign(
            "x values are all equal; slope is not identifiable".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse = neumaier_sum(x.iter().zip(y_log).map(|(&xv, &yv)| {
        let r = yv - (intercept + slope * xv);
        r * r
    }));
    let dof = nf - 2.0;
    let s2 = (sse / dof).max(0.0);
    let t_quantile = StudentsT::new(0.0, 1.0, dof)
        .expect("dof >= 1")
        .inverse_cdf(0.5 + CONFIDENCE / 2.0);
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    let fit = |estimate: f64, se: f64| FitResult {
        estimate,
        ci_low: estimate - t_quantile * se,
        ci_high: estimate + t_quantile * se,
        confidence: CONFIDENCE,
        n_points: n,
        residual_variance: s2,
    };
    Ok((fit(slope, se_slope), fit(intercept, se_intercept)))
}

/// Fits the exponential corpus-size law to a series of yearly token totals:
/// slope estimates the growth rate alpha, intercept estimates ln(beta).
pub fn fit_corpus_growth(yearly_totals: &[u64]) -> Result<(FitResult, FitResult)> {
    if yearly_totals.contains(&0) {
        return Err(Error::Domain(
            "yearly totals must all be >= 1 to take logs".into(),
        ));
    }
    let x: Vec<f64> = (0..yearly_totals.len()).map(|t| t as f64).collect();
    let y: Vec<f64> = yearly_totals.iter().map(|&n| (n as f64).ln()).collect();
    fit_loglinear(&x, &y)
}

/// Estimates the Zipf shape from an initial frequency distribution.
///
/// Words are ranked by descending frequency and the data is truncated at the
/// rank closest to the sample mean word rank (rounded up), which drops the
/// sampling-noise-dominated tail; log proportion is then fitted against log
/// rank and the shape is the negated slope.
pub fn fit_zipf_shape(initial_freqs: &[f64]) -> Result<FitResult> {
    if initial_freqs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "Zipf fit needs at least 3 frequencies, got {}",
            initial_freqs.len()
        )));
    }
    if initial_freqs.iter().any(|&f| !f.is_finite() || f <= 0.0) {
        return Err(Error::Domain(
            "frequencies must be finite and strictly positive".into(),
        ));
    }
    let mut sorted = initial_freqs.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let total = neumaier_sum(sorted.iter().copied());
    let mean_rank = rank_weighted_mean_sorted(&sorted);
    let cutoff = (mean_rank.ceil() as usize).min(sorted.len());
    if cutoff < 3 {
        return Err(Error::InsufficientData(format!(
            "truncation at the mean rank leaves {cutoff} points, need 3"
        )));
    }
    let xs: Vec<f64> = (1..=cutoff).map(|k| (k as f64).ln()).collect();
    let ys: Vec<f64> = sorted[..cutoff].iter().map(|&f| (f / total).ln()).collect();
    let (slope, _intercept) = fit_loglinear(&xs, &ys)?;
    Ok(slope.negated())
}
