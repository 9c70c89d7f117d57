//! Zipf distribution, corpus growth, and the binomial/multinomial machinery
//! behind the resampling model.
//!
//! Ranks run 1..=c with rank 1 the most frequent word. The Zipf probability
//! of the word at rank k is `(1/k^a) / sum_v (1/v^a)`, the corpus holds
//! `beta * ceil(exp(alpha * t))` tokens at step t, and one generation's counts
//! are a guarded multinomial draw: every word keeps one reserved token and the
//! remaining `N - c` tokens are distributed with the previous generation's
//! proportions.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Width of the count envelope in standard deviations. Four sigmas cover
/// essentially all of the normal approximation's mass.
pub const ENVELOPE_SIGMAS: f64 = 4.0;

/// Shape and support of a Zipf distribution over ranks 1..=c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfParams {
    shape: f64,
    vocab: usize,
}

impl ZipfParams {
    /// Requires a finite shape `a >= 0` and vocabulary size `c >= 1`.
    pub fn new(shape: f64, vocab: usize) -> Result<Self> {
        if !shape.is_finite() || shape < 0.0 {
            return Err(Error::Domain(format!(
                "Zipf shape must be finite and >= 0, got {shape}"
            )));
        }
        if vocab == 0 {
            return Err(Error::Domain("vocabulary size must be >= 1".into()));
        }
        Ok(ZipfParams { shape, vocab })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }
}

/// Exponential corpus-growth parameters: `N(t) = beta * ceil(exp(alpha * t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    alpha: f64,
    beta: u64,
}

impl GrowthParams {
    /// Requires a finite rate `alpha >= 0` and initial size `beta >= 1`.
    pub fn new(alpha: f64, beta: u64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Domain(format!(
                "growth rate must be finite and >= 0, got {alpha}"
            )));
        }
        if beta == 0 {
            return Err(Error::Domain("initial corpus size must be >= 1".into()));
        }
        Ok(GrowthParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> u64 {
        self.beta
    }
}

/// Mean and standard deviation of one word's marginal count distribution.
///
/// The `mu +/- 4 sigma` segment is where the count lands in essentially every
/// draw; overlapping segments are what create rank-swap potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialEnvelope {
    pub mu: f64,
    pub sigma: f64,
}

impl BinomialEnvelope {
    pub fn low(&self) -> f64 {
        self.mu - ENVELOPE_SIGMAS * self.sigma
    }

    pub fn high(&self) -> f64 {
        self.mu + ENVELOPE_SIGMAS * self.sigma
    }

    pub fn contains(&self, count: u64) -> bool {
        let x = count as f64;
        x >= self.low() && x <= self.high()
    }
}

/// Compensated (Neumaier) summation; keeps pmf normalization well inside
/// 1e-12 even for c = 1e5.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Zipf probability mass over ranks 1..=c: entry `k-1` is `(1/k^a) / H`
/// with `H = sum_v 1/v^a`.
///
/// Entries are strictly positive, non-increasing, and sum to 1 within 1e-12.
pub fn zipf_pmf(params: &ZipfParams) -> Vec<f64> {
    let a = params.shape;
    let weights: Vec<f64> = (1..=params.vocab).map(|k| (k as f64).powf(-a)).collect();
    let norm = neumaier_sum(weights.iter().copied());
    let mut pmf: Vec<f64> = weights.into_iter().map(|w| w / norm).collect();
    // One refinement pass squeezes the residual normalization error to ~1 ulp.
    let residual = neumaier_sum(pmf.iter().copied());
    for p in &mut pmf {
        *p /= residual;
    }
    pmf
}

/// Expected rank of a randomly sampled word: `sum_k k^(1-a) / sum_k k^(-a)`.
pub fn zipf_expected_rank(params: &ZipfParams) -> f64 {
    let a = params.shape;
    let num = neumaier_sum((1..=params.vocab).map(|k| (k as f64).powf(1.0 - a)));
    let den = neumaier_sum((1..=params.vocab).map(|k| (k as f64).powf(-a)));
    num / den
}

/// Corpus size at step t: `beta * ceil(exp(alpha * t))`, exactly in that
/// order (ceiling the exponential factor, then the integer multiply).
pub fn corpus_size(t: usize, params: &GrowthParams) -> Result<u64> {
    let overflow = || Error::CorpusOverflow {
        t,
        alpha: params.alpha,
        beta: params.beta,
    };
    let factor = (params.alpha * t as f64).exp();
    if !factor.is_finite() || factor >= u64::MAX as f64 {
        return Err(overflow());
    }
    let factor = factor.ceil() as u64;
    params.beta.checked_mul(factor).ok_or_else(overflow)
}

/// Count envelope of one word under the guarded draw: `n_tokens - vocab`
/// trials at success probability `p`, so `mu = (N - c) p` and
/// `sigma = sqrt((N - c) p (1 - p))`.
pub fn binomial_envelope(p: f64, n_tokens: u64, vocab: usize) -> Result<BinomialEnvelope> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "probability must be in [0, 1], got {p}"
        )));
    }
    let vocab_u64 = vocab as u64;
    if n_tokens < vocab_u64 {
        return Err(Error::Domain(format!(
            "token count {n_tokens} is below vocabulary size {vocab}"
        )));
    }
    let trials = (n_tokens - vocab_u64) as f64;
    Ok(BinomialEnvelope {
        mu: trials * p,
        sigma: (trials * p * (1.0 - p)).sqrt(),
    })
}

/// Natural log of the binomial pmf `C(n, r) p^r (1-p)^(n-r)`, via log-gamma
/// so trial counts up to 1e9 stay representable.
///
/// Limits follow the `0 * ln 0 = 0` convention, so degenerate p in {0, 1}
/// gives a usable log-pmf; impossible outcomes return `-inf`.
pub fn log_binomial_pmf(successes: u64, trials: u64, p: f64) -> Result<f64> {
    if successes > trials {
        return Err(Error::Domain(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "probability must be in [0, 1], got {p}"
        )));
    }
    let n = trials as f64;
    let r = successes as f64;
    // C(n, 0) = C(n, n) = 1 exactly; the gamma route leaves ~1e-16 residue.
    let ln_choose = if successes == 0 || successes == trials {
        0.0
    } else {
        ln_gamma(n + 1.0) - ln_gamma(r + 1.0) - ln_gamma(n - r + 1.0)
    };
    fn x_ln_p(x: f64, p: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * p.ln()
        }
    }
    Ok(ln_choose + x_ln_p(r, p) + x_ln_p(n - r, 1.0 - p))
}

/// Multinomial draw of `n_tokens` over `p.len()` words in which every word is
/// sampled at least once: one token is reserved per word and the remaining
/// `n_tokens - c` are multinomial with probabilities `p`.
///
/// Runs in O(c) independent of `n_tokens` by the conditional-binomial
/// decomposition: word w draws `Binomial(remaining, p_w / tail_w)` where
/// `tail_w` is the probability mass not yet consumed.
pub fn sample_multinomial_guarded<R: Rng + ?Sized>(
    p: &[f64],
    n_tokens: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let vocab = p.len();
    if vocab == 0 {
        return Err(Error::Domain("probability vector is empty".into()));
    }
    if p.iter().any(|&q| !q.is_finite() || q < 0.0) {
        return Err(Error::Domain(
            "probabilities must be finite and >= 0".into(),
        ));
    }
    let total = neumaier_sum(p.iter().copied());
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "probabilities sum to {total}, expected 1 within 1e-9"
        )));
    }
    if n_tokens < vocab as u64 {
        return Err(Error::Infeasible {
            tokens: n_tokens,
            vocab,
        });
    }

    // Suffix sums keep the conditional probabilities accurate deep in the tail.
    let mut tails = vec![0.0f64; vocab + 1];
    for w in (0..vocab).rev() {
        tails[w] = tails[w + 1] + p[w];
    }

    let mut counts = vec![1u64; vocab];
    let mut remaining = n_tokens - vocab as u64;
    for w in 0..vocab.saturating_sub(1) {
        if remaining == 0 {
            break;
        }
        let tail = tails[w];
        let q = if tail > 0.0 {
            (p[w] / tail).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining, q)
            .expect("clamped probability is valid")
            .sample(rng);
        counts[w] += draw;
        remaining -= draw;
    }
    counts[vocab - 1] += remaining;
    Ok(counts)
}

/// Initial-generation draw: `beta` tokens with Zipf probabilities, each word
/// guaranteed at least one token.
pub fn zipf_sample_initial<R: Rng + ?Sized>(
    zipf: &ZipfParams,
    beta: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if beta < zipf.vocab as u64 {
        return Err(Error::Infeasible {
            tokens: beta,
            vocab: zipf.vocab,
        });
    }
    sample_multinomial_guarded(&zipf_pmf(zipf), beta, rng)
}

/// Rank-weighted mean of an already descending-sorted frequency vector:
/// `sum_k k * (f_k / sum f)`.
pub(crate) fn rank_weighted_mean_sorted(desc: &[f64]) -> f64 {
    let total = neumaier_sum(desc.iter().copied());
    let weighted = neumaier_sum(
        desc.iter()
            .enumerate()
            .map(|(i, &f)| (i + 1) as f64 * (f / total)),
    );
    weighted
}

/// Sample mean word rank: words are ranked by descending frequency and the
/// rank of each word is weighted by its sample proportion.
pub fn sample_mean_rank(freqs: &[u64]) -> Result<f64> {
    if freqs.is_empty() {
        return Err(Error::Domain("frequency vector is empty".into()));
    }
    if freqs.contains(&0) {
        return Err(Error::Domain("frequencies must all be >= 1".into()));
    }
    let mut sorted: Vec<f64> = freqs.iter().map(|&f| f as f64).collect();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(rank_weighted_mean_sorted(&sorted))
}

/// Difference between the theoretical expected rank and the sample mean rank.
/// Approaches 0 as the corpus grows with the vocabulary fixed.
pub fn expected_rank_gap(zipf: &ZipfParams, freqs: &[u64]) -> Result<f64> {
    if freqs.len() != zipf.vocab {
        return Err(Error::Shape(format!(
            "frequency vector has length {}, vocabulary size is {}",
            freqs.len(),
            zipf.vocab
        )));
    }
    Ok(zipf_expected_rank(zipf) - sample_mean_rank(freqs)?)
}
