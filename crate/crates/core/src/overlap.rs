//! Count-envelope overlaps and per-word net rank-change potential.
//!
//! Every word's count lives in a mu +/- 4 sigma segment of its marginal
//! binomial. Where two segments overlap with positive length, the two words
//! can plausibly swap ranks. The net potential of a word counts +1 for each
//! overlapping lower-ranked word and -1 for each overlapping higher-ranked
//! word: positive values mean room to fall in rank, negative mean room to
//! rise. Evaluated at the initial time with theoretical Zipf ranks 1..=c.

use crate::distributions::{binomial_envelope, zipf_pmf, BinomialEnvelope, ZipfParams};
use crate::error::{Error, Result};

/// Envelopes and signed overlap counts for every rank.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    /// Per-word envelope, indexed by rank - 1.
    pub envelopes: Vec<BinomialEnvelope>,
    /// Signed overlap count per word, in [-(c-1), c-1].
    pub net_potential: Vec<i64>,
    /// Net potential divided by the vocabulary size.
    pub normalized_potential: Vec<f64>,
}

impl OverlapReport {
    pub fn max_abs_normalized(&self) -> f64 {
        self.normalized_potential
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Signed overlap length of two envelopes:
/// `min(high_1, high_2) - max(low_1, low_2)`. Negative when disjoint.
pub fn segment_overlap(e1: &BinomialEnvelope, e2: &BinomialEnvelope) -> f64 {
    e1.high().min(e2.high()) - e1.low().max(e2.low())
}

/// One-based prefix-sum tree for counting inserted values.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted positions < i.
    fn prefix(&self, mut i: usize) -> u32 {
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }
}

/// Net rank-change potential of every word at the initial time.
///
/// Overlap is strict (`l > 0`), so zero-width envelopes never overlap
/// anything. Pair counting is O(c log c): sorted endpoint arrays give each
/// word's total overlap count, and a sweep from low-probability words toward
/// high ones counts the lower-ranked side with prefix-sum trees.
pub fn net_potential(zipf: &ZipfParams, beta: u64) -> Result<OverlapReport> {
    let c = zipf.vocab();
    if beta < c as u64 {
        return Err(Error::Domain(format!(
            "initial corpus size {beta} is below vocabulary size {c}"
        )));
    }
    let pmf = zipf_pmf(zipf);
    let envelopes: Vec<BinomialEnvelope> = pmf
        .iter()
        .map(|&p| binomial_envelope(p, beta, c))
        .collect::<Result<_>>()?;

    // Words with zero-width envelopes cannot overlap; leave them out of the
    // counting structures entirely.
    let live: Vec<usize> = (0..c).filter(|&w| envelopes[w].sigma > 0.0).collect();
    let lows: Vec<f64> = live.iter().map(|&w| envelopes[w].low()).collect();
    let highs: Vec<f64> = live.iter().map(|&w| envelopes[w].high()).collect();

    let mut low_sorted = lows.clone();
    low_sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut high_sorted = highs.clone();
    high_sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let count_low_below = |x: f64| low_sorted.partition_point(|&v| v < x);
    let count_high_at_most = |x: f64| high_sorted.partition_point(|&v| v <= x);

    let mut net = vec![0i64; c];
    // Sweep ranks from lowest (largest index) to highest; the trees hold the
    // endpoints of every lower-ranked word seen so far.
    let mut low_tree = Fenwick::new(low_sorted.len());
    let mut high_tree = Fenwick::new(high_sorted.len());
    for (i, &w) in live.iter().enumerate().rev() {
        let (lo, hi) = (lows[i], highs[i]);
        // Among all live words: overlaps = #{lo_v < hi_w} - #{hi_v <= lo_w},
        // minus 1 for the word itself.
        let total = count_low_below(hi) as i64 - count_high_at_most(lo) as i64 - 1;
        // Same two counts restricted to lower-ranked words via the trees.
        let below = low_tree.prefix(count_low_below(hi)) as i64
            - high_tree.prefix(count_high_at_most(lo)) as i64;
        let above = total - below;
        net[w] = below - above;
        low_tree.add(low_sorted.partition_point(|&v| v < lo));
        high_tree.add(high_sorted.partition_point(|&v| v < hi));
    }

    let normalized = net.iter().map(|&n| n as f64 / c as f64).collect();
    Ok(OverlapReport {
        envelopes,
        net_potential: net,
        normalized_potential: normalized,
    })
}

/// One overlap report per corpus size, for sweeping the potential profile
/// across beta.
pub fn potential_profile(
    zipf: &ZipfParams,
    beta_values: &[u64],
) -> Result<Vec<(u64, OverlapReport)>> {
    beta_values
        .iter()
        .map(|&beta| Ok((beta, net_potential(zipf, beta)?)))
        .collect()
}
