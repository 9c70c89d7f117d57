//! Rank bookkeeping and the rank-change measurement suite.
//!
//! Ranks are unique integers 1..=c per time step: descending frequency, ties
//! broken by ascending word identifier (alphabetical for text, index order
//! for simulated words). On top of the rank matrix sit the per-word
//! sum-of-rank-change and rank-change-variance statistics, rank-biased
//! overlap (RBO) curves between ranked lists, and top-y turnover with its
//! fitted power-law shape.

use std::collections::HashMap;
use std::hash::Hash;

use crate::calibration::{fit_loglinear, FitResult};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Reference turnover shape for unbiased copying; fitted shapes are reported
/// against it, with b > 1 read as conformity and b < 1 as anti-conformity.
pub const NEUTRAL_TURNOVER_SHAPE: f64 = 0.86;

/// Unique word ranks per time step; column t is a permutation of 1..=c.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    words: Vec<String>,
    grid: Grid<u32>,
}

/// Per-step orderings: column t lists word indices by ascending rank, the
/// exact inverse permutation of the rank matrix column.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    words: Vec<String>,
    grid: Grid<u32>,
}

/// Per-word rank-change statistics over a horizon of T steps.
///
/// `sums[w]` is the net rank change (negative = moved toward rank 1) and
/// `variances[w]` the population variance of the T-1 step differences.
/// Normalized sums divide by the vocabulary size, normalized variances by the
/// maximum variance in the word set (all zeros when every word is constant).
#[derive(Debug, Clone, PartialEq)]
pub struct RankChangeSummary {
    pub sums: Vec<i64>,
    pub normalized_sums: Vec<f64>,
    pub variances: Vec<f64>,
    pub normalized_variances: Vec<f64>,
}

/// Persistence weight of the RBO measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RboParams {
    p: f64,
}

impl RboParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::Domain(format!(
                "RBO persistence must be in [0, 1], got {p}"
            )));
        }
        Ok(RboParams { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Default for RboParams {
    /// p = 1: every depth counts, RBO reduces to mean agreement.
    fn default() -> Self {
        RboParams { p: 1.0 }
    }
}

/// Which ranked-list pairs an RBO curve compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RboMode {
    /// One value per t comparing step t with step t + lag.
    Lag(usize),
    /// One value per t comparing step 0 with step t (value 1 at t = 0).
    FromInitial,
}

/// Top-y turnover series over a fit grid, with the fitted `z = a * y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Turnover {
    /// Fit grid: every y up to 100, then logarithmically sampled.
    pub y: Vec<usize>,
    /// Mean number of words entering the top-y list per step, one per grid y.
    pub z: Vec<f64>,
    /// Fitted shape b.
    pub shape: FitResult,
    /// Fitted ln(a); the coefficient itself is `exp(estimate)`.
    pub log_coefficient: FitResult,
}

/// Conformity classification of a fitted turnover shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyingBias {
    Conformity,
    AntiConformity,
    Unbiased,
}

impl Turnover {
    pub fn coefficient(&self) -> f64 {
        self.log_coefficient.estimate.exp()
    }

    pub fn bias(&self) -> CopyingBias {
        if self.shape.estimate > 1.0 {
            CopyingBias::Conformity
        } else if self.shape.estimate < 1.0 {
            CopyingBias::AntiConformity
        } else {
            CopyingBias::Unbiased
        }
    }
}

/// Assigns unique ranks 1..=c to one frequency column: descending frequency,
/// ties broken by ascending word identifier.
pub fn assign_ranks<W: Ord>(freqs: &[u64], words: &[W]) -> Result<Vec<u32>> {
    if freqs.len() != words.len() {
        return Err(Error::Shape(format!(
            "{} frequencies vs {} words",
            freqs.len(),
            words.len()
        )));
    }
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_unstable_by(|&i, &j| {
        freqs[j]
            .cmp(&freqs[i])
            .then_with(|| words[i].cmp(&words[j]))
    });
    let mut ranks = vec![0u32; freqs.len()];
    for (pos, &w) in order.iter().enumerate() {
        ranks[w] = pos as u32 + 1;
    }
    Ok(ranks)
}

impl RankMatrix {
    /// Ranks every column of a word-by-time count grid.
    pub fn from_counts(words: Vec<String>, counts: &Grid<u64>) -> Result<Self> {
        if words.len() != counts.rows() {
            return Err(Error::Shape(format!(
                "{} words vs {} count rows",
                words.len(),
                counts.rows()
            )));
        }
        let columns: Vec<Vec<u32>> = counts
            .columns()
            .map(|col| assign_ranks(col, &words))
            .collect::<Result<_>>()?;
        Ok(RankMatrix {
            words,
            grid: Grid::from_columns(&columns),
        })
    }

    /// Builds directly from rank columns; each must be a permutation of 1..=c.
    pub fn from_rank_columns(words: Vec<String>, columns: &[Vec<u32>]) -> Result<Self> {
        let m = RankMatrix {
            words,
            grid: Grid::from_columns(columns),
        };
        for t in 0..m.steps() {
            check_permutation(m.grid.column(t), t)?;
        }
        Ok(m)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vocab(&self) -> usize {
        self.grid.rows()
    }

    pub fn steps(&self) -> usize {
        self.grid.cols()
    }

    /// Rank of word `w` at step `t` (1 = most frequent).
    pub fn rank(&self, w: usize, t: usize) -> u32 {
        self.grid.get(w, t)
    }

    pub fn column(&self, t: usize) -> &[u32] {
        self.grid.column(t)
    }

    pub fn grid(&self) -> &Grid<u32> {
        &self.grid
    }
}

fn check_permutation(ranks: &[u32], t: usize) -> Result<()> {
    let c = ranks.len();
    let mut seen = vec![false; c];
    for &r in ranks {
        if r == 0 || r as usize > c || seen[r as usize - 1] {
            return Err(Error::Integrity(format!(
                "column {t} is not a permutation of 1..={c}"
            )));
        }
        seen[r as usize - 1] = true;
    }
    Ok(())
}

/// Inverts a rank matrix into per-step orderings.
pub fn ranked_list(ranks: &RankMatrix) -> Result<RankedList> {
    let c = ranks.vocab();
    let mut columns = Vec::with_capacity(ranks.steps());
    for t in 0..ranks.steps() {
        let col = ranks.column(t);
        check_permutation(col, t)?;
        let mut ordering = vec![0u32; c];
        for (w, &r) in col.iter().enumerate() {
            ordering[r as usize - 1] = w as u32;
        }
        columns.push(ordering);
    }
    Ok(RankedList {
        words: ranks.words().to_vec(),
        grid: Grid::from_columns(&columns),
    })
}

impl RankedList {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vocab(&self) -> usize {
        self.grid.rows()
    }

    pub fn steps(&self) -> usize {
        self.grid.cols()
    }

    /// Word indices at step t, most frequent first.
    pub fn ordering(&self, t: usize) -> &[u32] {
        self.grid.column(t)
    }

    /// Word index holding `rank` (1-based) at step t.
    pub fn word_at(&self, rank: usize, t: usize) -> usize {
        self.grid.get(rank - 1, t) as usize
    }
}

/// Net and dispersion statistics of the per-step rank differences
/// `rank(w, t) - rank(w, t-1)`.
pub fn rank_change_summary(ranks: &RankMatrix) -> Result<RankChangeSummary> {
    let t_len = ranks.steps();
    if t_len < 2 {
        return Err(Error::TooShort(format!(
            "rank-change statistics need at least 2 steps, got {t_len}"
        )));
    }
    let c = ranks.vocab();
    let steps = (t_len - 1) as f64;
    let mut sums = Vec::with_capacity(c);
    let mut variances = Vec::with_capacity(c);
    for w in 0..c {
        let mut sum = 0i64;
        for t in 1..t_len {
            sum += ranks.rank(w, t) as i64 - ranks.rank(w, t - 1) as i64;
        }
        let mean = sum as f64 / steps;
        let mut var = 0.0;
        for t in 1..t_len {
            let d = (ranks.rank(w, t) as i64 - ranks.rank(w, t - 1) as i64) as f64;
            var += (d - mean) * (d - mean);
        }
        sums.push(sum);
        variances.push(var / steps);
    }
    let max_var = variances.iter().cloned().fold(0.0f64, f64::max);
    let normalized_variances = variances
        .iter()
        .map(|&v| if max_var > 0.0 { v / max_var } else { 0.0 })
        .collect();
    let normalized_sums = sums.iter().map(|&s| s as f64 / c as f64).collect();
    Ok(RankChangeSummary {
        sums,
        normalized_sums,
        variances,
        normalized_variances,
    })
}

/// Prefix agreement at depth d: `|prefix_d(S) ∩ prefix_d(T)| / d`.
pub fn agreement<T: Eq + Hash>(list_s: &[T], list_t: &[T], depth: usize) -> Result<f64> {
    if depth == 0 || depth > list_s.len() || depth > list_t.len() {
        return Err(Error::Domain(format!(
            "depth {depth} outside 1..={}",
            list_s.len().min(list_t.len())
        )));
    }
    let prefix_s: std::collections::HashSet<&T> = list_s[..depth].iter().collect();
    let hits = list_t[..depth]
        .iter()
        .filter(|x| prefix_s.contains(x))
        .count();
    Ok(hits as f64 / depth as f64)
}

/// Rank-biased overlap of two orderings of the same word set.
///
/// For p < 1 this is `(1-p) * sum_d p^(d-1) A_d` truncated at the full list
/// depth; at p = 1 the weight factor vanishes and the measure is the mean
/// agreement over depths 1..=c, which keeps the result in [0, 1].
pub fn rbo<T: Eq + Hash>(list_s: &[T], list_t: &[T], params: &RboParams) -> Result<f64> {
    let c = list_s.len();
    if c == 0 || list_t.len() != c {
        return Err(Error::Domain(format!(
            "RBO needs two same-length non-empty lists, got {c} and {}",
            list_t.len()
        )));
    }
    // Membership marks double as the duplicate and same-set check.
    let mut marks: HashMap<&T, u8> = HashMap::with_capacity(2 * c);
    for x in list_s {
        if marks.insert(x, 1).is_some() {
            return Err(Error::Domain("first list contains duplicates".into()));
        }
    }
    for x in list_t {
        match marks.get_mut(x) {
            Some(m) if *m == 1 => *m = 3,
            Some(_) => return Err(Error::Domain("second list contains duplicates".into())),
            None => {
                return Err(Error::Domain(
                    "lists are not orderings of the same word set".into(),
                ))
            }
        }
    }
    if marks.values().any(|&m| m != 3) {
        return Err(Error::Domain(
            "lists are not orderings of the same word set".into(),
        ));
    }

    // Incremental overlap walk: O(c) over all depths.
    let mut seen: HashMap<&T, u8> = HashMap::with_capacity(2 * c);
    let mut overlap = 0usize;
    let p = params.p;
    let mut acc = 0.0f64;
    let mut weight = 1.0f64; // p^(d-1)
    for d in 1..=c {
        let (x, y) = (&list_s[d - 1], &list_t[d - 1]);
        if x == y {
            overlap += 1;
        } else {
            let mx = seen.entry(x).or_insert(0);
            if *mx & 2 != 0 {
                overlap += 1;
            }
            *mx |= 1;
            let my = seen.entry(y).or_insert(0);
            if *my & 1 != 0 {
                overlap += 1;
            }
            *my |= 2;
        }
        let a_d = overlap as f64 / d as f64;
        acc += weight * a_d;
        weight *= p;
    }
    if (params.p - 1.0).abs() < f64::EPSILON {
        Ok(acc / c as f64)
    } else {
        Ok((1.0 - p) * acc)
    }
}

/// RBO time series across a ranked list: lag-k pairs in time order, or every
/// step against the initial ordering.
pub fn rbo_curves(rl: &RankedList, mode: RboMode, params: &RboParams) -> Result<Vec<f64>> {
    let t_len = rl.steps();
    match mode {
        RboMode::Lag(lag) => {
            if lag == 0 {
                return Err(Error::Domain("lag must be >= 1".into()));
            }
            if t_len <= lag {
                return Err(Error::TooShort(format!(
                    "lag {lag} needs more than {lag} steps, got {t_len}"
                )));
            }
            (0..t_len - lag)
                .map(|t| rbo(rl.ordering(t), rl.ordering(t + lag), params))
                .collect()
        }
        RboMode::FromInitial => (0..t_len)
            .map(|t| rbo(rl.ordering(0), rl.ordering(t), params))
            .collect(),
    }
}

/// Mean number of new words entering the top-y list per step, for every
/// y in 1..=y_max.
///
/// A word enters the top-y at step t+1 exactly when
/// `rank(t+1) <= y < rank(t)`, so each improving word contributes one run of
/// y values; a difference array accumulates all runs in O(c) per step.
pub fn turnover_series(rl: &RankedList, y_max: usize) -> Result<Vec<f64>> {
    let c = rl.vocab();
    if y_max == 0 || y_max > c {
        return Err(Error::Domain(format!(
            "top-list size must be in 1..={c}, got {y_max}"
        )));
    }
    let t_len = rl.steps();
    if t_len < 2 {
        return Err(Error::TooShort(format!(
            "turnover needs at least 2 steps, got {t_len}"
        )));
    }
    let mut rank_of = vec![0u32; c];
    let mut next_rank = vec![0u32; c];
    let mut acc = vec![0.0f64; y_max + 1];
    for (r, &w) in rl.ordering(0).iter().enumerate() {
        rank_of[w as usize] = r as u32 + 1;
    }
    let mut diff = vec![0i64; y_max + 2];
    for t in 1..t_len {
        for (r, &w) in rl.ordering(t).iter().enumerate() {
            next_rank[w as usize] = r as u32 + 1;
        }
        for x in diff.iter_mut() {
            *x = 0;
        }
        for w in 0..c {
            let (r_prev, r_next) = (rank_of[w] as usize, next_rank[w] as usize);
            if r_next < r_prev && r_next <= y_max {
                let hi = (r_prev - 1).min(y_max);
                diff[r_next] += 1;
                diff[hi + 1] -= 1;
            }
        }
        let mut running = 0i64;
        for y in 1..=y_max {
            running += diff[y];
            acc[y] += running as f64;
        }
        std::mem::swap(&mut rank_of, &mut next_rank);
    }
    let steps = (t_len - 1) as f64;
    Ok((1..=y_max).map(|y| acc[y] / steps).collect())
}

/// Fit grid for the turnover power law: every y up to 100, then
/// geometrically spaced (~5% steps) up to y_max.
pub fn turnover_fit_grid(y_max: usize) -> Vec<usize> {
    let mut ys: Vec<usize> = (1..=y_max.min(100)).collect();
    let mut y = 100.0f64;
    while (y * 1.05).round() as usize <= y_max {
        y *= 1.05;
        ys.push(y.round() as usize);
    }
    ys.dedup();
    ys
}

/// Turnover series over the fit grid plus the least-squares fit of
/// `z = a * y^b` on log z vs log y, excluding zero turnover values.
pub fn turnover(rl: &RankedList, y_max: usize) -> Result<Turnover> {
    let dense = turnover_series(rl, y_max)?;
    let grid = turnover_fit_grid(y_max);
    let z: Vec<f64> = grid.iter().map(|&y| dense[y - 1]).collect();
    let points: Vec<(f64, f64)> = grid
        .iter()
        .zip(&z)
        .filter(|&(_, &zv)| zv > 0.0)
        .map(|(&y, &zv)| ((y as f64).ln(), zv.ln()))
        .collect();
    if points.is_empty() {
        return Err(Error::TurnoverFitUndefined);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (shape, log_coefficient) = fit_loglinear(&xs, &ys)?;
    Ok(Turnover {
        y: grid,
        z,
        shape,
        log_coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn names(c: usize) -> Vec<String> {
        (0..c).map(|w| format!("w{w:04}")).collect()
    }

    #[test]
    fn ranks_descending_frequency() {
        let r = assign_ranks(&[9, 5, 3, 1], &["w1", "w2", "w3", "w4"]).unwrap();
        assert_eq!(r, vec![1, 2, 3, 4]);
    }

    #[test]
    fn ranks_break_ties_alphabetically() {
        let r = assign_ranks(&[5, 5], &["b", "a"]).unwrap();
        assert_eq!(r, vec![2, 1]);
    }

    #[test]
    fn ranks_break_ties_by_index_for_equal_freqs() {
        let r = assign_ranks(&[3, 7, 7, 1], &[0usize, 1, 2, 3]).unwrap();
        assert_eq!(r, vec![3, 1, 2, 4]);
        assert!(assign_ranks(&[1, 2], &["only"]).is_err());
    }

    #[test]
    fn ranked_list_inverts_ranks() {
        let m =
            RankMatrix::from_counts(names(3), &Grid::from_columns(&[vec![10, 30, 20]])).unwrap();
        assert_eq!(m.column(0), &[3, 1, 2]);
        let rl = ranked_list(&m).unwrap();
        assert_eq!(rl.ordering(0), &[1, 2, 0]);
        assert_eq!(rl.word_at(1, 0), 1);
    }

    #[test]
    fn ranked_list_rejects_non_permutation() {
        let m = RankMatrix {
            words: names(3),
            grid: Grid::from_columns(&[vec![1u32, 1, 3]]),
        };
        assert!(matches!(ranked_list(&m), Err(Error::Integrity(_))));
    }

    /// The worked four-word, five-step example: frequencies chosen to produce
    /// the reference rank matrix and its inverted ranked lists.
    fn four_word_fixture() -> RankMatrix {
        let counts = Grid::from_columns(&[
            vec![9, 5, 3, 1],
            vec![9, 5, 1, 3],
            vec![9, 3, 5, 1],
            vec![9, 5, 3, 1],
            vec![8, 6, 4, 2],
        ]);
        RankMatrix::from_counts(
            vec!["w1".into(), "w2".into(), "w3".into(), "w4".into()],
            &counts,
        )
        .unwrap()
    }

    #[test]
    fn four_word_fixture_ranks_and_lists() {
        let m = four_word_fixture();
        assert_eq!(m.column(0), &[1, 2, 3, 4]);
        assert_eq!(m.column(1), &[1, 2, 4, 3]);
        assert_eq!(m.column(2), &[1, 3, 2, 4]);
        assert_eq!(m.column(3), &[1, 2, 3, 4]);
        assert_eq!(m.column(4), &[1, 2, 3, 4]);
        let rl = ranked_list(&m).unwrap();
        assert_eq!(rl.ordering(0), &[0, 1, 2, 3]);
        assert_eq!(rl.ordering(1), &[0, 1, 3, 2]);
        assert_eq!(rl.ordering(2), &[0, 2, 1, 3]);
        assert_eq!(rl.ordering(3), &[0, 1, 2, 3]);
        assert_eq!(rl.ordering(4), &[0, 1, 2, 3]);
    }

    #[test]
    fn summary_on_fixture_matches_hand_computation() {
        let s = rank_change_summary(&four_word_fixture()).unwrap();
        assert_eq!(s.sums, vec![0, 0, 0, 0]);
        // Per-word diffs: w1 0,0,0,0; w2 0,1,-1,0; w3 1,-2,1,0; w4 -1,1,0,0.
        let expect_var = [0.0, 0.5, 1.5, 0.5];
        for (v, e) in s.variances.iter().zip(expect_var) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
        let expect_nvar = [0.0, 1.0 / 3.0, 1.0, 1.0 / 3.0];
        for (v, e) in s.normalized_variances.iter().zip(expect_nvar) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn summary_examples() {
        let constant =
            RankMatrix::from_rank_columns(names(2), &[vec![1, 2], vec![1, 2], vec![1, 2]]).unwrap();
        let s = rank_change_summary(&constant).unwrap();
        assert_eq!(s.sums, vec![0, 0]);
        assert_eq!(s.variances, vec![0.0, 0.0]);
        assert_eq!(s.normalized_variances, vec![0.0, 0.0]);

        // Word 0 walks 5,4,3,2,1: every step -1, so the variance is 0.
        let walking = RankMatrix::from_rank_columns(
            names(5),
            &[
                vec![5, 1, 2, 3, 4],
                vec![4, 1, 2, 3, 5],
                vec![3, 1, 2, 4, 5],
                vec![2, 1, 3, 4, 5],
                vec![1, 2, 3, 4, 5],
            ],
        )
        .unwrap();
        let s = rank_change_summary(&walking).unwrap();
        assert_eq!(s.sums[0], -4);
        assert_abs_diff_eq!(s.variances[0], 0.0, epsilon = 1e-12);

        let single = RankMatrix::from_rank_columns(names(2), &[vec![1, 2]]).unwrap();
        assert!(matches!(
            rank_change_summary(&single),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn round_trip_sum_is_zero() {
        let m =
            RankMatrix::from_rank_columns(names(2), &[vec![1, 2], vec![2, 1], vec![1, 2]]).unwrap();
        let s = rank_change_summary(&m).unwrap();
        assert_eq!(s.sums, vec![0, 0]);
        assert!(s.variances[0] > 0.0);
    }

    #[test]
    fn agreement_examples() {
        let s = ["a", "b", "c"];
        let t = ["b", "a", "c"];
        assert_eq!(agreement(&s, &s, 2).unwrap(), 1.0);
        assert_eq!(agreement(&["a", "b"], &["c", "d"], 2).unwrap(), 0.0);
        assert_eq!(agreement(&s, &t, 1).unwrap(), 0.0);
        assert_eq!(agreement(&s, &t, 2).unwrap(), 1.0);
        assert_eq!(agreement(&s, &t, 3).unwrap(), 1.0);
        assert!(agreement(&s, &t, 0).is_err());
        assert!(agreement(&s, &t, 4).is_err());
    }

    #[test]
    fn rbo_examples() {
        let p1 = RboParams::default();
        assert_eq!(rbo(&["a", "b"], &["a", "b"], &p1).unwrap(), 1.0);
        // Two-element swap: A_1 = 0, A_2 = 1, mean 0.5.
        assert_abs_diff_eq!(
            rbo(&["a", "b"], &["b", "a"], &p1).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        // Three elements with swapped head: (0 + 1 + 1) / 3.
        assert_abs_diff_eq!(
            rbo(&["a", "b", "c"], &["b", "a", "c"], &p1).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        let p0 = RboParams::new(0.0).unwrap();
        assert_eq!(rbo(&["a", "b", "c"], &["a", "c", "b"], &p0).unwrap(), 1.0);
        assert_eq!(rbo(&["a", "b", "c"], &["b", "a", "c"], &p0).unwrap(), 0.0);
        assert!(rbo(&["a", "b"], &["a", "c"], &p1).is_err());
        assert!(rbo(&["a", "a"], &["a", "a"], &p1).is_err());
        assert!(RboParams::new(1.5).is_err());
    }

    #[test]
    fn rbo_brute_force_agreement_sum() {
        // rbo at p = 1 must equal the mean of prefix agreements computed
        // independently.
        let s: Vec<u32> = vec![3, 0, 2, 4, 1];
        let t: Vec<u32> = vec![0, 3, 1, 2, 4];
        let c = s.len();
        let mean_agreement: f64 =
            (1..=c).map(|d| agreement(&s, &t, d).unwrap()).sum::<f64>() / c as f64;
        assert_abs_diff_eq!(
            rbo(&s, &t, &RboParams::default()).unwrap(),
            mean_agreement,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rbo_curves_modes() {
        let constant = RankMatrix::from_rank_columns(names(3), &vec![vec![1, 2, 3]; 6]).unwrap();
        let rl = ranked_list(&constant).unwrap();
        let p = RboParams::default();
        assert_eq!(rbo_curves(&rl, RboMode::Lag(1), &p).unwrap(), vec![1.0; 5]);
        assert_eq!(rbo_curves(&rl, RboMode::Lag(3), &p).unwrap(), vec![1.0; 3]);
        let from0 = rbo_curves(&rl, RboMode::FromInitial, &p).unwrap();
        assert_eq!(from0, vec![1.0; 6]);
        assert!(matches!(
            rbo_curves(&rl, RboMode::Lag(6), &p),
            Err(Error::TooShort(_))
        ));
        assert!(rbo_curves(&rl, RboMode::Lag(0), &p).is_err());
    }

    #[test]
    fn turnover_constant_list_is_all_zero() {
        let constant = RankMatrix::from_rank_columns(names(4), &vec![vec![1, 2, 3, 4]; 5]).unwrap();
        let rl = ranked_list(&constant).unwrap();
        assert_eq!(turnover_series(&rl, 4).unwrap(), vec![0.0; 4]);
        assert!(matches!(turnover(&rl, 4), Err(Error::TurnoverFitUndefined)));
    }

    #[test]
    fn turnover_full_replacement_is_exact_power_law() {
        // Alternating halves: for y <= c/2 the top-y list is completely
        // replaced every step, so z(y) = y exactly and the fit is b=1, a=1.
        let c = 8;
        let first: Vec<u32> = (1..=8).collect();
        let second: Vec<u32> = vec![5, 6, 7, 8, 1, 2, 3, 4];
        let m = RankMatrix::from_rank_columns(
            names(c),
            &[
                first.clone(),
                second,
                first.clone(),
                vec![5, 6, 7, 8, 1, 2, 3, 4],
            ],
        )
        .unwrap();
        let rl = ranked_list(&m).unwrap();
        let series = turnover_series(&rl, 4).unwrap();
        assert_eq!(series, vec![1.0, 2.0, 3.0, 4.0]);
        let fit = turnover(&rl, 4).unwrap();
        assert_abs_diff_eq!(fit.shape.estimate, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficient(), 1.0, epsilon = 1e-12);
        assert_eq!(fit.bias(), CopyingBias::Unbiased);
    }

    #[test]
    fn turnover_series_matches_set_difference_oracle() {
        // Brute-force |top_y(t+1) \ top_y(t)| on a scrambled list.
        use std::collections::HashSet;
        let cols: Vec<Vec<u32>> = vec![
            vec![1, 2, 3, 4, 5],
            vec![3, 1, 5, 2, 4],
            vec![5, 4, 1, 3, 2],
            vec![2, 3, 4, 5, 1],
        ];
        let m = RankMatrix::from_rank_columns(names(5), &cols).unwrap();
        let rl = ranked_list(&m).unwrap();
        let fast = turnover_series(&rl, 5).unwrap();
        for y in 1..=5usize {
            let mut total = 0.0;
            for t in 0..rl.steps() - 1 {
                let cur: HashSet<u32> = rl.ordering(t)[..y].iter().copied().collect();
                let next: HashSet<u32> = rl.ordering(t + 1)[..y].iter().copied().collect();
                total += next.difference(&cur).count() as f64;
            }
            assert_abs_diff_eq!(fast[y - 1], total / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fit_grid_is_dense_then_geometric() {
        let g = turnover_fit_grid(1000);
        assert_eq!(&g[..100], (1..=100).collect::<Vec<_>>().as_slice());
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(*g.last().unwrap() <= 1000);
        assert!(g.len() < 150);
        assert_eq!(turnover_fit_grid(5), vec![1, 2, 3, 4, 5]);
    }

    proptest! {
        #[test]
        fn ranks_invert_to_orderings(seed in 0u64..500, c in 1usize..30, t_len in 1usize..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let columns: Vec<Vec<u64>> = (0..t_len)
                .map(|_| (0..c).map(|_| rng.random_range(1..50u64)).collect())
                .collect();
            let m = RankMatrix::from_counts(names(c), &Grid::from_columns(&columns)).unwrap();
            let rl = ranked_list(&m).unwrap();
            for t in 0..t_len {
                // Composing the ordering with the rank column is the identity.
                for (r, &w) in rl.ordering(t).iter().enumerate() {
                    prop_assert_eq!(m.rank(w as usize, t) as usize, r + 1);
                }
            }
        }

        #[test]
        fn rbo_symmetric_and_self_unit(seed in 0u64..500, c in 1usize..40, p in 0.0f64..1.0) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let mut s: Vec<u32> = (0..c as u32).collect();
            let mut t: Vec<u32> = (0..c as u32).collect();
            s.shuffle(&mut rng);
            t.shuffle(&mut rng);
            let params = RboParams::new(p).unwrap();
            let st = rbo(&s, &t, &params).unwrap();
            let ts = rbo(&t, &s, &params).unwrap();
            prop_assert!((st - ts).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&st));
            // Identical lists score 1 at p = 1; below that, the truncated
            // weight mass caps the score at 1 - p^c.
            let self_score = rbo(&s, &s, &params).unwrap();
            let cap = if (p - 1.0).abs() < f64::EPSILON {
                1.0
            } else {
                1.0 - p.powi(c as i32)
            };
            prop_assert!((self_score - cap).abs() < 1e-9, "self {self_score} vs cap {cap}");
            prop_assert!(st <= self_score + 1e-12);
        }

        #[test]
        fn step_rank_changes_sum_to_zero(seed in 0u64..500, c in 2usize..25) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let columns: Vec<Vec<u64>> = (0..4)
                .map(|_| (0..c).map(|_| rng.random_range(1..30u64)).collect())
                .collect();
            let m = RankMatrix::from_counts(names(c), &Grid::from_columns(&columns)).unwrap();
            for t in 1..4 {
                let delta: i64 = (0..c)
                    .map(|w| m.rank(w, t) as i64 - m.rank(w, t - 1) as i64)
                    .sum();
                prop_assert_eq!(delta, 0);
            }
            let s = rank_change_summary(&m).unwrap();
            prop_assert!(s.normalized_sums.iter().all(|v| (-1.0..=1.0).contains(v)));
            prop_assert!(s.normalized_variances.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
