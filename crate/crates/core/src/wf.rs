//! The resampling engine: single trajectories and seeded ensembles of the
//! neutral word-frequency Markov chain.
//!
//! Generation t+1 redraws every token from generation t's proportions, with
//! one token reserved per word so the vocabulary never shrinks. The corpus
//! size follows the exponential growth law. A trajectory materializes raw
//! counts, per-year proportions, per-word z-scores, and per-year ranks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::distributions::{
    corpus_size, sample_multinomial_guarded, zipf_sample_initial, GrowthParams, ZipfParams,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::metrics::RankMatrix;

/// Full parameter set of one simulation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Corpus growth rate per step.
    pub alpha: f64,
    /// Initial corpus size in tokens.
    pub beta: u64,
    /// Vocabulary size, fixed over time.
    pub vocab: usize,
    /// Zipf shape of the initial distribution.
    pub zipf_shape: f64,
    /// Number of time steps (years).
    pub steps: usize,
    /// Master seed; replicate r draws from stream (seed, r).
    pub seed: u64,
    /// Ensemble size.
    pub replicates: usize,
}

impl Default for SimulationConfig {
    /// The reference experiment: alpha 0.01, beta 1e5, c 1000, a 1, T 109,
    /// 100 replicates.
    fn default() -> Self {
        SimulationConfig {
            alpha: 0.01,
            beta: 100_000,
            vocab: 1000,
            zipf_shape: 1.0,
            steps: 109,
            seed: 0,
            replicates: 100,
        }
    }
}

impl SimulationConfig {
    pub fn zipf(&self) -> Result<ZipfParams> {
        ZipfParams::new(self.zipf_shape, self.vocab)
    }

    pub fn growth(&self) -> Result<GrowthParams> {
        GrowthParams::new(self.alpha, self.beta)
    }

    /// Checks all invariants, including that the final corpus size is
    /// representable, so sampling cannot fail midway.
    pub fn validate(&self) -> Result<()> {
        self.zipf()?;
        let growth = self.growth()?;
        if self.beta < self.vocab as u64 {
            return Err(Error::Infeasible {
                tokens: self.beta,
                vocab: self.vocab,
            });
        }
        if self.steps == 0 {
            return Err(Error::Domain("need at least one time step".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Domain("need at least one replicate".into()));
        }
        corpus_size(self.steps - 1, &growth)?;
        Ok(())
    }

    /// Independent random stream for one replicate, derived from
    /// (seed, replicate) via the generator's stream counter. Streams never
    /// overlap, so replicates can run in any order or in parallel.
    pub fn replicate_rng(&self, replicate: usize) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        rng
    }

    /// Synthetic word identifiers w0001..wC, zero-padded so lexicographic
    /// order equals index order.
    pub fn word_names(&self) -> Vec<String> {
        word_names(self.vocab)
    }
}

pub(crate) fn word_names(vocab: usize) -> Vec<String> {
    let width = vocab.to_string().len();
    (1..=vocab).map(|w| format!("w{w:0width$}")).collect()
}

/// Non-negative integer counts, one row per word and one column per step;
/// every entry is at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    words: Vec<String>,
    counts: Grid<u64>,
}

impl FrequencyMatrix {
    pub fn new(words: Vec<String>, counts: Grid<u64>) -> Result<Self> {
        if words.len() != counts.rows() {
            return Err(Error::Shape(format!(
                "{} words vs {} count rows",
                words.len(),
                counts.rows()
            )));
        }
        if counts.rows() == 0 || counts.cols() == 0 {
            return Err(Error::Shape("frequency matrix must be non-empty".into()));
        }
        for t in 0..counts.cols() {
            if counts.column(t).contains(&0) {
                return Err(Error::Domain(format!(
                    "zero count at step {t}; every word needs a count in every step"
                )));
            }
        }
        Ok(FrequencyMatrix { words, counts })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &Grid<u64> {
        &self.counts
    }

    pub fn vocab(&self) -> usize {
        self.counts.rows()
    }

    pub fn steps(&self) -> usize {
        self.counts.cols()
    }

    pub fn column_total(&self, t: usize) -> u64 {
        self.counts.column(t).iter().sum()
    }
}

/// One realized simulation: counts plus the derived proportion, z-score, and
/// rank grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frequencies: FrequencyMatrix,
    pub proportions: Grid<f64>,
    pub zscores: Grid<f64>,
    /// Per-word flag: true when the proportion row was constant, in which
    /// case its z-scores were emitted as zeros instead of dividing by zero.
    pub constant_rows: Vec<bool>,
    pub ranks: RankMatrix,
}

/// Draws one generation from the previous generation's proportions.
/// Every word keeps at least one token; the output sums to `n_next`.
pub fn step<R: Rng + ?Sized>(prev: &[u64], n_next: u64, rng: &mut R) -> Result<Vec<u64>> {
    if prev.is_empty() || prev.contains(&0) {
        return Err(Error::Domain(
            "previous generation must have a positive count for every word".into(),
        ));
    }
    let total: u64 = prev.iter().sum();
    let proportions: Vec<f64> = prev.iter().map(|&x| x as f64 / total as f64).collect();
    sample_multinomial_guarded(&proportions, n_next, rng)
}

/// Runs one replicate: the initial column is a Zipf draw of beta tokens,
/// every later column resamples the previous one at the grown corpus size.
/// Deterministic given (config.seed, replicate).
pub fn simulate(config: &SimulationConfig, replicate: usize) -> Result<Trajectory> {
    config.validate()?;
    let zipf = config.zipf()?;
    let growth = config.growth()?;
    let mut rng = config.replicate_rng(replicate);

    let mut columns: Vec<Vec<u64>> = Vec::with_capacity(config.steps);
    columns.push(zipf_sample_initial(&zipf, config.beta, &mut rng)?);
    for t in 1..config.steps {
        let n_t = corpus_size(t, &growth)?;
        let next = step(columns.last().unwrap(), n_t, &mut rng)?;
        columns.push(next);
    }

    let counts = Grid::from_columns(&columns);
    let frequencies = FrequencyMatrix::new(config.word_names(), counts)?;
    let proportions = normalize_proportions(&frequencies);
    let (zscores, constant_rows) = normalize_zscores(&proportions);
    let ranks = RankMatrix::from_counts(frequencies.words().to_vec(), frequencies.counts())?;
    Ok(Trajectory {
        frequencies,
        proportions,
        zscores,
        constant_rows,
        ranks,
    })
}

/// Runs the whole ensemble. Replicate r is a pure function of
/// (config, r), so the result is identical however the replicates are
/// scheduled.
pub fn ensemble(config: &SimulationConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.replicates)
            .into_par_iter()
            .map(|r| simulate(config, r))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.replicates)
            .map(|r| simulate(config, r))
            .collect()
    }
}

/// Column-normalizes counts into per-step proportions; each column sums to 1.
pub fn normalize_proportions(freqs: &FrequencyMatrix) -> Grid<f64> {
    let mut grid = Grid::zeroed(freqs.vocab(), freqs.steps());
    for t in 0..freqs.steps() {
        let total = freqs.column_total(t) as f64;
        let col = grid.column_mut(t);
        for (out, &count) in col.iter_mut().zip(freqs.counts().column(t)) {
            *out = count as f64 / total;
        }
    }
    grid
}

/// Standardizes each word's proportion series to mean 0 and unit variance,
/// using the population (1/T) variance.
///
/// A constant row has no variance to divide by; it is emitted as all zeros
/// and flagged in the returned vector.
pub fn normalize_zscores(props: &Grid<f64>) -> (Grid<f64>, Vec<bool>) {
    let (c, t_len) = (props.rows(), props.cols());
    let mut grid = Grid::zeroed(c, t_len);
    let mut constant = vec![false; c];
    let tf = t_len as f64;
    for (w, flag) in constant.iter_mut().enumerate() {
        let mean = props.row_iter(w).sum::<f64>() / tf;
        let var = props
            .row_iter(w)
            .map(|p| (p - mean) * (p - mean))
            .sum::<f64>()
            / tf;
        if var <= 0.0 {
            *flag = true;
            continue;
        }
        let sd = var.sqrt();
        for t in 0..t_len {
            grid.set(w, t, (props.get(w, t) - mean) / sd);
        }
    }
    (grid, constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            alpha: 0.02,
            beta: 5_000,
            vocab: 50,
            zipf_shape: 1.0,
            steps: 12,
            seed: 11,
            replicates: 4,
        }
    }

    #[test]
    fn step_single_word_takes_everything() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(step(&[10], 12, &mut rng).unwrap(), vec![12]);
    }

    #[test]
    fn step_without_spare_tokens_gives_all_ones() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(step(&[8, 3, 1], 3, &mut rng).unwrap(), vec![1, 1, 1]);
        assert!(matches!(
            step(&[8, 3, 1], 2, &mut rng),
            Err(Error::Infeasible { .. })
        ));
        assert!(step(&[8, 0], 10, &mut rng).is_err());
    }

    #[test]
    fn step_mean_matches_reserved_binomial() {
        // prev = [150, 50], N = 200: word 1 expects 1 + 198 * 0.75 = 149.5.
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let replicates = 10_000;
        let mut sum = 0.0;
        for _ in 0..replicates {
            sum += step(&[150, 50], 200, &mut rng).unwrap()[0] as f64;
        }
        let mean = sum / replicates as f64;
        let sigma = (198.0f64 * 0.75 * 0.25).sqrt();
        let se = sigma / (replicates as f64).sqrt();
        assert!((mean - 149.5).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn neutral_expectation_at_next_step() {
        // With alpha = 0, the mean count after one step is 1 + (N - c) * p
        // for every word, here checked across 1000 replicate draws.
        let prev: Vec<u64> = vec![400, 250, 200, 100, 50];
        let n: u64 = prev.iter().sum();
        let c = prev.len() as u64;
        let replicates = 1000;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut sums = vec![0.0f64; prev.len()];
        for _ in 0..replicates {
            for (s, &x) in sums.iter_mut().zip(&step(&prev, n, &mut rng).unwrap()) {
                *s += x as f64;
            }
        }
        for (w, &p_count) in prev.iter().enumerate() {
            let p = p_count as f64 / n as f64;
            let expect = 1.0 + (n - c) as f64 * p;
            let sd = ((n - c) as f64 * p * (1.0 - p)).sqrt();
            let se = sd / (replicates as f64).sqrt();
            let mean = sums[w] / replicates as f64;
            assert!(
                (mean - expect).abs() <= 4.0 * se,
                "word {w}: {mean} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn single_word_trajectory_is_degenerate() {
        let config = SimulationConfig {
            alpha: 0.05,
            beta: 100,
            vocab: 1,
            zipf_shape: 1.0,
            steps: 6,
            seed: 3,
            replicates: 1,
        };
        let t = simulate(&config, 0).unwrap();
        assert!((0..6).all(|s| t.ranks.rank(0, s) == 1));
        assert!(t.constant_rows[0]);
        assert!((0..6).all(|s| t.zscores.get(0, s) == 0.0));
        assert!((0..6).all(|s| t.proportions.get(0, s) == 1.0));
    }

    #[test]
    fn zero_growth_at_minimum_corpus_stays_all_ones() {
        let config = SimulationConfig {
            alpha: 0.0,
            beta: 7,
            vocab: 7,
            zipf_shape: 1.0,
            steps: 5,
            seed: 4,
            replicates: 1,
        };
        let t = simulate(&config, 0).unwrap();
        for s in 0..5 {
            assert!(t.frequencies.counts().column(s).iter().all(|&x| x == 1));
        }
    }

    #[test]
    fn columns_conserve_mass() {
        let config = small_config();
        let growth = config.growth().unwrap();
        let t = simulate(&config, 1).unwrap();
        for s in 0..config.steps {
            assert_eq!(
                t.frequencies.column_total(s),
                corpus_size(s, &growth).unwrap()
            );
            let prop_sum: f64 = t.proportions.column(s).iter().sum();
            assert_abs_diff_eq!(prop_sum, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn zscore_rows_are_standardized() {
        let t = simulate(&small_config(), 0).unwrap();
        let t_len = small_config().steps as f64;
        for w in 0..small_config().vocab {
            if t.constant_rows[w] {
                continue;
            }
            let mean: f64 = t.zscores.row_iter(w).sum::<f64>() / t_len;
            let var: f64 = t.zscores.row_iter(w).map(|z| z * z).sum::<f64>() / t_len;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(var, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let config = small_config();
        assert_eq!(simulate(&config, 2).unwrap(), simulate(&config, 2).unwrap());
    }

    #[test]
    fn ensemble_matches_serial_replicates() {
        let config = small_config();
        let all = ensemble(&config).unwrap();
        assert_eq!(all.len(), 4);
        for (r, t) in all.iter().enumerate() {
            assert_eq!(t, &simulate(&config, r).unwrap());
        }
        assert_eq!(all, ensemble(&config).unwrap());
    }

    #[test]
    fn replicates_use_distinct_streams() {
        let config = small_config();
        let a = simulate(&config, 0).unwrap();
        let b = simulate(&config, 1).unwrap();
        assert_ne!(a.frequencies.counts(), b.frequencies.counts());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = small_config();
        config.beta = 10;
        assert!(matches!(config.validate(), Err(Error::Infeasible { .. })));
        let mut config = small_config();
        config.steps = 0;
        assert!(config.validate().is_err());
        let mut config = small_config();
        config.alpha = 1.0;
        config.steps = 100_000;
        assert!(matches!(
            config.validate(),
            Err(Error::CorpusOverflow { .. })
        ));
    }

    #[test]
    fn proportions_examples() {
        let m = FrequencyMatrix::new(word_names(3), Grid::from_columns(&[vec![1, 1, 2]])).unwrap();
        let p = normalize_proportions(&m);
        assert_eq!(p.column(0), &[0.25, 0.25, 0.5]);

        let single =
            FrequencyMatrix::new(word_names(1), Grid::from_columns(&[vec![5], vec![9]])).unwrap();
        let p = normalize_proportions(&single);
        assert_eq!(p.column(0), &[1.0]);
        assert_eq!(p.column(1), &[1.0]);
    }

    #[test]
    fn proportions_on_worked_fixture() {
        // First column of the four-word example: 9, 5, 3, 1 over 18 tokens.
        let m =
            FrequencyMatrix::new(word_names(4), Grid::from_columns(&[vec![9, 5, 3, 1]])).unwrap();
        let p = normalize_proportions(&m);
        let expect = [0.5, 5.0 / 18.0, 3.0 / 18.0, 1.0 / 18.0];
        for (got, want) in p.column(0).iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn zscore_examples() {
        let props = Grid::from_columns(&[
            vec![0.5, 0.0, 1.0],
            vec![0.5, 1.0, 2.0],
            vec![0.5, 0.5, 3.0],
        ]);
        let (z, constant) = normalize_zscores(&props);
        assert_eq!(constant, vec![true, false, false]);
        assert_eq!(z.row_vec(0), vec![0.0, 0.0, 0.0]);
        // Row [0, 1, 0.5]: mean 0.5, population sd sqrt(1/6).
        let sd = (1.0f64 / 6.0).sqrt();
        assert_abs_diff_eq!(z.get(1, 0), -0.5 / sd, epsilon = 1e-12);
        assert_abs_diff_eq!(z.get(1, 1), 0.5 / sd, epsilon = 1e-12);
        // Row [1, 2, 3]: mean 2, population variance 2/3.
        let sd = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(z.get(2, 0), -1.0 / sd, epsilon = 1e-12);
        assert_abs_diff_eq!(z.get(2, 1), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.get(2, 2), 1.0 / sd, epsilon = 1e-12);
        assert_abs_diff_eq!(1.0 / sd, (1.5f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn two_point_zscore_row() {
        let props = Grid::from_columns(&[vec![0.0], vec![1.0]]);
        let (z, constant) = normalize_zscores(&props);
        assert!(!constant[0]);
        assert_abs_diff_eq!(z.get(0, 0), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.get(0, 1), 1.0, epsilon = 1e-12);
    }
}
