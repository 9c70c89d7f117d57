//! Three-layer unigram ingestion: filter raw records, consolidate them into
//! a word-by-year table, and materialize a tagged lexicon.
//!
//! Input records follow the tab-separated unigram layout
//! `token<TAB>year<TAB>match_count<TAB>volume_count`, one per line. Filtering
//! keeps records inside the configured year interval with at least the
//! configured volume count. Consolidation lowercases tokens, strips
//! `_POS`-style suffix annotations, sums counts per (word, year), and drops
//! every word that is missing a year. Shards may be consolidated separately
//! and merged; the merge is a plain sum, so the outcome does not depend on
//! shard order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wf::FrequencyMatrix;

/// One raw unigram record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnigramRecord {
    pub token: String,
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
}

/// Record-level retention rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterConfig {
    pub min_volumes: u64,
    pub year_start: i32,
    pub year_end: i32,
}

impl FilterConfig {
    pub fn new(min_volumes: u64, year_start: i32, year_end: i32) -> Result<Self> {
        if min_volumes == 0 {
            return Err(Error::Domain("volume threshold must be >= 1".into()));
        }
        if year_start > year_end {
            return Err(Error::Domain(format!(
                "year range {year_start}..{year_end} is empty"
            )));
        }
        Ok(FilterConfig {
            min_volumes,
            year_start,
            year_end,
        })
    }

    /// Inclusive on both the year interval and the volume threshold.
    pub fn retains(&self, record: &UnigramRecord) -> bool {
        (self.year_start..=self.year_end).contains(&record.year)
            && record.volume_count >= self.min_volumes
    }
}

/// Ingestion counters reported alongside every run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct IngestStats {
    pub lines_read: u64,
    pub malformed: u64,
    pub filtered_out: u64,
    pub retained: u64,
    /// Records whose token collapsed to nothing after annotation stripping.
    pub empty_token: u64,
    pub words_seen: u64,
    pub words_dropped_incomplete: u64,
}

/// Parses one tab-separated record line. Returns None for anything
/// malformed: wrong field count, non-numeric fields, or zero counts.
pub fn parse_record(line: &str) -> Option<UnigramRecord> {
    let mut fields = line.split('\t');
    let token = fields.next()?;
    let year = fields.next()?.parse::<i32>().ok()?;
    let match_count = fields.next()?.parse::<u64>().ok()?;
    let volume_count = fields.next()?.parse::<u64>().ok()?;
    if fields.next().is_some() || token.is_empty() || match_count == 0 || volume_count == 0 {
        return None;
    }
    Some(UnigramRecord {
        token: token.to_string(),
        year,
        match_count,
        volume_count,
    })
}

/// Applies the filter layer to a record stream, counting what was dropped.
pub fn filter_records<I>(
    records: I,
    cfg: &FilterConfig,
    stats: &mut IngestStats,
) -> Vec<UnigramRecord>
where
    I: IntoIterator<Item = UnigramRecord>,
{
    records
        .into_iter()
        .filter(|r| {
            if cfg.retains(r) {
                stats.retained += 1;
                true
            } else {
                stats.filtered_out += 1;
                false
            }
        })
        .collect()
}

/// Lowercases a token and strips a `_TAG` annotation at the last underscore.
/// Returns None when nothing is left.
pub fn normalize_token(token: &str) -> Option<String> {
    let stem = match token.rsplit_once('_') {
        Some((word, _tag)) => word,
        None => token,
    };
    if stem.is_empty() {
        return None;
    }
    Some(stem.to_lowercase())
}

/// Consolidation layer: accumulates filtered records into per-word year
/// vectors. Shards can be consolidated independently and merged.
#[derive(Debug, Clone)]
pub struct Consolidator {
    year_start: i32,
    n_years: usize,
    counts: BTreeMap<String, Vec<u64>>,
}

impl Consolidator {
    pub fn new(year_start: i32, year_end: i32) -> Result<Self> {
        if year_start > year_end {
            return Err(Error::Domain(format!(
                "year range {year_start}..{year_end} is empty"
            )));
        }
        Ok(Consolidator {
            year_start,
            n_years: (year_end - year_start) as usize + 1,
            counts: BTreeMap::new(),
        })
    }

    /// Folds one record in; records outside the year range are ignored.
    pub fn add(&mut self, record: &UnigramRecord, stats: &mut IngestStats) {
        let offset = record.year - self.year_start;
        if offset < 0 || offset as usize >= self.n_years {
            return;
        }
        let Some(word) = normalize_token(&record.token) else {
            stats.empty_token += 1;
            return;
        };
        let per_year = self
            .counts
            .entry(word)
            .or_insert_with(|| vec![0; self.n_years]);
        per_year[offset as usize] += record.match_count;
    }

    /// Sums another shard's accumulation into this one. Associative and
    /// commutative, so shard scheduling cannot change the result.
    pub fn merge(&mut self, other: Consolidator) -> Result<()> {
        if other.year_start != self.year_start || other.n_years != self.n_years {
            return Err(Error::Shape(
                "merging consolidators over different year ranges".into(),
            ));
        }
        for (word, theirs) in other.counts {
            match self.counts.get_mut(&word) {
                Some(ours) => {
                    for (a, b) in ours.iter_mut().zip(theirs) {
                        *a += b;
                    }
                }
                None => {
                    self.counts.insert(word, theirs);
                }
            }
        }
        Ok(())
    }

    /// Applies the completeness rule: every retained word must have a
    /// non-zero count in every year of the range.
    pub fn finish(self, stats: &mut IngestStats) -> WordYearTable {
        let years: Vec<i32> = (0..self.n_years)
            .map(|i| self.year_start + i as i32)
            .collect();
        let mut counts = BTreeMap::new();
        for (word, per_year) in self.counts {
            stats.words_seen += 1;
            if per_year.iter().all(|&c| c > 0) {
                counts.insert(word, per_year);
            } else {
                stats.words_dropped_incomplete += 1;
            }
        }
        WordYearTable { years, counts }
    }
}

/// Complete word-by-year counts, lexicographically ordered by word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordYearTable {
    pub years: Vec<i32>,
    pub counts: BTreeMap<String, Vec<u64>>,
}

/// Filter + consolidate over an already parsed record stream.
pub fn consolidate<I>(records: I, cfg: &FilterConfig, stats: &mut IngestStats) -> WordYearTable
where
    I: IntoIterator<Item = UnigramRecord>,
{
    let mut consolidator =
        Consolidator::new(cfg.year_start, cfg.year_end).expect("validated year range");
    for record in records {
        if cfg.retains(&record) {
            stats.retained += 1;
            consolidator.add(&record, stats);
        } else {
            stats.filtered_out += 1;
        }
    }
    consolidator.finish(stats)
}

/// Analysis-ready frequency matrix with stopword and Swadesh tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    words: Vec<String>,
    years: Vec<i32>,
    counts: Grid<u64>,
    stopword: Vec<bool>,
    swadesh: Vec<bool>,
}

impl Lexicon {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn counts(&self) -> &Grid<u64> {
        &self.counts
    }

    pub fn is_stopword(&self, w: usize) -> bool {
        self.stopword[w]
    }

    pub fn is_swadesh(&self, w: usize) -> bool {
        self.swadesh[w]
    }

    pub fn stopword_count(&self) -> usize {
        self.stopword.iter().filter(|&&b| b).count()
    }

    pub fn swadesh_count(&self) -> usize {
        self.swadesh.iter().filter(|&&b| b).count()
    }

    pub fn vocab(&self) -> usize {
        self.words.len()
    }

    /// Total token count of the first retained year.
    pub fn initial_total(&self) -> u64 {
        self.counts.column(0).iter().sum()
    }

    pub fn ln_initial_total(&self) -> f64 {
        (self.initial_total() as f64).ln()
    }

    /// Vocabulary-to-corpus ratio c / beta.
    pub fn vocab_corpus_ratio(&self) -> f64 {
        self.vocab() as f64 / self.initial_total() as f64
    }

    /// Per-year token totals across the whole vocabulary.
    pub fn yearly_totals(&self) -> Vec<u64> {
        (0..self.counts.cols())
            .map(|t| self.counts.column(t).iter().sum())
            .collect()
    }

    pub fn frequency_matrix(&self) -> Result<FrequencyMatrix> {
        FrequencyMatrix::new(self.words.clone(), self.counts.clone())
    }

    /// Assembles from pre-built parts; used by file loaders.
    pub fn from_parts(
        words: Vec<String>,
        years: Vec<i32>,
        counts: Grid<u64>,
        stopword: Vec<bool>,
        swadesh: Vec<bool>,
    ) -> Result<Self> {
        if words.len() != counts.rows()
            || years.len() != counts.cols()
            || stopword.len() != words.len()
            || swadesh.len() != words.len()
        {
            return Err(Error::Shape("lexicon parts disagree in size".into()));
        }
        Ok(Lexicon {
            words,
            years,
            counts,
            stopword,
            swadesh,
        })
    }

    /// Deterministic CSV rendering: header `word,stopword,swadesh` followed
    /// by one column per year; rows in word order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("word,stopword,swadesh");
        for year in &self.years {
            out.push(',');
            out.push_str(&year.to_string());
        }
        out.push('\n');
        for (w, word) in self.words.iter().enumerate() {
            out.push_str(&csv_field(word));
            out.push(',');
            out.push(if self.stopword[w] { '1' } else { '0' });
            out.push(',');
            out.push(if self.swadesh[w] { '1' } else { '0' });
            for t in 0..self.years.len() {
                out.push(',');
                out.push_str(&self.counts.get(w, t).to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Quotes a CSV field exactly when RFC 4180 requires it.
pub fn csv_field(value: &str) -> String {
    if value.contains(['"', ',', '\n', '\r']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Splits one CSV line into fields, honoring RFC 4180 quoting.
pub fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(ch) = chars.next() {
        match ch {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' if field.is_empty() => quoted = true,
            ',' if !quoted => {
                fields.push(std::mem::take(&mut field));
            }
            _ => field.push(ch),
        }
    }
    fields.push(field);
    fields
}

impl Lexicon {
    /// Parses the CSV layout produced by [`Lexicon::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("lexicon file is empty".into()))?;
        let head_fields = split_csv_line(header);
        if head_fields.len() < 4
            || head_fields[0] != "word"
            || head_fields[1] != "stopword"
            || head_fields[2] != "swadesh"
        {
            return Err(Error::Config(
                "lexicon header must start with word,stopword,swadesh and one column per year"
                    .into(),
            ));
        }
        let years: Vec<i32> = head_fields[3..]
            .iter()
            .map(|y| {
                y.parse::<i32>()
                    .map_err(|_| Error::Config(format!("bad year column '{y}'")))
            })
            .collect::<Result<_>>()?;

        let mut words = Vec::new();
        let mut stopword = Vec::new();
        let mut swadesh = Vec::new();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields = split_csv_line(line);
            if fields.len() != 3 + years.len() {
                return Err(Error::Config(format!(
                    "lexicon row {} has {} fields, expected {}",
                    i + 2,
                    fields.len(),
                    3 + years.len()
                )));
            }
            words.push(fields[0].clone());
            stopword.push(fields[1] == "1");
            swadesh.push(fields[2] == "1");
            rows.push(
                fields[3..]
                    .iter()
                    .map(|v| {
                        v.parse::<u64>()
                            .map_err(|_| Error::Config(format!("bad count '{v}' in row {}", i + 2)))
                    })
                    .collect::<Result<_>>()?,
            );
        }
        let columns: Vec<Vec<u64>> = (0..years.len())
            .map(|t| rows.iter().map(|r| r[t]).collect())
            .collect();
        let counts = if words.is_empty() {
            Grid::zeroed(0, years.len())
        } else {
            Grid::from_columns(&columns)
        };
        Lexicon::from_parts(words, years, counts, stopword, swadesh)
    }
}

/// Loads a word list: UTF-8, one word per line, `#` lines ignored, entries
/// lowercased with the same folding used for tokens.
pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read word list {}: {e}", path.display())))?;
    Ok(parse_word_list(&text))
}

pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Materializes the lexicon from a consolidated table, tagging stopwords and
/// Swadesh words from optional list files.
pub fn build_lexicon(
    table: WordYearTable,
    stopword_file: Option<&Path>,
    swadesh_file: Option<&Path>,
) -> Result<Lexicon> {
    let stop = stopword_file
        .map(load_word_list)
        .transpose()?
        .unwrap_or_default();
    let swad = swadesh_file
        .map(load_word_list)
        .transpose()?
        .unwrap_or_default();

    let words: Vec<String> = table.counts.keys().cloned().collect();
    let columns: Vec<Vec<u64>> = (0..table.years.len())
        .map(|t| table.counts.values().map(|per_year| per_year[t]).collect())
        .collect();
    let counts = if words.is_empty() {
        Grid::zeroed(0, table.years.len())
    } else {
        Grid::from_columns(&columns)
    };
    let stopword = words.iter().map(|w| stop.contains(w)).collect();
    let swadesh = words.iter().map(|w| swad.contains(w)).collect();
    Lexicon::from_parts(words, table.years, counts, stopword, swadesh)
}

/// Full pipeline over shard files on disk.
pub fn ingest_files(
    shards: &[impl AsRef<Path>],
    cfg: &FilterConfig,
    stopword_file: Option<&Path>,
    swadesh_file: Option<&Path>,
) -> Result<(Lexicon, IngestStats)> {
    let mut stats = IngestStats::default();
    let mut consolidator = Consolidator::new(cfg.year_start, cfg.year_end)?;
    for shard in shards {
        let path = shard.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for line in text.lines() {
            stats.lines_read += 1;
            match parse_record(line) {
                Some(record) => {
                    if cfg.retains(&record) {
                        stats.retained += 1;
                        consolidator.add(&record, &mut stats);
                    } else {
                        stats.filtered_out += 1;
                    }
                }
                None => stats.malformed += 1,
            }
        }
    }
    let table = consolidator.finish(&mut stats);
    let lexicon = build_lexicon(table, stopword_file, swadesh_file)?;
    Ok((lexicon, stats))
}
