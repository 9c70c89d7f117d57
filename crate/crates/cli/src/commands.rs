//! The five subcommands. Every run writes its outputs plus a manifest.json
//! whose `config` member reproduces the run byte-for-byte via --config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rankdrift::calibration::{fit_corpus_growth, fit_zipf_shape, FitResult};
use rankdrift::distributions::ZipfParams;
use rankdrift::grid::Grid;
use rankdrift::ingest::{csv_field, ingest_files, split_csv_line, FilterConfig, Lexicon};
use rankdrift::metrics::{
    rank_change_summary, ranked_list, rbo_curves, turnover, CopyingBias, RankMatrix, RboMode,
    RboParams, NEUTRAL_TURNOVER_SHAPE,
};
use rankdrift::overlap::potential_profile;
use rankdrift::wf::{ensemble, normalize_proportions, normalize_zscores, SimulationConfig};

use crate::config::{self, parse_years};
use crate::output::{
    fmt_real, grid_csv, prepare_out_dir, write_file, write_manifest, Manifest, VERSION,
};
use crate::{
    AnalyzeArgs, CliError, CliResult, FitArgs, FitMode, IngestArgs, PotentialArgs, SimulateArgs,
};

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateConfig {
    alpha: f64,
    beta: u64,
    vocab: usize,
    zipf_a: f64,
    steps: usize,
    seed: u64,
    replicates: usize,
    rbo_p: f64,
    lag: usize,
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let file = config::load(args.common.config.as_deref())?;
    let defaults = SimulationConfig::default();
    let effective = SimulateConfig {
        alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        beta: args.beta.or(file.beta).unwrap_or(defaults.beta),
        vocab: args.vocab.or(file.vocab).unwrap_or(defaults.vocab),
        zipf_a: args.zipf_a.or(file.zipf_a).unwrap_or(defaults.zipf_shape),
        steps: args.steps.or(file.steps).unwrap_or(defaults.steps),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        replicates: args
            .replicates
            .or(file.replicates)
            .unwrap_or(defaults.replicates),
        rbo_p: args.rbo_p.or(file.rbo_p).unwrap_or(1.0),
        lag: args.lag.or(file.lag).unwrap_or(10),
    };
    let sim = SimulationConfig {
        alpha: effective.alpha,
        beta: effective.beta,
        vocab: effective.vocab,
        zipf_shape: effective.zipf_a,
        steps: effective.steps,
        seed: effective.seed,
        replicates: effective.replicates,
    };
    sim.validate()?;
    let rbo_params = RboParams::new(effective.rbo_p)?;
    prepare_out_dir(&args.common.out, args.common.force)?;

    let runs = ensemble(&sim)?;

    // Replicate 0 grids, labeled by step index.
    let labels: Vec<String> = (0..sim.steps).map(|t| t.to_string()).collect();
    let rep0 = &runs[0];
    let words = rep0.frequencies.words();
    write_grids(
        &args.common.out,
        words,
        &labels,
        rep0.frequencies.counts(),
        &rep0.proportions,
        &rep0.zscores,
        &rep0.ranks,
    )?;

    // Per-replicate rank-change summary.
    let mut summary_csv = String::from(
        "replicate,word,initial_rank,sum,normalized_sum,variance,normalized_variance\n",
    );
    for (r, run) in runs.iter().enumerate() {
        let summary = rank_change_summary(&run.ranks)?;
        for (w, word) in run.frequencies.words().iter().enumerate() {
            let _ = writeln!(
                summary_csv,
                "{r},{},{},{},{},{},{}",
                csv_field(word),
                run.ranks.rank(w, 0),
                summary.sums[w],
                fmt_real(summary.normalized_sums[w]),
                fmt_real(summary.variances[w]),
                fmt_real(summary.normalized_variances[w]),
            );
        }
    }
    write_file(&args.common.out, "summary.csv", &summary_csv)?;

    // Per-replicate RBO curves in the three standard modes.
    let modes = [
        ("rbo_lag1.csv".to_string(), RboMode::Lag(1)),
        (
            format!("rbo_lag{}.csv", effective.lag),
            RboMode::Lag(effective.lag),
        ),
        ("rbo_initial.csv".to_string(), RboMode::FromInitial),
    ];
    for (name, mode) in modes {
        let mut csv = String::from("replicate,t,rbo\n");
        for (r, run) in runs.iter().enumerate() {
            let rl = ranked_list(&run.ranks)?;
            for (t, value) in rbo_curves(&rl, mode, &rbo_params)?.iter().enumerate() {
                let _ = writeln!(csv, "{r},{t},{}", fmt_real(*value));
            }
        }
        write_file(&args.common.out, &name, &csv)?;
    }

    write_manifest(
        &args.common.out,
        &Manifest {
            command: "simulate",
            config: effective,
            input_paths: Vec::new(),
            output_dir: args.common.out.clone(),
            version: VERSION,
        },
    )?;
    println!(
        "simulated {} replicates of {} words over {} steps into {}",
        sim.replicates,
        sim.vocab,
        sim.steps,
        args.common.out.display()
    );
    Ok(())
}

// ----------------------------------------------------------------- analyze

#[derive(Serialize)]
struct AnalyzeConfig {
    input: PathBuf,
    rbo_p: f64,
    lag: usize,
}

pub fn analyze(args: AnalyzeArgs) -> CliResult<()> {
    let file = config::load(args.common.config.as_deref())?;
    let input = args
        .input
        .or_else(|| file.input.as_ref().and_then(|v| v.first().cloned()))
        .ok_or_else(|| CliError::Usage("analyze needs --input LEXICON_CSV".into()))?;
    let effective = AnalyzeConfig {
        input: input.clone(),
        rbo_p: args.rbo_p.or(file.rbo_p).unwrap_or(1.0),
        lag: args.lag.or(file.lag).unwrap_or(10),
    };
    let rbo_params = RboParams::new(effective.rbo_p)?;
    let text = std::fs::read_to_string(&input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let lexicon = Lexicon::from_csv(&text)?;
    let freqs = lexicon.frequency_matrix()?;
    prepare_out_dir(&args.common.out, args.common.force)?;

    let labels: Vec<String> = lexicon.years().iter().map(|y| y.to_string()).collect();
    let proportions = normalize_proportions(&freqs);
    let (zscores, _constant) = normalize_zscores(&proportions);
    let ranks = RankMatrix::from_counts(freqs.words().to_vec(), freqs.counts())?;
    write_grids(
        &args.common.out,
        freqs.words(),
        &labels,
        freqs.counts(),
        &proportions,
        &zscores,
        &ranks,
    )?;

    let summary = rank_change_summary(&ranks)?;
    let mut summary_csv = String::from(
        "word,initial_rank,sum,normalized_sum,variance,normalized_variance,is_stopword,is_swadesh\n",
    );
    for (w, word) in freqs.words().iter().enumerate() {
        let _ = writeln!(
            summary_csv,
            "{},{},{},{},{},{},{},{}",
            csv_field(word),
            ranks.rank(w, 0),
            summary.sums[w],
            fmt_real(summary.normalized_sums[w]),
            fmt_real(summary.variances[w]),
            fmt_real(summary.normalized_variances[w]),
            u8::from(lexicon.is_stopword(w)),
            u8::from(lexicon.is_swadesh(w)),
        );
    }
    write_file(&args.common.out, "summary.csv", &summary_csv)?;

    let rl = ranked_list(&ranks)?;
    let modes = [
        ("rbo_lag1.csv".to_string(), RboMode::Lag(1)),
        (
            format!("rbo_lag{}.csv", effective.lag),
            RboMode::Lag(effective.lag),
        ),
        ("rbo_initial.csv".to_string(), RboMode::FromInitial),
    ];
    for (name, mode) in modes {
        let mut csv = String::from("t,rbo\n");
        for (t, value) in rbo_curves(&rl, mode, &rbo_params)?.iter().enumerate() {
            let _ = writeln!(csv, "{t},{}", fmt_real(*value));
        }
        write_file(&args.common.out, &name, &csv)?;
    }

    write_manifest(
        &args.common.out,
        &Manifest {
            command: "analyze",
            config: effective,
            input_paths: vec![input],
            output_dir: args.common.out.clone(),
            version: VERSION,
        },
    )?;
    println!(
        "analyzed {} words over {} years into {}",
        lexicon.vocab(),
        lexicon.years().len(),
        args.common.out.display()
    );
    Ok(())
}

// --------------------------------------------------------------------- fit

#[derive(Serialize)]
struct FitConfig {
    mode: String,
    input: PathBuf,
    y_max: Option<usize>,
}

pub fn fit(args: FitArgs) -> CliResult<()> {
    let file = config::load(args.common.config.as_deref())?;
    let input = args
        .input
        .or_else(|| file.input.as_ref().and_then(|v| v.first().cloned()))
        .ok_or_else(|| CliError::Usage("fit needs --input FILE".into()))?;
    let y_max = args.y_max.or(file.y_max);
    let text = std::fs::read_to_string(&input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    prepare_out_dir(&args.common.out, args.common.force)?;

    let mut fits_csv =
        String::from("parameter,estimate,ci_low,ci_high,confidence,n_points,residual_variance\n");
    let mut fit_row = |name: &str, f: &FitResult| {
        let _ = writeln!(
            fits_csv,
            "{name},{},{},{},{},{},{}",
            fmt_real(f.estimate),
            fmt_real(f.ci_low),
            fmt_real(f.ci_high),
            f.confidence,
            f.n_points,
            fmt_real(f.residual_variance),
        );
    };

    let mode_name = match args.mode {
        FitMode::Corpus => {
            let totals = yearly_totals_from_csv(&text, &input)?;
            let (alpha, ln_beta) = fit_corpus_growth(&totals)?;
            fit_row("alpha", &alpha);
            fit_row("ln_beta", &ln_beta);
            println!(
                "alpha = {:.6} (99% CI {:.6}..{:.6}), ln beta = {:.4}",
                alpha.estimate, alpha.ci_low, alpha.ci_high, ln_beta.estimate
            );
            "corpus"
        }
        FitMode::Zipf => {
            let lexicon = Lexicon::from_csv(&text)?;
            let initial: Vec<f64> = lexicon
                .counts()
                .column(0)
                .iter()
                .map(|&c| c as f64)
                .collect();
            let shape = fit_zipf_shape(&initial)?;
            fit_row("zipf_shape", &shape);
            println!(
                "zipf shape a = {:.4} (99% CI {:.4}..{:.4}, {} head ranks fitted)",
                shape.estimate, shape.ci_low, shape.ci_high, shape.n_points
            );
            "zipf"
        }
        FitMode::Turnover => {
            let lexicon = Lexicon::from_csv(&text)?;
            let freqs = lexicon.frequency_matrix()?;
            let ranks = RankMatrix::from_counts(freqs.words().to_vec(), freqs.counts())?;
            let rl = ranked_list(&ranks)?;
            let cap = y_max.unwrap_or_else(|| lexicon.vocab().min(1000));
            let result = turnover(&rl, cap)?;
            fit_row("turnover_shape", &result.shape);
            fit_row("turnover_log_coefficient", &result.log_coefficient);
            let mut series = String::from("y,z\n");
            for (y, z) in result.y.iter().zip(&result.z) {
                let _ = writeln!(series, "{y},{}", fmt_real(*z));
            }
            write_file(&args.common.out, "turnover.csv", &series)?;
            let bias = match result.bias() {
                CopyingBias::Conformity => "conformity",
                CopyingBias::AntiConformity => "anti-conformity",
                CopyingBias::Unbiased => "unbiased",
            };
            println!(
                "turnover shape b = {:.4} (99% CI {:.4}..{:.4}); {} relative to 1, \
                 unbiased-copying reference {}",
                result.shape.estimate,
                result.shape.ci_low,
                result.shape.ci_high,
                bias,
                NEUTRAL_TURNOVER_SHAPE
            );
            "turnover"
        }
    };
    write_file(&args.common.out, "fits.csv", &fits_csv)?;

    write_manifest(
        &args.common.out,
        &Manifest {
            command: "fit",
            config: FitConfig {
                mode: mode_name.to_string(),
                input: input.clone(),
                y_max,
            },
            input_paths: vec![input],
            output_dir: args.common.out.clone(),
            version: VERSION,
        },
    )?;
    Ok(())
}

/// Corpus fits accept either a lexicon CSV (totals are column sums) or a
/// two-column `year,total` CSV.
fn yearly_totals_from_csv(text: &str, path: &Path) -> CliResult<Vec<u64>> {
    let header = text.lines().next().unwrap_or_default();
    let fields = split_csv_line(header);
    match fields.first().map(String::as_str) {
        Some("word") => Ok(Lexicon::from_csv(text)?.yearly_totals()),
        Some("year") => {
            let mut totals = Vec::new();
            for (i, line) in text.lines().skip(1).enumerate() {
                if line.is_empty() {
                    continue;
                }
                let fields = split_csv_line(line);
                let total = fields
                    .get(1)
                    .and_then(|v| v.parse::<u64>().ok())
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "{}: row {} is not year,total",
                            path.display(),
                            i + 2
                        ))
                    })?;
                totals.push(total);
            }
            Ok(totals)
        }
        _ => Err(CliError::Usage(format!(
            "{}: expected a lexicon CSV or a year,total CSV",
            path.display()
        ))),
    }
}

// ------------------------------------------------------------------ ingest

#[derive(Serialize)]
struct IngestConfig {
    input: Vec<PathBuf>,
    min_volumes: u64,
    years: String,
    stopwords: Option<PathBuf>,
    swadesh: Option<PathBuf>,
}

pub fn ingest(args: IngestArgs) -> CliResult<()> {
    let file = config::load(args.common.config.as_deref())?;
    let input = if args.input.is_empty() {
        file.input.unwrap_or_default()
    } else {
        args.input
    };
    if input.is_empty() {
        return Err(CliError::Usage(
            "ingest needs at least one --input shard".into(),
        ));
    }
    let min_volumes = args
        .min_volumes
        .or(file.min_volumes)
        .ok_or_else(|| CliError::Usage("ingest needs --min-volumes".into()))?;
    let years = args
        .years
        .or(file.years)
        .ok_or_else(|| CliError::Usage("ingest needs --years A:B".into()))?;
    let (start, end) = parse_years(&years)?;
    let stopwords = args.stopwords.or(file.stopwords);
    let swadesh = args.swadesh.or(file.swadesh);
    let cfg = FilterConfig::new(min_volumes, start, end)?;
    prepare_out_dir(&args.common.out, args.common.force)?;

    let (lexicon, stats) = ingest_files(&input, &cfg, stopwords.as_deref(), swadesh.as_deref())?;
    write_file(&args.common.out, "lexicon.csv", &lexicon.to_csv())?;

    write_manifest(
        &args.common.out,
        &Manifest {
            command: "ingest",
            config: IngestConfig {
                input: input.clone(),
                min_volumes,
                years,
                stopwords,
                swadesh,
            },
            input_paths: input,
            output_dir: args.common.out.clone(),
            version: VERSION,
        },
    )?;

    println!(
        "records: {} read, {} malformed, {} filtered out, {} retained",
        stats.lines_read, stats.malformed, stats.filtered_out, stats.retained
    );
    println!(
        "words: {} seen, {} dropped for incomplete year coverage, {} retained",
        stats.words_seen,
        stats.words_dropped_incomplete,
        lexicon.vocab()
    );
    if lexicon.vocab() > 0 {
        println!(
            "lexicon: c = {}, stopwords = {}, swadesh = {}, ln(beta) = {:.4}, c/beta = {:.3e}",
            lexicon.vocab(),
            lexicon.stopword_count(),
            lexicon.swadesh_count(),
            lexicon.ln_initial_total(),
            lexicon.vocab_corpus_ratio()
        );
    }
    Ok(())
}

// --------------------------------------------------------------- potential

#[derive(Serialize)]
struct PotentialConfig {
    vocab: usize,
    zipf_a: f64,
    betas: Vec<u64>,
}

pub fn potential(args: PotentialArgs) -> CliResult<()> {
    let file = config::load(args.common.config.as_deref())?;
    let effective = PotentialConfig {
        vocab: args.vocab.or(file.vocab).unwrap_or(1000),
        zipf_a: args.zipf_a.or(file.zipf_a).unwrap_or(1.0),
        betas: if args.betas.is_empty() {
            file.betas.unwrap_or_default()
        } else {
            args.betas
        },
    };
    if effective.betas.is_empty() {
        return Err(CliError::Usage("potential needs --betas N[,N...]".into()));
    }
    let zipf = ZipfParams::new(effective.zipf_a, effective.vocab)?;
    prepare_out_dir(&args.common.out, args.common.force)?;

    let profile = potential_profile(&zipf, &effective.betas)?;
    let mut csv = String::from("beta,rank,mu,sigma,net_potential,normalized_potential\n");
    for (beta, report) in &profile {
        for (i, env) in report.envelopes.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{beta},{},{},{},{},{}",
                i + 1,
                fmt_real(env.mu),
                fmt_real(env.sigma),
                report.net_potential[i],
                fmt_real(report.normalized_potential[i]),
            );
        }
    }
    write_file(&args.common.out, "potential.csv", &csv)?;

    write_manifest(
        &args.common.out,
        &Manifest {
            command: "potential",
            config: effective,
            input_paths: Vec::new(),
            output_dir: args.common.out.clone(),
            version: VERSION,
        },
    )?;
    println!("wrote potential profile to {}", args.common.out.display());
    Ok(())
}

// ------------------------------------------------------------------ shared

fn write_grids(
    dir: &Path,
    words: &[String],
    labels: &[String],
    counts: &Grid<u64>,
    proportions: &Grid<f64>,
    zscores: &Grid<f64>,
    ranks: &RankMatrix,
) -> CliResult<()> {
    let (rows, cols) = (counts.rows(), counts.cols());
    write_file(
        dir,
        "counts.csv",
        &grid_csv(
            words,
            labels,
            rows,
            cols,
            |w, t| counts.get(w, t),
            |v| v.to_string(),
        ),
    )?;
    write_file(
        dir,
        "ranks.csv",
        &grid_csv(
            words,
            labels,
            rows,
            cols,
            |w, t| ranks.rank(w, t),
            |v| v.to_string(),
        ),
    )?;
    write_file(
        dir,
        "props.csv",
        &grid_csv(
            words,
            labels,
            rows,
            cols,
            |w, t| proportions.get(w, t),
            fmt_real,
        ),
    )?;
    write_file(
        dir,
        "zscores.csv",
        &grid_csv(
            words,
            labels,
            rows,
            cols,
            |w, t| zscores.get(w, t),
            fmt_real,
        ),
    )?;
    Ok(())
}
