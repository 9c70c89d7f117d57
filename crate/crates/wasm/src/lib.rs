//! Browser bindings for the interactive demo page. Three operations, each
//! returning a JSON payload the page renders onto canvases:
//!
//! - `potential_json`: per-rank count envelopes and net rank-change potential
//!   for one (a, c, beta) triple;
//! - `simulate_json`: rank trajectories of a few tracked words plus the
//!   corpus-size series for one seeded run;
//! - `rbo_json`: lag-1, lag-k, and from-initial RBO curves for the same run.
//!
//! Corpus sizes arrive as JS numbers; they are validated as exact non-negative
//! integers before use.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rankdrift::distributions::ZipfParams;
use rankdrift::metrics::{ranked_list, rbo_curves, RboMode, RboParams};
use rankdrift::overlap::net_potential;
use rankdrift::wf::{simulate, SimulationConfig};

fn to_u64(value: f64, what: &str) -> Result<u64, String> {
    if !value.is_finite() || value < 0.0 || value.fract() != 0.0 || value > 2f64.powi(53) {
        return Err(format!(
            "{what} must be a non-negative integer, got {value}"
        ));
    }
    Ok(value as u64)
}

fn config(
    alpha: f64,
    beta: f64,
    vocab: u32,
    zipf_a: f64,
    steps: u32,
    seed: u32,
) -> Result<SimulationConfig, String> {
    let config = SimulationConfig {
        alpha,
        beta: to_u64(beta, "beta")?,
        vocab: vocab as usize,
        zipf_shape: zipf_a,
        steps: steps as usize,
        seed: seed as u64,
        replicates: 1,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

#[derive(Serialize)]
struct PotentialPayload {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    net: Vec<i64>,
    normalized: Vec<f64>,
}

fn potential_payload(zipf_a: f64, vocab: u32, beta: f64) -> Result<String, String> {
    let zipf = ZipfParams::new(zipf_a, vocab as usize).map_err(|e| e.to_string())?;
    let beta = to_u64(beta, "beta")?;
    let report = net_potential(&zipf, beta).map_err(|e| e.to_string())?;
    let payload = PotentialPayload {
        mu: report.envelopes.iter().map(|e| e.mu).collect(),
        sigma: report.envelopes.iter().map(|e| e.sigma).collect(),
        net: report.net_potential,
        normalized: report.normalized_potential,
    };
    serde_json::to_string(&payload).map_err(|e| e.to_string())
}

/// Net rank-change potential profile for one parameter triple.
#[wasm_bindgen]
pub fn potential_json(zipf_a: f64, vocab: u32, beta: f64) -> Result<String, JsValue> {
    potential_payload(zipf_a, vocab, beta).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct TrackedWord {
    initial_rank: u32,
    ranks: Vec<u32>,
}

#[derive(Serialize)]
struct SimulatePayload {
    corpus: Vec<f64>,
    tracked: Vec<TrackedWord>,
}

fn simulate_payload(
    alpha: f64,
    beta: f64,
    vocab: u32,
    zipf_a: f64,
    steps: u32,
    seed: u32,
) -> Result<String, String> {
    let config = config(alpha, beta, vocab, zipf_a, steps, seed)?;
    let run = simulate(&config, 0).map_err(|e| e.to_string())?;
    let rl = ranked_list(&run.ranks).map_err(|e| e.to_string())?;

    // Follow the words that start at a spread of ranks: 1, 10, 100, c/2, c.
    let c = config.vocab as u32;
    let mut targets = vec![1u32, 10, 100, c / 2, c];
    targets.retain(|&r| r >= 1 && r <= c);
    targets.sort_unstable();
    targets.dedup();

    let tracked = targets
        .into_iter()
        .map(|initial_rank| {
            let word = rl.word_at(initial_rank as usize, 0);
            TrackedWord {
                initial_rank,
                ranks: (0..config.steps).map(|t| run.ranks.rank(word, t)).collect(),
            }
        })
        .collect();
    let corpus: Vec<f64> = (0..config.steps)
        .map(|t| run.frequencies.column_total(t) as f64)
        .collect();
    serde_json::to_string(&SimulatePayload { corpus, tracked }).map_err(|e| e.to_string())
}

/// One seeded drift run: corpus sizes plus rank trajectories of tracked words.
#[wasm_bindgen]
pub fn simulate_json(
    alpha: f64,
    beta: f64,
    vocab: u32,
    zipf_a: f64,
    steps: u32,
    seed: u32,
) -> Result<String, JsValue> {
    simulate_payload(alpha, beta, vocab, zipf_a, steps, seed).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct RboPayload {
    lag1: Vec<f64>,
    lag_k: Vec<f64>,
    lag: u32,
    from_initial: Vec<f64>,
}

fn rbo_payload(
    alpha: f64,
    beta: f64,
    vocab: u32,
    zipf_a: f64,
    steps: u32,
    seed: u32,
    lag: u32,
) -> Result<String, String> {
    let config = config(alpha, beta, vocab, zipf_a, steps, seed)?;
    let run = simulate(&config, 0).map_err(|e| e.to_string())?;
    let rl = ranked_list(&run.ranks).map_err(|e| e.to_string())?;
    let params = RboParams::default();
    let curve = |mode| rbo_curves(&rl, mode, &params).map_err(|e| e.to_string());
    let payload = RboPayload {
        lag1: curve(RboMode::Lag(1))?,
        lag_k: if (lag as usize) < config.steps && lag > 0 {
            curve(RboMode::Lag(lag as usize))?
        } else {
            Vec::new()
        },
        lag,
        from_initial: curve(RboMode::FromInitial)?,
    };
    serde_json::to_string(&payload).map_err(|e| e.to_string())
}

/// RBO similarity curves of one seeded drift run.
#[wasm_bindgen]
pub fn rbo_json(
    alpha: f64,
    beta: f64,
    vocab: u32,
    zipf_a: f64,
    steps: u32,
    seed: u32,
    lag: u32,
) -> Result<String, JsValue> {
    rbo_payload(alpha, beta, vocab, zipf_a, steps, seed, lag).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_payload_round_trips() {
        let json = potential_payload(1.0, 20, 1000.0).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["mu"].as_array().unwrap().len(), 20);
        assert_eq!(value["net"].as_array().unwrap().len(), 20);
        assert!(potential_payload(1.0, 20, 5.0).is_err());
        assert!(potential_payload(1.0, 20, 1000.5).is_err());
    }

    #[test]
    fn simulate_payload_tracks_requested_ranks() {
        let json = simulate_payload(0.01, 5000.0, 200, 1.0, 12, 7).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let tracked = value["tracked"].as_array().unwrap();
        let initial: Vec<u64> = tracked
            .iter()
            .map(|t| t["initial_rank"].as_u64().unwrap())
            .collect();
        assert_eq!(initial, vec![1, 10, 100, 200]);
        assert_eq!(value["corpus"].as_array().unwrap().len(), 12);
        for t in tracked {
            assert_eq!(t["ranks"].as_array().unwrap().len(), 12);
        }
    }

    #[test]
    fn rbo_payload_has_all_three_curves() {
        let json = rbo_payload(0.0, 2000.0, 100, 1.0, 15, 3, 5).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["lag1"].as_array().unwrap().len(), 14);
        assert_eq!(value["lag_k"].as_array().unwrap().len(), 10);
        assert_eq!(value["from_initial"].as_array().unwrap().len(), 15);
        assert_eq!(value["from_initial"][0].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn identical_seeds_give_identical_payloads() {
        let a = simulate_payload(0.02, 3000.0, 50, 1.0, 10, 42).unwrap();
        let b = simulate_payload(0.02, 3000.0, 50, 1.0, 10, 42).unwrap();
        assert_eq!(a, b);
    }
}
