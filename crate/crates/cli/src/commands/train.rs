//! `train`: one training run, with metrics, manifest and checkpoints
//! written to the output directory.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use trefree_core::trainer::{self, IterationMetrics, TrainConfig};

use crate::config::{FullOverrides, Overrides};
use crate::report::{self, Manifest, TrainResultSummary};
use crate::{checkpoint, UsageError};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Objective: pg|ppo|ratio-cons|trefree|trpo
    #[arg(long)]
    pub objective: Option<String>,
    /// Config file (flat key = value); CLI flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: TrainArgs) -> Result<u8> {
    let cli_overrides = FullOverrides { objective: args.objective, base: args.overrides };
    let merged = match &args.config {
        Some(path) => FullOverrides::from_file(path)?.merged_with(cli_overrides),
        None => cli_overrides,
    };
    let config = merged.build()?;
    std::fs::create_dir_all(&args.out_dir)?;
    let (code, _, _) = run_to_dir(&config, &args.out_dir, true)?;
    Ok(code)
}

/// Shared by `train` and `compare`. Returns (exit code, log rows, summary).
pub fn run_to_dir(
    config: &TrainConfig,
    out_dir: &Path,
    verbose: bool,
) -> Result<(u8, Vec<IterationMetrics>, TrainResultSummary)> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows: Vec<IterationMetrics> = Vec::new();
    let expected_iters = config.total_steps.div_ceil(config.batch_steps());
    let print_every = (expected_iters / 20).max(1);
    let outcome = trainer::train(config, |m| {
        if verbose && (m.iteration % print_every == 0 || m.steps >= config.total_steps) {
            println!(
                "it {:4}  steps {:7}  return {:9.2}  objective {:9.5}  kl {:.5}  lr {:.6}",
                m.iteration, m.steps, m.return_mean, m.objective, m.kl, m.lr
            );
        }
        rows.push(m.clone());
    });

    let (aborted, net) = match outcome {
        Ok(outcome) => (None, Some(outcome.net)),
        Err(err) => (Some(err.to_string()), None),
    };

    let log = trainer::TrainingLog { iterations: rows.clone() };
    let summary = TrainResultSummary {
        iterations: rows.len(),
        total_episodes: rows.iter().map(|m| m.episodes).sum(),
        final_return_mean_last10: log.recent_return_mean(10),
        max_abs_log_ratio: log.max_abs_log_ratio(),
        max_policy_term: log.max_policy_term(),
        aborted: aborted.clone(),
    };

    let metrics_path = out_dir.join("metrics.csv");
    report::write_metrics_csv(&rows, &metrics_path)?;
    let mut artifacts = vec!["metrics.csv".to_string(), "manifest.json".to_string()];
    if let Some(net) = &net {
        let bin_path = out_dir.join("policy.bin");
        checkpoint::save_binary(net, &bin_path)?;
        // The binary format promises bit-exact round trips; verify what we
        // just wrote before declaring the artifact good.
        if checkpoint::load_binary(&bin_path)?.flat_params() != net.flat_params() {
            anyhow::bail!("checkpoint verification failed for {}", bin_path.display());
        }
        let json_path = out_dir.join("policy.json");
        checkpoint::save_json(net, &json_path)?;
        if checkpoint::load_json(&json_path)?.flat_params() != net.flat_params() {
            anyhow::bail!("checkpoint verification failed for {}", json_path.display());
        }
        artifacts.push("policy.bin".to_string());
        artifacts.push("policy.json".to_string());
    }
    let manifest = Manifest {
        command: "train".to_string(),
        version: report::version(),
        seed: config.seed,
        config: config.clone(),
        artifacts: artifacts.clone(),
        result: summary,
    };
    report::write_json(&manifest, &out_dir.join("manifest.json"))?;

    if verbose {
        for name in &artifacts {
            println!("artifact: {}", out_dir.join(name).display());
        }
    }
    let summary = manifest.result;
    if let Some(msg) = aborted {
        eprintln!("run aborted: {msg}");
        return Ok((1, rows, summary));
    }
    Ok((0, rows, summary))
}

/// Validation used by compare as well.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let seeds: std::result::Result<Vec<u64>, _> =
        text.split(',').map(|s| s.trim().parse()).collect();
    seeds.map_err(|_| UsageError::new(format!("bad seed list '{text}'")))
}
