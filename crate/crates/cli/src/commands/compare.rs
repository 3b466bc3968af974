//! `compare`: run several objectives on shared seeds and tabulate final
//! returns and ratio ranges.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use trefree_core::objectives::ObjectiveKind;

use crate::config::{FullOverrides, Overrides};
use crate::commands::train::{parse_seed_list, run_to_dir};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated objective list (at least two entries)
    #[arg(long)]
    pub objectives: String,
    /// Comma-separated seeds shared by every objective
    #[arg(long, default_value = "0,1,2")]
    pub seeds: String,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

struct ObjectiveRow {
    name: String,
    final_return_mean: f64,
    final_return_std: f64,
    min_log_ratio: f64,
    max_log_ratio: f64,
}

pub fn run(args: CompareArgs) -> Result<u8> {
    let names: Vec<String> = args
        .objectives
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.len() < 2 {
        return Err(UsageError::new("--objectives needs at least two entries"));
    }
    for name in &names {
        ObjectiveKind::parse(name).map_err(|e| UsageError::new(e.to_string()))?;
    }
    let seeds = parse_seed_list(&args.seeds)?;
    if seeds.is_empty() {
        return Err(UsageError::new("--seeds needs at least one entry"));
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let mut failures = 0u32;
    let mut rows = Vec::new();
    for name in &names {
        let mut finals = Vec::new();
        let mut min_lr = f64::INFINITY;
        let mut max_lr = f64::NEG_INFINITY;
        for &seed in &seeds {
            let over = FullOverrides {
                objective: Some(name.clone()),
                base: Overrides { seed: Some(seed), ..args.overrides.clone() },
            };
            let config = over.build()?;
            let run_dir = args.out_dir.join(format!("{name}-s{seed}"));
            println!("== {name} seed {seed} -> {}", run_dir.display());
            let (code, run_rows, summary) = run_to_dir(&config, &run_dir, false)
                .with_context(|| format!("running {name} seed {seed}"))?;
            if code != 0 {
                failures += 1;
            }
            finals.push(summary.final_return_mean_last10);
            for m in &run_rows {
                min_lr = min_lr.min(m.ratio.min_log_ratio);
                max_lr = max_lr.max(m.ratio.max_log_ratio);
            }
        }
        let n = finals.len() as f64;
        let mean = finals.iter().sum::<f64>() / n;
        let var = finals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        rows.push(ObjectiveRow {
            name: name.clone(),
            final_return_mean: mean,
            final_return_std: var.sqrt(),
            min_log_ratio: min_lr,
            max_log_ratio: max_lr,
        });
    }

    let mut csv = String::from(
        "objective,final_return_mean,final_return_std,min_log_ratio,max_log_ratio\n",
    );
    println!("\nobjective     final return (mean +- std)   log-ratio range");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.name,
            row.final_return_mean,
            row.final_return_std,
            row.min_log_ratio,
            row.max_log_ratio
        ));
        println!(
            "{:12}  {:10.2} +- {:8.2}        [{:+.4}, {:+.4}]",
            row.name,
            row.final_return_mean,
            row.final_return_std,
            row.min_log_ratio,
            row.max_log_ratio
        );
    }
    let path = args.out_dir.join("compare.csv");
    std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    println!("summary: {}", path.display());
    Ok(if failures == 0 { 0 } else { 1 })
}
