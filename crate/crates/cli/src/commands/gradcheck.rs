//! `grad-check`: finite-difference verification of every loss family.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use trefree_core::gradcheck;

use crate::report::{self, GradCheckReport};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct GradArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random nets per loss family
    #[arg(long, default_value_t = 10)]
    pub nets: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: GradArgs) -> Result<u8> {
    if args.nets == 0 {
        return Err(UsageError::new("--nets must be at least 1"));
    }
    let families = gradcheck::run(args.seed, args.nets)?;
    let passed = families.iter().all(|f| f.passed);
    for f in &families {
        println!(
            "{:11} {}  max rel err {:.3e}  ({} params over {} nets, clipped-zero {})",
            f.family,
            if f.passed { "ok " } else { "FAIL" },
            f.max_rel_err,
            f.params_checked,
            f.nets_checked,
            if f.clipped_zero_exact { "exact" } else { "VIOLATED" },
        );
    }
    let doc = GradCheckReport {
        command: "grad-check".to_string(),
        version: report::version(),
        seed: args.seed,
        nets: args.nets,
        families,
        passed,
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let path = args.out_dir.join("report.json");
    report::write_json(&doc, &path)?;
    println!("report: {}", path.display());
    Ok(if passed { 0 } else { 1 })
}
