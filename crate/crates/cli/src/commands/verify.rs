//! `verify-bounds`: randomized machine verification of the improvement
//! bounds and the performance-difference identity.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rand::Rng;
use trefree_core::rng::{rng_for, STREAM_VERIFY};
use trefree_core::tabular::{
    self, check_theorem1, check_theorem2, performance_difference, solve_value,
    state_action_fn_from_f, BoundReport, MdpRepr, TabularPolicy, BOUND_TOL,
    CALIBRATED_G_NORMALIZED,
};

use crate::report::{self, CheckSummary, VerifyParams, VerifyReport, Violation};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of randomized instances
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discount factor of the generated MDPs
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// Largest state count (inclusive)
    #[arg(long, default_value_t = 5)]
    pub max_states: usize,
    /// Largest action count (inclusive)
    #[arg(long, default_value_t = 3)]
    pub max_actions: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn policy_rows(pi: &TabularPolicy) -> Vec<Vec<f64>> {
    (0..pi.n_states()).map(|s| pi.row(s).to_vec()).collect()
}

pub fn run(args: VerifyArgs) -> Result<u8> {
    if args.count < 1 {
        return Err(UsageError::new("--count must be at least 1"));
    }
    if !(0.0..1.0).contains(&args.gamma) {
        return Err(UsageError::new(format!(
            "--gamma {} is not in [0, 1)",
            args.gamma
        )));
    }
    if args.max_states < 2 || args.max_actions < 2 {
        return Err(UsageError::new("--max-states and --max-actions must be at least 2"));
    }

    let mut rng = rng_for(args.seed, STREAM_VERIFY);
    let mut th1 = CheckSummary { checked: 0, violations: 0, worst: f64::INFINITY };
    let mut th2 = CheckSummary { checked: 0, violations: 0, worst: f64::INFINITY };
    let mut prop1 = CheckSummary { checked: 0, violations: 0, worst: 0.0 };
    let mut violations = Vec::new();

    for instance in 0..args.count {
        let n = rng.gen_range(2..=args.max_states);
        let m = rng.gen_range(2..=args.max_actions);
        let mdp = tabular::random::mdp(&mut rng, n, m, args.gamma);
        let pi_old = tabular::random::policy(&mut rng, n, m);
        let pi_new = tabular::random::policy(&mut rng, n, m);
        let f = tabular::random::state_fn(&mut rng, n, 2.0);
        let saf = state_action_fn_from_f(&mdp, &f)?;

        let mut record = |kind: &str, report: Option<BoundReport>, gap: Option<f64>| {
            violations.push(Violation {
                kind: kind.to_string(),
                instance,
                report,
                identity_gap: gap,
                mdp: MdpRepr::from(mdp.clone()),
                pi_old: policy_rows(&pi_old),
                pi_new: policy_rows(&pi_new),
                f: f.clone(),
            });
        };

        let r2 = check_theorem2(&mdp, &pi_new, &pi_old, &saf, CALIBRATED_G_NORMALIZED)?;
        th2.checked += 1;
        th2.worst = th2.worst.min(r2.slack());
        if !r2.holds {
            th2.violations += 1;
            record("theorem2", Some(r2), None);
        }

        let r1 = check_theorem1(&mdp, &pi_new, &pi_old)?;
        th1.checked += 1;
        th1.worst = th1.worst.min(r1.slack());
        if !r1.holds {
            th1.violations += 1;
            record("theorem1", Some(r1), None);
        }

        // Identity check alternates the generalized f with f = V_old.
        let saf_for_identity = if instance % 10 == 0 {
            saf.clone()
        } else {
            state_action_fn_from_f(&mdp, &solve_value(&mdp, &pi_old)?)?
        };
        let (lhs, rhs) = performance_difference(&mdp, &pi_new, &pi_old, &saf_for_identity)?;
        let gap = (lhs - rhs).abs();
        prop1.checked += 1;
        prop1.worst = prop1.worst.max(gap);
        if gap > BOUND_TOL {
            prop1.violations += 1;
            record("proposition1", None, Some(gap));
        }
    }

    let passed = th1.violations == 0 && th2.violations == 0 && prop1.violations == 0;
    let doc = VerifyReport {
        command: "verify-bounds".to_string(),
        version: report::version(),
        params: VerifyParams {
            count: args.count,
            seed: args.seed,
            gamma: args.gamma,
            max_states: args.max_states,
            max_actions: args.max_actions,
        },
        theorem1: th1,
        theorem2: th2,
        proposition1: prop1,
        violations,
        passed,
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let path = args.out_dir.join("report.json");
    report::write_json(&doc, &path)?;

    println!(
        "theorem1: {}/{} ok (min slack {:.3e})",
        doc.theorem1.checked - doc.theorem1.violations,
        doc.theorem1.checked,
        doc.theorem1.worst
    );
    println!(
        "theorem2: {}/{} ok (min slack {:.3e})",
        doc.theorem2.checked - doc.theorem2.violations,
        doc.theorem2.checked,
        doc.theorem2.worst
    );
    println!(
        "proposition1: {}/{} ok (max gap {:.3e})",
        doc.proposition1.checked - doc.proposition1.violations,
        doc.proposition1.checked,
        doc.proposition1.worst
    );
    println!("report: {}", path.display());
    Ok(if passed { 0 } else { 1 })
}
