//! Desk-scale benchmark environments with a uniform episodic interface.
//!
//! Two analytic continuous-control tasks (a damped 2-D point mass and the
//! classic torque-limited pendulum swing-up) plus a discrete chain task
//! that exports its exact MDP, bridging sampled training to the tabular
//! analytics. Episodes never terminate early here; hitting the horizon
//! reports `truncated`, which the advantage estimator bootstraps.

mod chain;
mod pendulum;
mod pointmass;

pub use chain::{chain_env, ChainEnv};
pub use pendulum::PendulumEnv;
pub use pointmass::PointMassEnv;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Static description of an environment's interface.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub max_episode_steps: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
}

/// One transition. `done` marks a terminal state, `truncated` a horizon
/// cutoff; they are mutually exclusive by construction here.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
}

pub trait Env {
    fn spec(&self) -> EnvSpec;
    /// Start a new episode and return its first observation.
    fn reset(&mut self) -> Vec<f64>;
    /// Advance one step. Out-of-bounds actions are clipped and counted.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
    /// How many actions have been clipped to the bounds so far.
    fn clipped_action_count(&self) -> u64 {
        0
    }
}

/// Instantiate an environment by name: `pointmass`, `pendulum`, `chain`
/// (5 states) or `chain:<n>`.
pub fn make_env(name: &str, seed: u64) -> Result<Box<dyn Env>> {
    if let Some(n) = name.strip_prefix("chain:") {
        let n: usize = n
            .parse()
            .map_err(|_| invalid(format!("bad chain size in env name '{name}'")))?;
        return Ok(Box::new(chain_env(n)?.0));
    }
    match name {
        "pointmass" => Ok(Box::new(PointMassEnv::new(seed))),
        "pendulum" => Ok(Box::new(PendulumEnv::new(seed))),
        "chain" => Ok(Box::new(chain_env(5)?.0)),
        other => Err(invalid(format!(
            "unknown environment '{other}' (expected pointmass|pendulum|chain[:n])"
        ))),
    }
}

/// Clip `action` into `[low, high]` elementwise; returns the clipped action
/// and whether anything moved.
pub(crate) fn clip_action(action: &[f64], low: &[f64], high: &[f64]) -> (Vec<f64>, bool) {
    let mut clipped = false;
    let out = action
        .iter()
        .zip(low.iter().zip(high))
        .map(|(&a, (&lo, &hi))| {
            let c = a.clamp(lo, hi);
            if c != a {
                clipped = true;
            }
            c
        })
        .collect();
    (out, clipped)
}
