//! Deterministic n-state chain with an exact MDP export.
//!
//! Two actions move left or right along the chain; being in the rightmost
//! state pays 1 per step (it is "terminal-like": absorbing reward, no
//! episode termination). Observations are one-hot. The same dynamics are
//! exported as an [`Mdp`] so a policy trained from samples can be evaluated
//! in closed form.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::nn::PolicyNet;
use crate::tabular::{Mdp, TabularPolicy};

use super::{Env, EnvSpec, StepResult};

const HORIZON: usize = 200;
/// Discount of the exported MDP; sampled returns use the same value so the
/// Monte-Carlo cross-check is apples to apples. The horizon tail bias
/// (gamma^200 / (1-gamma)) is far below sampling noise.
pub const CHAIN_GAMMA: f64 = 0.9;

/// The chain maps a 1-D continuous action to its sign: nonnegative moves
/// right, negative moves left.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    n: usize,
    state: usize,
    steps: usize,
}

/// Build the chain environment together with its exact MDP (`n >= 2`).
pub fn chain_env(n: usize) -> Result<(ChainEnv, Mdp)> {
    if n < 2 {
        return Err(invalid("chain_env: need at least 2 states"));
    }
    let env = ChainEnv { n, state: 0, steps: 0 };
    let mdp = env.mdp();
    Ok((env, mdp))
}

impl ChainEnv {
    pub fn n_states(&self) -> usize {
        self.n
    }

    /// The exact MDP: action 0 = left, action 1 = right, start in state 0,
    /// reward 1 for occupying the rightmost state.
    pub fn mdp(&self) -> Mdp {
        let n = self.n;
        let mut transition = vec![0.0; n * 2 * n];
        let mut reward = vec![0.0; n * 2];
        for s in 0..n {
            let left = s.saturating_sub(1);
            let right = (s + 1).min(n - 1);
            transition[(s * 2) * n + left] = 1.0;
            transition[(s * 2 + 1) * n + right] = 1.0;
            if s == n - 1 {
                reward[s * 2] = 1.0;
                reward[s * 2 + 1] = 1.0;
            }
        }
        let mut d0 = vec![0.0; n];
        d0[0] = 1.0;
        Mdp::new(n, 2, transition, reward, d0, CHAIN_GAMMA).expect("chain MDP is valid")
    }

    /// The tabular policy a Gaussian net induces through the sign mapping:
    /// `pi(right | s) = P(a >= 0) = Phi(mean(s) / std)`.
    pub fn policy_from_net(&self, net: &PolicyNet) -> Result<TabularPolicy> {
        let mut probs = vec![0.0; self.n * 2];
        for s in 0..self.n {
            let dist = net.forward_policy(&self.one_hot(s))?;
            let z = dist.mean[0] / dist.std[0];
            let p_right = 0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2));
            probs[s * 2] = 1.0 - p_right;
            probs[s * 2 + 1] = p_right;
        }
        TabularPolicy::new(self.n, 2, probs)
    }

    fn one_hot(&self, s: usize) -> Vec<f64> {
        let mut obs = vec![0.0; self.n];
        obs[s] = 1.0;
        obs
    }
}

impl Env for ChainEnv {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            obs_dim: self.n,
            act_dim: 1,
            max_episode_steps: HORIZON,
            action_low: vec![-1.0],
            action_high: vec![1.0],
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.state = 0;
        self.steps = 0;
        self.one_hot(0)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if action.len() != 1 {
            return Err(invalid("chain: action must be 1-D"));
        }
        let reward = if self.state == self.n - 1 { 1.0 } else { 0.0 };
        self.state = if action[0] >= 0.0 {
            (self.state + 1).min(self.n - 1)
        } else {
            self.state.saturating_sub(1)
        };
        self.steps += 1;
        Ok(StepResult {
            next_obs: self.one_hot(self.state),
            reward,
            done: false,
            truncated: self.steps >= HORIZON,
        })
    }
}
