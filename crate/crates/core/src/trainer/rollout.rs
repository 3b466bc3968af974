//! Rollout collection under a frozen policy.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::envs::Env;
use crate::error::{CoreError, Result};
use crate::nn::PolicyNet;
use crate::objectives::Minibatch;

use super::stats::RunningStats;

/// Post-normalization observation clip, guarding against outliers early in
/// training when the running variance is still poorly estimated.
pub const OBS_CLIP: f64 = 10.0;

/// Flattened per-step arrays across all actors, actor-major: actor `i`
/// owns rows `[i * steps_per_actor, (i+1) * steps_per_actor)`.
#[derive(Debug, Clone, Default)]
pub struct RolloutBatch {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub steps_per_actor: usize,
    pub n_actors: usize,
    /// Observations as the policy saw them (normalized and clipped).
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards_norm: Vec<f64>,
    pub rewards_raw: Vec<f64>,
    pub dones: Vec<bool>,
    pub truncateds: Vec<bool>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Critic estimate of the observation following each step (pre-reset at
    /// truncation boundaries); the GAE bootstrap.
    pub next_values: Vec<f64>,
    pub old_means: Vec<f64>,
    pub old_stds: Vec<f64>,
    /// Filled by the trainer after advantage estimation.
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Raw (unnormalized) returns of episodes completed during collection.
    pub episode_returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.rewards_raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn actor_range(&self, actor: usize) -> core::ops::Range<usize> {
        actor * self.steps_per_actor..(actor + 1) * self.steps_per_actor
    }

    /// View as an optimization batch. Advantages must have been filled.
    pub fn as_minibatch(&self) -> Minibatch {
        Minibatch {
            obs_dim: self.obs_dim,
            act_dim: self.act_dim,
            obs: self.obs.clone(),
            actions: self.actions.clone(),
            old_log_probs: self.log_probs.clone(),
            advantages: self.advantages.clone(),
            returns: self.returns.clone(),
            old_means: self.old_means.clone(),
            old_stds: self.old_stds.clone(),
        }
    }
}

struct ActorState {
    env: Box<dyn Env>,
    raw_obs: Vec<f64>,
    /// Running discounted raw return, the normalizer's target statistic.
    ret_carry: f64,
    episode_return: f64,
}

/// Owns the actor environments and the running normalization state across
/// iterations.
pub struct Collector {
    actors: Vec<ActorState>,
    pub obs_stats: RunningStats,
    pub ret_stats: RunningStats,
    gamma: f64,
    normalize_obs: bool,
    normalize_rew: bool,
}

impl Collector {
    pub fn new(
        mut envs: Vec<Box<dyn Env>>,
        gamma: f64,
        normalize_obs: bool,
        normalize_rew: bool,
    ) -> Self {
        let obs_dim = envs.first().map(|e| e.spec().obs_dim).unwrap_or(0);
        let actors = envs
            .drain(..)
            .map(|mut env| {
                let raw_obs = env.reset();
                ActorState { env, raw_obs, ret_carry: 0.0, episode_return: 0.0 }
            })
            .collect();
        Collector {
            actors,
            obs_stats: RunningStats::new(obs_dim),
            ret_stats: RunningStats::new(1),
            gamma,
            normalize_obs,
            normalize_rew,
        }
    }

    pub fn n_actors(&self) -> usize {
        self.actors.len()
    }

    fn normalize_obs_vec(&mut self, raw: &[f64], update: bool) -> Vec<f64> {
        if !self.normalize_obs {
            return raw.to_vec();
        }
        if update {
            self.obs_stats.push(raw);
        }
        let mean = self.obs_stats.mean().to_vec();
        let std = self.obs_stats.normalization_std();
        raw.iter()
            .zip(mean.iter().zip(&std))
            .map(|(x, (m, s))| ((x - m) / s).clamp(-OBS_CLIP, OBS_CLIP))
            .collect()
    }

    /// Run every actor `steps_per_actor` steps under the frozen `net`.
    /// Observations are normalized by the running stats (updated per
    /// timestep) then clipped; rewards are scaled by the running std of the
    /// discounted return. Log-probs, values and distribution parameters are
    /// recorded at collection time.
    pub fn collect<R: Rng>(
        &mut self,
        net: &PolicyNet,
        steps_per_actor: usize,
        rng: &mut R,
    ) -> Result<RolloutBatch> {
        let n_actors = self.actors.len();
        let obs_dim = net.dims().obs_dim;
        let act_dim = net.dims().act_dim;
        let total = n_actors * steps_per_actor;
        let mut batch = RolloutBatch {
            obs_dim,
            act_dim,
            steps_per_actor,
            n_actors,
            obs: Vec::with_capacity(total * obs_dim),
            actions: Vec::with_capacity(total * act_dim),
            rewards_norm: Vec::with_capacity(total),
            rewards_raw: Vec::with_capacity(total),
            dones: Vec::with_capacity(total),
            truncateds: Vec::with_capacity(total),
            log_probs: Vec::with_capacity(total),
            values: Vec::with_capacity(total),
            next_values: vec![0.0; total],
            old_means: Vec::with_capacity(total * act_dim),
            old_stds: Vec::with_capacity(total * act_dim),
            ..RolloutBatch::default()
        };

        for actor_idx in 0..n_actors {
            for step in 0..steps_per_actor {
                let row = actor_idx * steps_per_actor + step;
                let raw_obs = self.actors[actor_idx].raw_obs.clone();
                let norm_obs = self.normalize_obs_vec(&raw_obs, true);
                let trace = net.forward(&norm_obs).map_err(|e| {
                    CoreError::Numeric(format!("actor {actor_idx} step {step}: {e}"))
                })?;
                let dist = net.dist_from_trace(&trace);
                let action = dist.sample(rng);
                let log_prob = dist.log_prob(&action)?;

                let result = {
                    let actor = &mut self.actors[actor_idx];
                    actor.env.step(&action).map_err(|e| {
                        CoreError::Numeric(format!("actor {actor_idx} step {step}: {e}"))
                    })?
                };

                // Reward normalization tracks the discounted raw return.
                let mut reward_norm = result.reward;
                if self.normalize_rew {
                    let carry = self.gamma * self.actors[actor_idx].ret_carry + result.reward;
                    self.actors[actor_idx].ret_carry = carry;
                    self.ret_stats.push_scalar(carry);
                    reward_norm = result.reward / self.ret_stats.normalization_std()[0];
                }

                batch.obs.extend_from_slice(&norm_obs);
                batch.actions.extend_from_slice(&action);
                batch.rewards_raw.push(result.reward);
                batch.rewards_norm.push(reward_norm);
                batch.dones.push(result.done);
                batch.truncateds.push(result.truncated);
                batch.log_probs.push(log_prob);
                batch.values.push(trace.value);
                batch.old_means.extend_from_slice(&dist.mean);
                batch.old_stds.extend_from_slice(&dist.std);

                self.actors[actor_idx].episode_return += result.reward;
                let boundary = result.done || result.truncated;
                if boundary {
                    let ep = self.actors[actor_idx].episode_return;
                    batch.episode_returns.push(ep);
                    self.actors[actor_idx].episode_return = 0.0;
                    self.actors[actor_idx].ret_carry = 0.0;
                }

                // Bootstrap value for GAE. Within an episode this is the
                // next row's value (filled below); at a truncation or
                // segment boundary it comes from an extra critic pass on
                // the successor observation (stats left untouched).
                if result.truncated || (step == steps_per_actor - 1 && !result.done) {
                    let norm_next = self.normalize_obs_vec(&result.next_obs, false);
                    batch.next_values[row] = net.forward_value(&norm_next)?;
                }

                if boundary {
                    let next = self.actors[actor_idx].env.reset();
                    self.actors[actor_idx].raw_obs = next;
                } else {
                    self.actors[actor_idx].raw_obs = result.next_obs;
                }
            }
            // In-episode bootstrap values: next row's critic estimate.
            for step in 0..steps_per_actor - 1 {
                let row = actor_idx * steps_per_actor + step;
                if !batch.dones[row] && !batch.truncateds[row] {
                    batch.next_values[row] = batch.values[row + 1];
                }
            }
        }
        Ok(batch)
    }
}
