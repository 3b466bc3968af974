//! The outer training loop: collect rollouts from N actors under the
//! frozen policy, estimate advantages, optimize the configured objective
//! for K epochs of shuffled minibatches (or one constrained TRPO step),
//! decay the learning rate linearly, swap the policy, repeat.

mod gae;
mod rollout;
mod stats;

pub use gae::{compute_gae, normalize_advantages};
pub use rollout::{Collector, RolloutBatch, OBS_CLIP};
pub use stats::RunningStats;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::envs::make_env;
use crate::error::{invalid, CoreError, Result};
use crate::nn::{adam_step, AdamState, PolicyNet, DEFAULT_HIDDEN};
use crate::objectives::{
    mean_kl, ratio_stats, total_loss, trpo_step, value_loss, Minibatch, ObjectiveKind,
    ObjectiveSpec, RatioStats, TrpoConfig, TrpoReport,
};
use crate::rng;

/// Everything one run needs. Defaults are desk-scale: 4 actors of 256
/// steps, 10 epochs of 64-sample minibatches, GAE(0.99, 0.95), learning
/// rate annealed 3e-4 to 0. The objective-conservative update moves the
/// policy by at most about its margin per iteration, so the batch is kept
/// small in favor of more iterations per environment step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub env_name: String,
    pub total_steps: usize,
    pub n_actors: usize,
    pub steps_per_actor: usize,
    /// Optimization epochs per iteration (K).
    pub epochs: usize,
    /// Minibatch size (M).
    pub minibatch_size: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub lr_start: f64,
    pub lr_end: f64,
    pub objective: ObjectiveSpec,
    pub seed: u64,
    pub normalize_obs: bool,
    pub normalize_rew: bool,
    pub normalize_adv: bool,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            env_name: String::from("pointmass"),
            total_steps: 200_000,
            n_actors: 4,
            steps_per_actor: 256,
            epochs: 10,
            minibatch_size: 64,
            gamma: 0.99,
            gae_lambda: 0.95,
            lr_start: 3e-4,
            lr_end: 0.0,
            objective: ObjectiveSpec::default(),
            seed: 0,
            normalize_obs: true,
            normalize_rew: true,
            normalize_adv: true,
            hidden_dim: DEFAULT_HIDDEN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        if self.n_actors == 0 || self.steps_per_actor == 0 {
            return Err(invalid("TrainConfig: need at least one actor and one step"));
        }
        if self.total_steps < self.n_actors * self.steps_per_actor {
            return Err(invalid("TrainConfig: total_steps smaller than one batch"));
        }
        if self.minibatch_size == 0 || self.minibatch_size > self.n_actors * self.steps_per_actor {
            return Err(invalid("TrainConfig: minibatch_size must fit in one batch"));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(invalid("TrainConfig: gae_lambda must be in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid("TrainConfig: gamma must be in [0, 1)"));
        }
        if self.hidden_dim == 0 {
            return Err(invalid("TrainConfig: hidden_dim must be positive"));
        }
        Ok(())
    }

    /// Steps collected per iteration.
    pub fn batch_steps(&self) -> usize {
        self.n_actors * self.steps_per_actor
    }
}

/// Linear interpolation `lr_start -> lr_end` over total steps.
pub fn lr_at(config: &TrainConfig, steps_done: usize) -> f64 {
    let f = (steps_done as f64 / config.total_steps as f64).clamp(0.0, 1.0);
    config.lr_start * (1.0 - f) + config.lr_end * f
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Cumulative environment steps after this iteration.
    pub steps: usize,
    /// Mean/std of raw episodic returns completed during this iteration
    /// (NaN when no episode finished).
    pub return_mean: f64,
    pub return_std: f64,
    pub episodes: usize,
    /// Mean maximized policy objective across this iteration's minibatch
    /// evaluations (the TRPO surrogate improvement for trpo runs).
    pub objective: f64,
    pub ratio: RatioStats,
    /// Mean KL from the collection-time distributions to the post-update
    /// policy over the full batch.
    pub kl: f64,
    pub lr: f64,
    /// Largest clipped per-sample policy objective term seen this
    /// iteration; stays at or below delta for TREFree by construction.
    pub max_policy_term: f64,
    pub trpo: Option<TrpoReport>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub iterations: Vec<IterationMetrics>,
}

impl TrainingLog {
    /// Mean return over the last `n` iterations that completed episodes.
    pub fn recent_return_mean(&self, n: usize) -> f64 {
        let rows: Vec<f64> = self
            .iterations
            .iter()
            .rev()
            .take(n)
            .map(|m| m.return_mean)
            .filter(|r| r.is_finite())
            .collect();
        if rows.is_empty() {
            return f64::NAN;
        }
        rows.iter().sum::<f64>() / rows.len() as f64
    }

    /// Largest |log ratio| logged across the run.
    pub fn max_abs_log_ratio(&self) -> f64 {
        self.iterations
            .iter()
            .map(|m| m.ratio.min_log_ratio.abs().max(m.ratio.max_log_ratio.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest clipped per-sample policy term across the run.
    pub fn max_policy_term(&self) -> f64 {
        self.iterations
            .iter()
            .map(|m| m.max_policy_term)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub log: TrainingLog,
    pub net: PolicyNet,
}

/// Run the full loop. `on_iteration` fires after every iteration with the
/// freshly logged row, so callers keep a partial log even if a later
/// iteration aborts numerically (the abort error names the iteration).
pub fn train(
    config: &TrainConfig,
    mut on_iteration: impl FnMut(&IterationMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    let envs: Result<Vec<_>> = (0..config.n_actors)
        .map(|i| make_env(&config.env_name, rng::seed_stream(config.seed, rng::STREAM_ACTOR_BASE + i as u64)))
        .collect();
    let envs = envs?;
    let spec = envs[0].spec();
    let mut net = PolicyNet::init(
        spec.obs_dim,
        spec.act_dim,
        config.hidden_dim,
        &mut rng::rng_for(config.seed, rng::STREAM_NET_INIT),
    );
    let mut collector = Collector::new(envs, config.gamma, config.normalize_obs, config.normalize_rew);
    let mut action_rng = rng::rng_for(config.seed, rng::STREAM_ACTION);
    let mut shuffle_rng = rng::rng_for(config.seed, rng::STREAM_SHUFFLE);
    let mut adam = AdamState::new(net.dims());
    let mut log = TrainingLog::default();

    let mut steps_done = 0usize;
    let mut iteration = 0usize;
    while steps_done < config.total_steps {
        let lr = lr_at(config, steps_done);
        let metrics = run_iteration(
            config,
            &mut net,
            &mut collector,
            &mut adam,
            &mut action_rng,
            &mut shuffle_rng,
            iteration,
            steps_done,
            lr,
        )
        .map_err(|e| CoreError::Numeric(format!("iteration {iteration}: {e}")))?;
        steps_done += config.batch_steps();
        on_iteration(&metrics);
        log.iterations.push(metrics);
        iteration += 1;
    }
    Ok(TrainOutcome { log, net })
}

#[allow(clippy::too_many_arguments)]
fn run_iteration(
    config: &TrainConfig,
    net: &mut PolicyNet,
    collector: &mut Collector,
    adam: &mut AdamState,
    action_rng: &mut rand_chacha::ChaCha8Rng,
    shuffle_rng: &mut rand_chacha::ChaCha8Rng,
    iteration: usize,
    steps_done: usize,
    lr: f64,
) -> Result<IterationMetrics> {
    let mut batch = collector.collect(net, config.steps_per_actor, action_rng)?;

    // Advantage estimation per actor segment, on normalized rewards.
    let mut advantages = Vec::with_capacity(batch.len());
    let mut returns = Vec::with_capacity(batch.len());
    for actor in 0..batch.n_actors {
        let r = batch.actor_range(actor);
        let (adv, ret) = compute_gae(
            &batch.rewards_norm[r.clone()],
            &batch.values[r.clone()],
            &batch.next_values[r.clone()],
            &batch.dones[r.clone()],
            &batch.truncateds[r.clone()],
            config.gamma,
            config.gae_lambda,
        )?;
        advantages.extend(adv);
        returns.extend(ret);
    }
    batch.advantages = if config.normalize_adv {
        normalize_advantages(&advantages)?
    } else {
        advantages
    };
    batch.returns = returns;

    let full = batch.as_minibatch();
    let (objective, max_policy_term, trpo_report) =
        if config.objective.kind == ObjectiveKind::Trpo {
            let trpo_cfg = TrpoConfig { max_kl: config.objective.trpo_kl, ..TrpoConfig::default() };
            let report = trpo_step(net, &full, &trpo_cfg)?;
            // The KL-constrained step sizes itself; only the critic uses the
            // Adam path, at the fixed starting rate.
            run_epochs(net, &full, config, adam, shuffle_rng, config.lr_start, |net, mb| {
                value_loss(net, mb)
            })?;
            (report.improvement, f64::NEG_INFINITY, Some(report))
        } else {
            let spec = &config.objective;
            let (acc, n, max_term) =
                run_epochs(net, &full, config, adam, shuffle_rng, lr, |net, mb| {
                    total_loss(net, mb, spec)
                })?;
            (if n > 0 { acc / n as f64 } else { 0.0 }, max_term, None)
        };

    let ratio = ratio_stats(net, &full)?;
    let kl = mean_kl(net, &full)?;
    let (return_mean, return_std) = mean_std(&batch.episode_returns);

    Ok(IterationMetrics {
        iteration,
        steps: steps_done + config.batch_steps(),
        return_mean,
        return_std,
        episodes: batch.episode_returns.len(),
        objective,
        ratio,
        kl,
        lr,
        max_policy_term,
        trpo: trpo_report,
    })
}

/// K epochs of shuffled minibatches; returns the accumulated objective,
/// evaluation count and max per-sample policy term.
fn run_epochs(
    net: &mut PolicyNet,
    full: &Minibatch,
    config: &TrainConfig,
    adam: &mut AdamState,
    shuffle_rng: &mut rand_chacha::ChaCha8Rng,
    lr: f64,
    mut loss_fn: impl FnMut(&PolicyNet, &Minibatch) -> Result<crate::objectives::LossEval>,
) -> Result<(f64, usize, f64)> {
    let mut objective_acc = 0.0;
    let mut objective_n = 0usize;
    let mut max_term = f64::NEG_INFINITY;
    let total = full.len();
    let mut indices: Vec<usize> = (0..total).collect();
    for _ in 0..config.epochs {
        indices.shuffle(shuffle_rng);
        for chunk in indices.chunks(config.minibatch_size) {
            if chunk.len() < config.minibatch_size {
                // Keep minibatch shapes uniform; the shuffle rotates which
                // samples land in the dropped remainder across epochs.
                continue;
            }
            let mb = full.select(chunk);
            let eval = loss_fn(net, &mb)?;
            adam_step(net, &eval.grads, adam, lr)?;
            objective_acc += eval.policy_objective;
            objective_n += 1;
            max_term = max_term.max(eval.max_policy_term);
        }
    }
    Ok((objective_acc, objective_n, max_term))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
