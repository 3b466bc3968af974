//! Policy-update objectives.
//!
//! Four ways to use the same minibatch of `(s, a, logpi_old, advantage)`
//! samples, differing only in how conservative they are about ratio
//! deviations `pi_new/pi_old - 1`:
//!
//! - [`pg_loss`]: no conservatism, the plain importance-weighted policy
//!   gradient surrogate.
//! - [`ratio_conservative_loss`]: clips the ratio deviation itself to
//!   `[-lambda, lambda]` before weighting by the advantage.
//! - [`ppo_clip_loss`]: the pessimistic min-of-clipped form with clip range
//!   `[1-eps, 1+eps]`, the usual experimental baseline.
//! - [`trefree_loss`]: clips the per-sample *objective* at `delta`, so any
//!   sample whose advantage-weighted deviation already exceeds the margin
//!   contributes no gradient.
//!
//! [`trpo_step`] performs the constrained natural-gradient update instead
//! of producing a loss. Every loss here is returned together with its exact
//! reverse-mode gradient; ratios are computed in log space and a log-ratio
//! above [`MAX_LOG_RATIO`] aborts with a numeric error naming the sample.

mod trpo;

pub use trpo::{
    fisher_vector_product, trpo_step, trpo_step_with_operator, TrpoConfig, TrpoOutcome, TrpoReport,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, CoreError, Result};
use crate::gaussian;
use crate::nn::{GradBuffer, NetDims, PolicyNet};

/// Hard abort threshold for `log(pi_new/pi_old)`; beyond this the run has
/// diverged and silently exponentiating would just produce inf.
pub const MAX_LOG_RATIO: f64 = 30.0;

/// Which policy-update objective to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ObjectiveKind {
    /// Non-conservative policy gradient.
    Pg,
    /// PPO with the Eq.-4-style pessimistic clipped surrogate.
    PpoClip,
    /// Ratio-deviation clipping, `clip(r - 1, -lambda, lambda) * A`.
    RatioConservative,
    /// Objective-conservative clipping at margin `delta` (TREFree).
    Trefree,
    /// Trust-region constrained natural gradient step.
    Trpo,
}

impl ObjectiveKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "pg" => Ok(ObjectiveKind::Pg),
            "ppo" => Ok(ObjectiveKind::PpoClip),
            "ratio-cons" => Ok(ObjectiveKind::RatioConservative),
            "trefree" => Ok(ObjectiveKind::Trefree),
            "trpo" => Ok(ObjectiveKind::Trpo),
            other => Err(invalid(format!(
                "unknown objective '{other}' (expected pg|ppo|ratio-cons|trefree|trpo)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Pg => "pg",
            ObjectiveKind::PpoClip => "ppo",
            ObjectiveKind::RatioConservative => "ratio-cons",
            ObjectiveKind::Trefree => "trefree",
            ObjectiveKind::Trpo => "trpo",
        }
    }
}

/// Hyperparameters of the objective family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// TREFree conservativeness margin.
    pub delta: f64,
    /// Ratio-deviation clip range.
    pub lambda: f64,
    /// PPO clip range.
    pub eps_clip: f64,
    /// TRPO trust region size (mean KL).
    pub trpo_kl: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::Trefree,
            delta: 0.01,
            lambda: 0.2,
            eps_clip: 0.2,
            trpo_kl: 0.01,
            value_coef: 0.5,
            entropy_coef: 0.0,
        }
    }
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(invalid("ObjectiveSpec: delta must be > 0"));
        }
        if !(self.lambda > 0.0) {
            return Err(invalid("ObjectiveSpec: lambda must be > 0"));
        }
        if !(self.eps_clip > 0.0 && self.eps_clip < 1.0) {
            return Err(invalid("ObjectiveSpec: eps_clip must be in (0, 1)"));
        }
        if !(self.trpo_kl > 0.0) {
            return Err(invalid("ObjectiveSpec: trpo_kl must be > 0"));
        }
        Ok(())
    }
}

/// A flattened batch of samples to optimize on. `old_*` fields are frozen
/// at collection time and never recomputed.
#[derive(Debug, Clone, Default)]
pub struct Minibatch {
    pub obs_dim: usize,
    pub act_dim: usize,
    /// `[M][obs_dim]`, row-major.
    pub obs: Vec<f64>,
    /// `[M][act_dim]`, row-major.
    pub actions: Vec<f64>,
    pub old_log_probs: Vec<f64>,
    /// Advantage estimates; normalized within the training batch upstream.
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Behavior-policy distribution parameters, `[M][act_dim]`; used by the
    /// TRPO step and KL diagnostics.
    pub old_means: Vec<f64>,
    pub old_stds: Vec<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.old_log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn obs_row(&self, i: usize) -> &[f64] {
        &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn action_row(&self, i: usize) -> &[f64] {
        &self.actions[i * self.act_dim..(i + 1) * self.act_dim]
    }

    pub fn old_mean_row(&self, i: usize) -> &[f64] {
        &self.old_means[i * self.act_dim..(i + 1) * self.act_dim]
    }

    pub fn old_std_row(&self, i: usize) -> &[f64] {
        &self.old_stds[i * self.act_dim..(i + 1) * self.act_dim]
    }

    /// Select rows by index, for minibatching out of a full batch.
    pub fn select(&self, idx: &[usize]) -> Minibatch {
        let mut out = Minibatch {
            obs_dim: self.obs_dim,
            act_dim: self.act_dim,
            ..Minibatch::default()
        };
        for &i in idx {
            out.obs.extend_from_slice(self.obs_row(i));
            out.actions.extend_from_slice(self.action_row(i));
            out.old_log_probs.push(self.old_log_probs[i]);
            out.advantages.push(self.advantages[i]);
            out.returns.push(self.returns[i]);
            out.old_means.extend_from_slice(self.old_mean_row(i));
            out.old_stds.extend_from_slice(self.old_std_row(i));
        }
        out
    }

    pub fn validate(&self, dims: NetDims) -> Result<()> {
        let m = self.len();
        if m == 0 {
            return Err(invalid("Minibatch: empty batch"));
        }
        if self.obs_dim != dims.obs_dim || self.act_dim != dims.act_dim {
            return Err(invalid("Minibatch: dims do not match the network"));
        }
        if self.obs.len() != m * self.obs_dim
            || self.actions.len() != m * self.act_dim
            || self.advantages.len() != m
            || self.returns.len() != m
            || self.old_means.len() != m * self.act_dim
            || self.old_stds.len() != m * self.act_dim
        {
            return Err(invalid("Minibatch: inconsistent field lengths"));
        }
        if self.old_log_probs.iter().any(|x| !x.is_finite()) {
            return Err(invalid("Minibatch: non-finite old log-probs"));
        }
        if self.advantages.iter().any(|x| !x.is_finite()) {
            return Err(invalid("Minibatch: non-finite advantages"));
        }
        Ok(())
    }
}

/// A loss value paired with its exact gradient.
#[derive(Debug, Clone)]
pub struct LossEval {
    /// The scalar being minimized.
    pub loss: f64,
    pub grads: GradBuffer,
    /// Mean per-sample policy objective (the maximized surrogate); 0 when
    /// the evaluation had no policy term.
    pub policy_objective: f64,
    /// Largest per-sample policy objective term, after clipping. This is
    /// what TREFree guarantees stays at or below `delta`.
    pub max_policy_term: f64,
}

#[derive(Debug, Clone, Copy)]
enum PolicyTerm {
    Pg,
    RatioConservative { lambda: f64 },
    PpoClip { eps: f64 },
    Trefree { delta: f64 },
}

impl PolicyTerm {
    /// Per-sample objective term and its derivative w.r.t. `log pi_new`.
    /// The derivative is exactly zero on the flat side of a clip boundary;
    /// ties take the clipped branch.
    fn eval(&self, ratio: f64, adv: f64) -> (f64, f64) {
        match *self {
            PolicyTerm::Pg => (ratio * adv, ratio * adv),
            PolicyTerm::RatioConservative { lambda } => {
                let dev = ratio - 1.0;
                if dev.abs() < lambda {
                    (dev * adv, ratio * adv)
                } else {
                    (dev.clamp(-lambda, lambda) * adv, 0.0)
                }
            }
            PolicyTerm::PpoClip { eps } => {
                let unclipped = ratio * adv;
                let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
                if unclipped <= clipped {
                    (unclipped, ratio * adv)
                } else {
                    // The clipped branch is active only when the ratio sits
                    // outside the clip range, where it is flat.
                    (clipped, 0.0)
                }
            }
            PolicyTerm::Trefree { delta } => {
                let term = (ratio - 1.0) * adv;
                if term < delta {
                    (term, ratio * adv)
                } else {
                    (delta, 0.0)
                }
            }
        }
    }
}

/// Shared evaluation core: one forward/backward pass per sample, with the
/// loss composed as `policy + value_weight * mse + entropy_weight * H`.
fn eval_loss(
    net: &PolicyNet,
    batch: &Minibatch,
    policy: Option<PolicyTerm>,
    value_weight: f64,
    entropy_weight: f64,
) -> Result<LossEval> {
    batch.validate(net.dims())?;
    let m = batch.len() as f64;
    let act_dim = net.dims().act_dim;
    let mut grads = GradBuffer::zeros(net.dims());
    let mut loss = 0.0;
    let mut policy_objective = 0.0;
    let mut max_policy_term = f64::NEG_INFINITY;

    for i in 0..batch.len() {
        let trace = net.forward(batch.obs_row(i))?;
        let mut d_mean: Option<Vec<f64>> = None;
        let mut d_value = 0.0;

        if let Some(term_kind) = policy {
            let dist = net.dist_from_trace(&trace);
            let log_prob = dist.log_prob(batch.action_row(i))?;
            let log_ratio = log_prob - batch.old_log_probs[i];
            if !log_ratio.is_finite() {
                return Err(CoreError::Numeric(format!(
                    "non-finite log-ratio at sample {i}"
                )));
            }
            if log_ratio > MAX_LOG_RATIO {
                return Err(CoreError::Numeric(format!(
                    "log-ratio {log_ratio:.3} exceeds {MAX_LOG_RATIO} at sample {i}"
                )));
            }
            let ratio = log_ratio.exp();
            let adv = batch.advantages[i];
            let (term, d_term_d_logp) = term_kind.eval(ratio, adv);
            policy_objective += term / m;
            max_policy_term = max_policy_term.max(term);
            loss -= term / m;
            // d loss / d logpi = -d term / m, routed into mean and log_std.
            let coeff = -d_term_d_logp / m;
            if coeff != 0.0 {
                let action = batch.action_row(i);
                let mut dm = vec![0.0; act_dim];
                for j in 0..act_dim {
                    let z = (action[j] - dist.mean[j]) / dist.std[j];
                    // d logpi / d mean = z / std ; d logpi / d log_std = z^2 - 1.
                    dm[j] = coeff * z / dist.std[j];
                    grads.log_std[j] += coeff * (z * z - 1.0);
                }
                d_mean = Some(dm);
            }
        }

        if value_weight != 0.0 {
            let err = trace.value - batch.returns[i];
            loss += value_weight * err * err / m;
            d_value = value_weight * 2.0 * err / m;
        }

        if let Some(dm) = &d_mean {
            net.backprop(&trace, Some(dm), d_value, &mut grads);
        } else if d_value != 0.0 {
            net.backprop(&trace, None, d_value, &mut grads);
        }
    }

    if entropy_weight != 0.0 {
        // Entropy is state independent, so the batch mean is the entropy of
        // the current log_std itself.
        let entropy: f64 = net
            .log_std
            .iter()
            .map(|l| l + 0.5 * (1.0 + (2.0 * core::f64::consts::PI).ln()))
            .sum();
        loss += entropy_weight * entropy;
        for j in 0..act_dim {
            grads.log_std[j] += entropy_weight;
        }
    }

    Ok(LossEval { loss, grads, policy_objective, max_policy_term })
}

/// Non-conservative surrogate: `loss = -mean_i ratio_i * A_i`.
pub fn pg_loss(net: &PolicyNet, batch: &Minibatch) -> Result<LossEval> {
    eval_loss(net, batch, Some(PolicyTerm::Pg), 0.0, 0.0)
}

/// Ratio-conservative surrogate: `loss = -mean_i clip(r_i - 1, -lambda, lambda) * A_i`.
pub fn ratio_conservative_loss(net: &PolicyNet, batch: &Minibatch, lambda: f64) -> Result<LossEval> {
    if !(lambda > 0.0) {
        return Err(invalid("ratio_conservative_loss: lambda must be > 0"));
    }
    eval_loss(net, batch, Some(PolicyTerm::RatioConservative { lambda }), 0.0, 0.0)
}

/// PPO clipped surrogate:
/// `loss = -mean_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i)`.
pub fn ppo_clip_loss(net: &PolicyNet, batch: &Minibatch, eps: f64) -> Result<LossEval> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("ppo_clip_loss: eps must be in (0, 1)"));
    }
    eval_loss(net, batch, Some(PolicyTerm::PpoClip { eps }), 0.0, 0.0)
}

/// Objective-conservative surrogate:
/// `loss = -(1/M) sum_i min((r_i - 1) A_i, delta)`. Samples at or above the
/// margin take the clipped branch and contribute exactly zero gradient.
pub fn trefree_loss(net: &PolicyNet, batch: &Minibatch, delta: f64) -> Result<LossEval> {
    if !(delta > 0.0) {
        return Err(invalid("trefree_loss: delta must be > 0"));
    }
    eval_loss(net, batch, Some(PolicyTerm::Trefree { delta }), 0.0, 0.0)
}

/// Critic regression `mean_i (V(s_i) - R_i)^2`.
pub fn value_loss(net: &PolicyNet, batch: &Minibatch) -> Result<LossEval> {
    eval_loss(net, batch, None, 1.0, 0.0)
}

/// Mean policy entropy over the batch (as the scalar of interest, not
/// negated).
pub fn entropy_bonus(net: &PolicyNet, batch: &Minibatch) -> Result<LossEval> {
    eval_loss(net, batch, None, 0.0, 1.0)
}

/// The full training loss for one minibatch:
/// `policy loss + value_coef * value loss - entropy_coef * entropy`.
pub fn total_loss(net: &PolicyNet, batch: &Minibatch, spec: &ObjectiveSpec) -> Result<LossEval> {
    spec.validate()?;
    let policy = match spec.kind {
        ObjectiveKind::Pg => PolicyTerm::Pg,
        ObjectiveKind::RatioConservative => PolicyTerm::RatioConservative { lambda: spec.lambda },
        ObjectiveKind::PpoClip => PolicyTerm::PpoClip { eps: spec.eps_clip },
        ObjectiveKind::Trefree => PolicyTerm::Trefree { delta: spec.delta },
        ObjectiveKind::Trpo => {
            return Err(invalid("total_loss: trpo uses trpo_step, not a loss"));
        }
    };
    eval_loss(net, batch, Some(policy), spec.value_coef, -spec.entropy_coef)
}

/// Mean KL from the frozen behavior distributions in the batch to the
/// current policy, together with its gradient.
pub fn kl_loss(net: &PolicyNet, batch: &Minibatch) -> Result<LossEval> {
    batch.validate(net.dims())?;
    let m = batch.len() as f64;
    let act_dim = net.dims().act_dim;
    let mut grads = GradBuffer::zeros(net.dims());
    let mut total = 0.0;
    for i in 0..batch.len() {
        let trace = net.forward(batch.obs_row(i))?;
        let dist = net.dist_from_trace(&trace);
        let old = gaussian::GaussianDist::new(
            batch.old_mean_row(i).to_vec(),
            batch.old_std_row(i).to_vec(),
        )?;
        total += gaussian::kl(&old, &dist)? / m;
        let mut dm = vec![0.0; act_dim];
        for j in 0..act_dim {
            let (so, sn) = (old.std[j], dist.std[j]);
            let diff = dist.mean[j] - old.mean[j];
            // d KL / d mean_new and d KL / d log_std_new.
            dm[j] = diff / (sn * sn) / m;
            grads.log_std[j] += (1.0 - (so * so + diff * diff) / (sn * sn)) / m;
        }
        net.backprop(&trace, Some(&dm), 0.0, &mut grads);
    }
    Ok(LossEval { loss: total, grads, policy_objective: 0.0, max_policy_term: f64::NEG_INFINITY })
}

/// Mean KL only (no gradient), for diagnostics and the TRPO line search.
pub fn mean_kl(net: &PolicyNet, batch: &Minibatch) -> Result<f64> {
    batch.validate(net.dims())?;
    let mut total = 0.0;
    for i in 0..batch.len() {
        let dist = net.forward_policy(batch.obs_row(i))?;
        let old = gaussian::GaussianDist::new(
            batch.old_mean_row(i).to_vec(),
            batch.old_std_row(i).to_vec(),
        )?;
        total += gaussian::kl(&old, &dist)?;
    }
    Ok(total / batch.len() as f64)
}

/// Log-ratio statistics of the current policy against the batch's frozen
/// behavior log-probs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioStats {
    pub min_log_ratio: f64,
    pub max_log_ratio: f64,
    pub mean_log_ratio: f64,
}

pub fn ratio_stats(net: &PolicyNet, batch: &Minibatch) -> Result<RatioStats> {
    batch.validate(net.dims())?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for i in 0..batch.len() {
        let dist = net.forward_policy(batch.obs_row(i))?;
        let lr = dist.log_prob(batch.action_row(i))? - batch.old_log_probs[i];
        min = min.min(lr);
        max = max.max(lr);
        sum += lr;
    }
    Ok(RatioStats {
        min_log_ratio: min,
        max_log_ratio: max,
        mean_log_ratio: sum / batch.len() as f64,
    })
}

/// The TRPO maximization target `mean_i ratio_i * A_i`, evaluated at the
/// current parameters (no gradient).
pub(crate) fn surrogate_value(net: &PolicyNet, batch: &Minibatch) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..batch.len() {
        let dist = net.forward_policy(batch.obs_row(i))?;
        let log_ratio = dist.log_prob(batch.action_row(i))? - batch.old_log_probs[i];
        if log_ratio > MAX_LOG_RATIO {
            return Err(CoreError::Numeric(format!(
                "log-ratio {log_ratio:.3} exceeds {MAX_LOG_RATIO} at sample {i}"
            )));
        }
        total += log_ratio.exp() * batch.advantages[i];
    }
    Ok(total / batch.len() as f64)
}

/// Helper shared by tests and the trainer: a batch where the behavior
/// policy is the net itself, i.e. every ratio starts at exactly 1.
pub fn batch_from_net<R: rand::Rng>(
    net: &PolicyNet,
    m: usize,
    rng: &mut R,
) -> Result<Minibatch> {
    let dims = net.dims();
    let mut batch = Minibatch {
        obs_dim: dims.obs_dim,
        act_dim: dims.act_dim,
        ..Minibatch::default()
    };
    for _ in 0..m {
        let obs: Vec<f64> = (0..dims.obs_dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let trace = net.forward(&obs)?;
        let dist = net.dist_from_trace(&trace);
        let action = dist.sample(rng);
        let lp = dist.log_prob(&action)?;
        batch.obs.extend_from_slice(&obs);
        batch.actions.extend_from_slice(&action);
        batch.old_log_probs.push(lp);
        batch.advantages.push(rng.gen_range(-2.0..2.0));
        batch.returns.push(rng.gen_range(-2.0..2.0));
        batch.old_means.extend_from_slice(&dist.mean);
        batch.old_stds.extend_from_slice(&dist.std);
    }
    Ok(batch)
}
