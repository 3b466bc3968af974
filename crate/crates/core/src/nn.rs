//! Actor-critic network with a hand-rolled backward pass.
//!
//! The architecture is fixed so the gradients stay verifiable: two tanh
//! hidden layers for each head, with the first layer shared between actor
//! and critic. The policy head outputs a Gaussian mean; the log standard
//! deviation is a free per-dimension parameter (state independent). Flat
//! parameter order is `shared_w, shared_b, actor_w, actor_b, mean_w,
//! mean_b, log_std, critic_w, critic_b, value_w, value_b`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, CoreError, Result};
use crate::gaussian::{standard_normal, GaussianDist};

pub const DEFAULT_HIDDEN: usize = 64;
/// `log_std` is clamped into this range after every parameter update.
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetDims {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden_dim: usize,
}

impl NetDims {
    pub fn param_count(&self) -> usize {
        let h = self.hidden_dim;
        h * self.obs_dim + h            // shared
            + h * h + h                 // actor hidden
            + self.act_dim * h + self.act_dim // mean head
            + self.act_dim              // log_std
            + h * h + h                 // critic hidden
            + h + 1                     // value head
    }
}

/// Parameters of the shared-first-layer actor-critic. Weight matrices are
/// flat row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    dims: NetDims,
    pub shared_w: Vec<f64>,
    pub shared_b: Vec<f64>,
    pub actor_w: Vec<f64>,
    pub actor_b: Vec<f64>,
    pub mean_w: Vec<f64>,
    pub mean_b: Vec<f64>,
    pub log_std: Vec<f64>,
    pub critic_w: Vec<f64>,
    pub critic_b: Vec<f64>,
    pub value_w: Vec<f64>,
    pub value_b: f64,
}

impl PolicyNet {
    pub fn zeros(obs_dim: usize, act_dim: usize, hidden_dim: usize) -> Self {
        let h = hidden_dim;
        PolicyNet {
            dims: NetDims { obs_dim, act_dim, hidden_dim },
            shared_w: vec![0.0; h * obs_dim],
            shared_b: vec![0.0; h],
            actor_w: vec![0.0; h * h],
            actor_b: vec![0.0; h],
            mean_w: vec![0.0; act_dim * h],
            mean_b: vec![0.0; act_dim],
            log_std: vec![0.0; act_dim],
            critic_w: vec![0.0; h * h],
            critic_b: vec![0.0; h],
            value_w: vec![0.0; h],
            value_b: 0.0,
        }
    }

    /// Orthogonal-style initialization: gain sqrt(2) on hidden layers, 0.01
    /// on the mean head, 1.0 on the value head; biases and `log_std` zero.
    pub fn init<R: Rng>(obs_dim: usize, act_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut net = PolicyNet::zeros(obs_dim, act_dim, hidden_dim);
        let h = hidden_dim;
        let sqrt2 = 2.0f64.sqrt();
        net.shared_w = orthogonal(h, obs_dim, sqrt2, rng);
        net.actor_w = orthogonal(h, h, sqrt2, rng);
        net.mean_w = orthogonal(act_dim, h, 0.01, rng);
        net.critic_w = orthogonal(h, h, sqrt2, rng);
        net.value_w = orthogonal(1, h, 1.0, rng);
        net
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn param_count(&self) -> usize {
        self.dims.param_count()
    }

    /// Tensor names and shapes in flat parameter order, for checkpointing.
    pub fn tensor_specs(&self) -> Vec<(&'static str, Vec<usize>)> {
        let NetDims { obs_dim, act_dim, hidden_dim: h } = self.dims;
        vec![
            ("shared_w", vec![h, obs_dim]),
            ("shared_b", vec![h]),
            ("actor_w", vec![h, h]),
            ("actor_b", vec![h]),
            ("mean_w", vec![act_dim, h]),
            ("mean_b", vec![act_dim]),
            ("log_std", vec![act_dim]),
            ("critic_w", vec![h, h]),
            ("critic_b", vec![h]),
            ("value_w", vec![h]),
            ("value_b", vec![]),
        ]
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.shared_w);
        out.extend_from_slice(&self.shared_b);
        out.extend_from_slice(&self.actor_w);
        out.extend_from_slice(&self.actor_b);
        out.extend_from_slice(&self.mean_w);
        out.extend_from_slice(&self.mean_b);
        out.extend_from_slice(&self.log_std);
        out.extend_from_slice(&self.critic_w);
        out.extend_from_slice(&self.critic_b);
        out.extend_from_slice(&self.value_w);
        out.push(self.value_b);
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(invalid("set_flat_params: length mismatch"));
        }
        let mut at = 0usize;
        split_flat(
            flat,
            &mut at,
            [
                &mut self.shared_w,
                &mut self.shared_b,
                &mut self.actor_w,
                &mut self.actor_b,
                &mut self.mean_w,
                &mut self.mean_b,
                &mut self.log_std,
                &mut self.critic_w,
                &mut self.critic_b,
                &mut self.value_w,
            ],
        );
        self.value_b = flat[at];
        Ok(())
    }

    fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.dims.obs_dim {
            return Err(invalid(format!(
                "observation has length {}, expected {}",
                obs.len(),
                self.dims.obs_dim
            )));
        }
        if obs.iter().any(|x| !x.is_finite()) {
            return Err(invalid("observation contains non-finite values"));
        }
        Ok(())
    }

    /// Full forward pass caching every activation needed by the backward
    /// pass.
    pub fn forward(&self, obs: &[f64]) -> Result<ForwardTrace> {
        self.check_obs(obs)?;
        let h = self.dims.hidden_dim;
        let h1 = affine_tanh(&self.shared_w, &self.shared_b, obs, h);
        let ha = affine_tanh(&self.actor_w, &self.actor_b, &h1, h);
        let mean = affine(&self.mean_w, &self.mean_b, &ha, self.dims.act_dim);
        let hc = affine_tanh(&self.critic_w, &self.critic_b, &h1, h);
        let mut value = self.value_b;
        for j in 0..h {
            value += self.value_w[j] * hc[j];
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::Numeric("non-finite policy mean".into()));
        }
        if !value.is_finite() {
            return Err(CoreError::Numeric("non-finite value output".into()));
        }
        Ok(ForwardTrace { obs: obs.to_vec(), h1, ha, mean, hc, value })
    }

    /// Gaussian action distribution at `obs`.
    pub fn forward_policy(&self, obs: &[f64]) -> Result<GaussianDist> {
        let trace = self.forward(obs)?;
        Ok(self.dist_from_trace(&trace))
    }

    /// State value estimate at `obs`.
    pub fn forward_value(&self, obs: &[f64]) -> Result<f64> {
        Ok(self.forward(obs)?.value)
    }

    pub fn dist_from_trace(&self, trace: &ForwardTrace) -> GaussianDist {
        let std = self.log_std.iter().map(|l| l.exp()).collect();
        GaussianDist { mean: trace.mean.clone(), std }
    }

    /// Reverse-mode accumulation for one sample: pushes `d_mean` (cotangent
    /// of the policy mean) and `d_value` (cotangent of the value output)
    /// back through the network into `grads`. `log_std` does not pass
    /// through the network; its gradient is accumulated directly by callers.
    pub fn backprop(
        &self,
        trace: &ForwardTrace,
        d_mean: Option<&[f64]>,
        d_value: f64,
        grads: &mut GradBuffer,
    ) {
        let NetDims { obs_dim, act_dim, hidden_dim: h } = self.dims;
        let mut d_h1 = vec![0.0; h];

        if let Some(d_mean) = d_mean {
            debug_assert_eq!(d_mean.len(), act_dim);
            // mean = mean_w . ha + mean_b
            let mut d_ha = vec![0.0; h];
            for i in 0..act_dim {
                let g = d_mean[i];
                if g == 0.0 {
                    continue;
                }
                grads.mean_b[i] += g;
                for j in 0..h {
                    grads.mean_w[i * h + j] += g * trace.ha[j];
                    d_ha[j] += g * self.mean_w[i * h + j];
                }
            }
            // ha = tanh(actor_w . h1 + actor_b)
            for i in 0..h {
                let g = d_ha[i] * (1.0 - trace.ha[i] * trace.ha[i]);
                if g == 0.0 {
                    continue;
                }
                grads.actor_b[i] += g;
                for j in 0..h {
                    grads.actor_w[i * h + j] += g * trace.h1[j];
                    d_h1[j] += g * self.actor_w[i * h + j];
                }
            }
        }

        if d_value != 0.0 {
            // value = value_w . hc + value_b
            grads.value_b += d_value;
            let mut d_hc = vec![0.0; h];
            for j in 0..h {
                grads.value_w[j] += d_value * trace.hc[j];
                d_hc[j] = d_value * self.value_w[j];
            }
            // hc = tanh(critic_w . h1 + critic_b)
            for i in 0..h {
                let g = d_hc[i] * (1.0 - trace.hc[i] * trace.hc[i]);
                if g == 0.0 {
                    continue;
                }
                grads.critic_b[i] += g;
                for j in 0..h {
                    grads.critic_w[i * h + j] += g * trace.h1[j];
                    d_h1[j] += g * self.critic_w[i * h + j];
                }
            }
        }

        // h1 = tanh(shared_w . obs + shared_b)
        for i in 0..h {
            let g = d_h1[i] * (1.0 - trace.h1[i] * trace.h1[i]);
            if g == 0.0 {
                continue;
            }
            grads.shared_b[i] += g;
            for j in 0..obs_dim {
                grads.shared_w[i * obs_dim + j] += g * trace.obs[j];
            }
        }
    }

    /// Forward-mode directional derivative of `(mean, log_std)` along the
    /// parameter direction `dir`, at a cached forward trace. Used for exact
    /// Fisher-vector products.
    pub fn policy_jvp(&self, trace: &ForwardTrace, dir: &GradBuffer) -> (Vec<f64>, Vec<f64>) {
        let NetDims { obs_dim, act_dim, hidden_dim: h } = self.dims;
        // d z1 = dW1.x + db1 ; d h1 = (1 - h1^2) d z1
        let mut d_h1 = vec![0.0; h];
        for i in 0..h {
            let mut dz = dir.shared_b[i];
            for j in 0..obs_dim {
                dz += dir.shared_w[i * obs_dim + j] * trace.obs[j];
            }
            d_h1[i] = dz * (1.0 - trace.h1[i] * trace.h1[i]);
        }
        // d za = dWa.h1 + Wa.dh1 + dba ; d ha = (1 - ha^2) d za
        let mut d_ha = vec![0.0; h];
        for i in 0..h {
            let mut dz = dir.actor_b[i];
            for j in 0..h {
                dz += dir.actor_w[i * h + j] * trace.h1[j] + self.actor_w[i * h + j] * d_h1[j];
            }
            d_ha[i] = dz * (1.0 - trace.ha[i] * trace.ha[i]);
        }
        // d mean = dWm.ha + Wm.dha + dbm
        let mut d_mean = vec![0.0; act_dim];
        for i in 0..act_dim {
            let mut dm = dir.mean_b[i];
            for j in 0..h {
                dm += dir.mean_w[i * h + j] * trace.ha[j] + self.mean_w[i * h + j] * d_ha[j];
            }
            d_mean[i] = dm;
        }
        (d_mean, dir.log_std.clone())
    }

    /// Sample an action; returns `(action, log_prob, value)`.
    pub fn act<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64, f64)> {
        let trace = self.forward(obs)?;
        let dist = self.dist_from_trace(&trace);
        let action: Vec<f64> = (0..dist.dim())
            .map(|i| dist.mean[i] + dist.std[i] * standard_normal(rng))
            .collect();
        let log_prob = dist.log_prob(&action)?;
        Ok((action, log_prob, trace.value))
    }
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub obs: Vec<f64>,
    pub h1: Vec<f64>,
    pub ha: Vec<f64>,
    pub mean: Vec<f64>,
    pub hc: Vec<f64>,
    pub value: f64,
}

fn affine(w: &[f64], b: &[f64], x: &[f64], out_dim: usize) -> Vec<f64> {
    let in_dim = x.len();
    let mut out = b.to_vec();
    for i in 0..out_dim {
        let row = &w[i * in_dim..(i + 1) * in_dim];
        let mut acc = 0.0;
        for j in 0..in_dim {
            acc += row[j] * x[j];
        }
        out[i] += acc;
    }
    out
}

fn affine_tanh(w: &[f64], b: &[f64], x: &[f64], out_dim: usize) -> Vec<f64> {
    let mut out = affine(w, b, x, out_dim);
    for v in &mut out {
        *v = v.tanh();
    }
    out
}

fn split_flat<const N: usize>(flat: &[f64], at: &mut usize, bufs: [&mut Vec<f64>; N]) {
    for buf in bufs {
        let len = buf.len();
        buf.copy_from_slice(&flat[*at..*at + len]);
        *at += len;
    }
}

/// Gain-scaled orthogonal matrix `[rows][cols]` from Gram-Schmidt on a
/// Gaussian draw; rows are orthonormal when `rows <= cols` and columns when
/// `cols <= rows`.
fn orthogonal<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (tall_rows, tall_cols, transposed) = if rows >= cols {
        (rows, cols, false)
    } else {
        (cols, rows, true)
    };
    // Column-major tall matrix, orthonormalize columns.
    let mut cols_vec: Vec<Vec<f64>> = (0..tall_cols)
        .map(|_| (0..tall_rows).map(|_| standard_normal(rng)).collect())
        .collect();
    for j in 0..tall_cols {
        for i in 0..j {
            let dot: f64 = cols_vec[j]
                .iter()
                .zip(&cols_vec[i])
                .map(|(a, b)| a * b)
                .sum();
            for k in 0..tall_rows {
                let v = cols_vec[i][k];
                cols_vec[j][k] -= dot * v;
            }
        }
        let norm: f64 = cols_vec[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut cols_vec[j] {
            *v /= norm;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let v = if transposed { cols_vec[i][j] } else { cols_vec[j][i] };
            out[i * cols + j] = gain * v;
        }
    }
    out
}

/// Per-tensor gradient accumulator, congruent with [`PolicyNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer {
    dims: NetDims,
    pub shared_w: Vec<f64>,
    pub shared_b: Vec<f64>,
    pub actor_w: Vec<f64>,
    pub actor_b: Vec<f64>,
    pub mean_w: Vec<f64>,
    pub mean_b: Vec<f64>,
    pub log_std: Vec<f64>,
    pub critic_w: Vec<f64>,
    pub critic_b: Vec<f64>,
    pub value_w: Vec<f64>,
    pub value_b: f64,
}

impl GradBuffer {
    pub fn zeros(dims: NetDims) -> Self {
        let NetDims { obs_dim, act_dim, hidden_dim: h } = dims;
        GradBuffer {
            dims,
            shared_w: vec![0.0; h * obs_dim],
            shared_b: vec![0.0; h],
            actor_w: vec![0.0; h * h],
            actor_b: vec![0.0; h],
            mean_w: vec![0.0; act_dim * h],
            mean_b: vec![0.0; act_dim],
            log_std: vec![0.0; act_dim],
            critic_w: vec![0.0; h * h],
            critic_b: vec![0.0; h],
            value_w: vec![0.0; h],
            value_b: 0.0,
        }
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn scale(&mut self, factor: f64) {
        self.for_each_mut(|v| *v *= factor);
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dims.param_count());
        out.extend_from_slice(&self.shared_w);
        out.extend_from_slice(&self.shared_b);
        out.extend_from_slice(&self.actor_w);
        out.extend_from_slice(&self.actor_b);
        out.extend_from_slice(&self.mean_w);
        out.extend_from_slice(&self.mean_b);
        out.extend_from_slice(&self.log_std);
        out.extend_from_slice(&self.critic_w);
        out.extend_from_slice(&self.critic_b);
        out.extend_from_slice(&self.value_w);
        out.push(self.value_b);
        out
    }

    pub fn from_flat(dims: NetDims, flat: &[f64]) -> Result<Self> {
        if flat.len() != dims.param_count() {
            return Err(invalid("GradBuffer::from_flat: length mismatch"));
        }
        let mut buf = GradBuffer::zeros(dims);
        let mut at = 0usize;
        split_flat(
            flat,
            &mut at,
            [
                &mut buf.shared_w,
                &mut buf.shared_b,
                &mut buf.actor_w,
                &mut buf.actor_b,
                &mut buf.mean_w,
                &mut buf.mean_b,
                &mut buf.log_std,
                &mut buf.critic_w,
                &mut buf.critic_b,
                &mut buf.value_w,
            ],
        );
        buf.value_b = flat[at];
        Ok(buf)
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for buf in [
            &mut self.shared_w,
            &mut self.shared_b,
            &mut self.actor_w,
            &mut self.actor_b,
            &mut self.mean_w,
            &mut self.mean_b,
            &mut self.log_std,
            &mut self.critic_w,
            &mut self.critic_b,
            &mut self.value_w,
        ] {
            for v in buf.iter_mut() {
                f(v);
            }
        }
        f(&mut self.value_b);
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First/second moment estimates over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(dims: NetDims) -> Self {
        let n = dims.param_count();
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update. A non-finite gradient aborts the step
/// with the net and optimizer state untouched. `log_std` is re-clamped to
/// `[LOG_STD_MIN, LOG_STD_MAX]` afterwards.
pub fn adam_step(
    net: &mut PolicyNet,
    grads: &GradBuffer,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if grads.dims() != net.dims() {
        return Err(invalid("adam_step: gradient shape mismatch"));
    }
    let g = grads.to_flat();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::Numeric("adam_step: non-finite gradient, step aborted".into()));
    }
    if state.m.len() != g.len() {
        return Err(invalid("adam_step: optimizer state shape mismatch"));
    }
    state.t += 1;
    let t = state.t as i32;
    let mut params = net.flat_params();
    let bc1 = 1.0 - ADAM_BETA1.powi(t);
    let bc2 = 1.0 - ADAM_BETA2.powi(t);
    for i in 0..g.len() {
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g[i];
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
    net.set_flat_params(&params)?;
    for l in &mut net.log_std {
        *l = l.clamp(LOG_STD_MIN, LOG_STD_MAX);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn zero_net_outputs_standard_dist_and_zero_value() {
        let net = PolicyNet::zeros(3, 2, 8);
        let dist = net.forward_policy(&[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(dist.mean, vec![0.0, 0.0]);
        assert_eq!(dist.std, vec![1.0, 1.0]);
        assert_eq!(net.forward_value(&[0.5, -1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn zero_first_layer_disconnects_input() {
        let mut rng = rng_for(0, 50);
        let mut net = PolicyNet::init(3, 2, 8, &mut rng);
        net.shared_w.iter_mut().for_each(|w| *w = 0.0);
        let a = net.forward_policy(&[1.0, 2.0, 3.0]).unwrap();
        let b = net.forward_policy(&[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_matches_straight_line_evaluator() {
        // Duplicate evaluation coded independently of the layer helpers.
        let mut rng = rng_for(1, 50);
        let net = PolicyNet::init(4, 2, 16, &mut rng);
        let obs: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let trace = net.forward(&obs).unwrap();

        let h = 16;
        let mut h1 = vec![0.0; h];
        for i in 0..h {
            let mut z = net.shared_b[i];
            for (j, &x) in obs.iter().enumerate() {
                z += net.shared_w[i * 4 + j] * x;
            }
            h1[i] = z.tanh();
        }
        let mut mean = vec![0.0; 2];
        {
            let mut ha = vec![0.0; h];
            for i in 0..h {
                let mut z = net.actor_b[i];
                for j in 0..h {
                    z += net.actor_w[i * h + j] * h1[j];
                }
                ha[i] = z.tanh();
            }
            for i in 0..2 {
                let mut z = net.mean_b[i];
                for j in 0..h {
                    z += net.mean_w[i * h + j] * ha[j];
                }
                mean[i] = z;
            }
        }
        let mut value = net.value_b;
        for i in 0..h {
            let mut z = net.critic_b[i];
            for j in 0..h {
                z += net.critic_w[i * h + j] * h1[j];
            }
            value += net.value_w[i] * z.tanh();
        }
        for i in 0..2 {
            assert_abs_diff_eq!(trace.mean[i], mean[i], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(trace.value, value, epsilon = 1e-12);
    }

    #[test]
    fn shared_layer_couples_policy_and_value() {
        let mut rng = rng_for(2, 50);
        let mut net = PolicyNet::init(3, 2, 8, &mut rng);
        let obs = [0.3, -0.7, 1.1];
        let before = net.forward(&obs).unwrap();
        net.shared_w[5] += 0.25;
        let after = net.forward(&obs).unwrap();
        assert_ne!(before.mean, after.mean);
        assert_ne!(before.value, after.value);
    }

    #[test]
    fn value_grad_on_zero_net_is_head_bias_only() {
        let net = PolicyNet::zeros(3, 2, 8);
        let trace = net.forward(&[1.0, -2.0, 0.5]).unwrap();
        let mut grads = GradBuffer::zeros(net.dims());
        net.backprop(&trace, None, 1.0, &mut grads);
        assert_eq!(grads.value_b, 1.0);
        let mut rest = grads.clone();
        rest.value_b = 0.0;
        assert!(rest.to_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn value_gradient_matches_finite_differences() {
        let mut rng = rng_for(3, 50);
        let net = PolicyNet::init(3, 2, 6, &mut rng);
        let obs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let trace = net.forward(&obs).unwrap();
        let mut grads = GradBuffer::zeros(net.dims());
        net.backprop(&trace, None, 1.0, &mut grads);
        let analytic = grads.to_flat();

        let h = 1e-5;
        let base = net.flat_params();
        for k in 0..base.len() {
            let mut up = net.clone();
            let mut dn = net.clone();
            let mut p = base.clone();
            p[k] += h;
            up.set_flat_params(&p).unwrap();
            p[k] -= 2.0 * h;
            dn.set_flat_params(&p).unwrap();
            let fd = (up.forward_value(&obs).unwrap() - dn.forward_value(&obs).unwrap()) / (2.0 * h);
            let denom = analytic[k].abs().max(fd.abs()).max(1e-6);
            assert!(
                (analytic[k] - fd).abs() / denom <= 1e-5,
                "param {k}: analytic {} vs fd {fd}",
                analytic[k]
            );
        }
    }

    #[test]
    fn jvp_matches_finite_difference_directional_derivative() {
        let mut rng = rng_for(4, 50);
        let net = PolicyNet::init(3, 2, 6, &mut rng);
        let obs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let trace = net.forward(&obs).unwrap();
        let dir_flat: Vec<f64> = (0..net.param_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir = GradBuffer::from_flat(net.dims(), &dir_flat).unwrap();
        let (d_mean, d_log_std) = net.policy_jvp(&trace, &dir);

        let h = 1e-6;
        let base = net.flat_params();
        let plus: Vec<f64> = base.iter().zip(&dir_flat).map(|(p, d)| p + h * d).collect();
        let mut up = net.clone();
        up.set_flat_params(&plus).unwrap();
        let t_up = up.forward(&obs).unwrap();
        let minus: Vec<f64> = base.iter().zip(&dir_flat).map(|(p, d)| p - h * d).collect();
        let mut dn = net.clone();
        dn.set_flat_params(&minus).unwrap();
        let t_dn = dn.forward(&obs).unwrap();
        for i in 0..2 {
            let fd = (t_up.mean[i] - t_dn.mean[i]) / (2.0 * h);
            assert_abs_diff_eq!(d_mean[i], fd, epsilon = 1e-6);
            let fd_ls = (up.log_std[i] - dn.log_std[i]) / (2.0 * h);
            assert_abs_diff_eq!(d_log_std[i], fd_ls, epsilon = 1e-9);
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let mut rng = rng_for(5, 50);
        let mut net = PolicyNet::init(3, 2, 8, &mut rng);
        let before = net.flat_params();
        let grads = GradBuffer::zeros(net.dims());
        let mut state = AdamState::new(net.dims());
        adam_step(&mut net, &grads, &mut state, 3e-4).unwrap();
        assert_eq!(net.flat_params(), before);
    }

    #[test]
    fn adam_first_step_matches_hand_formula() {
        let mut net = PolicyNet::zeros(2, 1, 4);
        let mut grads = GradBuffer::zeros(net.dims());
        grads.mean_b[0] = 0.5;
        let mut state = AdamState::new(net.dims());
        adam_step(&mut net, &grads, &mut state, 0.01).unwrap();
        // First step: m_hat = g, v_hat = g^2, so delta = -lr * g / (|g| + eps).
        let expected = -0.01 * 0.5 / (0.5 + 1e-8);
        assert_abs_diff_eq!(net.mean_b[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn adam_lr_zero_is_identity_and_nonfinite_grad_aborts() {
        let mut rng = rng_for(6, 50);
        let mut net = PolicyNet::init(3, 2, 8, &mut rng);
        let before = net.flat_params();
        let mut grads = GradBuffer::zeros(net.dims());
        grads.shared_w[0] = 1.0;
        let mut state = AdamState::new(net.dims());
        adam_step(&mut net, &grads, &mut state, 0.0).unwrap();
        assert_eq!(net.flat_params(), before);

        grads.shared_w[0] = f64::NAN;
        let err = adam_step(&mut net, &grads, &mut state, 0.1).unwrap_err();
        assert!(matches!(err, CoreError::Numeric(_)));
        assert_eq!(net.flat_params(), before);
    }

    #[test]
    fn adam_clamps_log_std() {
        let mut net = PolicyNet::zeros(2, 1, 4);
        let mut grads = GradBuffer::zeros(net.dims());
        grads.log_std[0] = -1.0;
        let mut state = AdamState::new(net.dims());
        // Huge lr pushes log_std far past the clamp boundary.
        adam_step(&mut net, &grads, &mut state, 100.0).unwrap();
        assert_eq!(net.log_std[0], LOG_STD_MAX);
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = rng_for(7, 50);
        let m = orthogonal(4, 16, 1.0, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..16).map(|k| m[i * 16 + k] * m[j * 16 + k]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn flat_roundtrip_is_exact() {
        let mut rng = rng_for(8, 50);
        let net = PolicyNet::init(5, 3, 16, &mut rng);
        let flat = net.flat_params();
        assert_eq!(flat.len(), net.param_count());
        let mut other = PolicyNet::zeros(5, 3, 16);
        other.set_flat_params(&flat).unwrap();
        assert_eq!(net, other);
    }

    #[test]
    fn rejects_bad_observations() {
        let net = PolicyNet::zeros(3, 2, 4);
        assert!(net.forward(&[1.0, 2.0]).is_err());
        assert!(net.forward(&[1.0, f64::NAN, 0.0]).is_err());
    }
}
