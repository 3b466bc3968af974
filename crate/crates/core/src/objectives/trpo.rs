//! Trust-region constrained policy step.
//!
//! Solves `F x = g` by conjugate gradient, where `g` is the gradient of the
//! importance-weighted surrogate and `F v` is the exact Hessian-vector
//! product of the mean KL at the current parameters (Gauss-Newton form:
//! `J^T H_dist J v` with `H_dist = diag(1/std^2, 2)` for a diagonal
//! Gaussian), then backtracks until the KL constraint and a surrogate
//! improvement both hold.
//!
//! The step expects the batch to have been collected under the current
//! network, so the batch's `old_means`/`old_stds` coincide with the policy
//! at the evaluation point.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::nn::{ForwardTrace, GradBuffer, PolicyNet};

use super::{mean_kl, pg_loss, surrogate_value, Minibatch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrpoConfig {
    /// Mean-KL trust region size.
    pub max_kl: f64,
    pub cg_iters: usize,
    /// Damping added to the Fisher operator for conditioning.
    pub damping: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for TrpoConfig {
    fn default() -> Self {
        TrpoConfig {
            max_kl: 0.01,
            cg_iters: 10,
            damping: 0.1,
            backtrack_factor: 0.8,
            max_backtracks: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TrpoOutcome {
    Accepted,
    /// Surrogate gradient was (numerically) zero; nothing to do.
    ZeroGradient,
    /// No backtracked candidate satisfied KL and improvement; net restored.
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrpoReport {
    pub accepted: bool,
    pub outcome: TrpoOutcome,
    /// Mean KL of the accepted step (0 when rejected).
    pub kl: f64,
    /// Surrogate improvement of the accepted step (0 when rejected).
    pub improvement: f64,
    /// Final conjugate-gradient residual norm.
    pub cg_residual: f64,
    pub backtracks: usize,
}

/// Exact Fisher-vector product of the mean KL over the batch, at the
/// network's current parameters.
pub fn fisher_vector_product(
    net: &PolicyNet,
    batch: &Minibatch,
    v: &GradBuffer,
) -> Result<GradBuffer> {
    batch.validate(net.dims())?;
    let traces: Result<Vec<ForwardTrace>> =
        (0..batch.len()).map(|i| net.forward(batch.obs_row(i))).collect();
    Ok(fvp_with_traces(net, &traces?, v))
}

fn fvp_with_traces(net: &PolicyNet, traces: &[ForwardTrace], v: &GradBuffer) -> GradBuffer {
    let dims = net.dims();
    let m = traces.len() as f64;
    let std: Vec<f64> = net.log_std.iter().map(|l| l.exp()).collect();
    let mut out = GradBuffer::zeros(dims);
    for trace in traces {
        let (d_mean, d_log_std) = net.policy_jvp(trace, v);
        // Weight tangents by the KL Hessian in distribution space.
        let u_mean: Vec<f64> = d_mean
            .iter()
            .zip(&std)
            .map(|(dm, s)| dm / (s * s) / m)
            .collect();
        net.backprop(trace, Some(&u_mean), 0.0, &mut out);
        for j in 0..dims.act_dim {
            out.log_std[j] += 2.0 * d_log_std[j] / m;
        }
    }
    out
}

/// One TRPO update with the exact Fisher operator (plus damping).
pub fn trpo_step(net: &mut PolicyNet, batch: &Minibatch, cfg: &TrpoConfig) -> Result<TrpoReport> {
    batch.validate(net.dims())?;
    let traces: Result<Vec<ForwardTrace>> =
        (0..batch.len()).map(|i| net.forward(batch.obs_row(i))).collect();
    let traces = traces?;
    let dims = net.dims();
    let damping = cfg.damping;
    let op = move |net: &PolicyNet, v: &[f64]| -> Result<Vec<f64>> {
        let vbuf = GradBuffer::from_flat(dims, v)?;
        let mut fv = fvp_with_traces(net, &traces, &vbuf).to_flat();
        for (o, x) in fv.iter_mut().zip(v) {
            *o += damping * x;
        }
        Ok(fv)
    };
    trpo_step_impl(net, batch, cfg, op)
}

/// Test hook: run the step with an arbitrary curvature operator in place of
/// the damped Fisher (e.g. the identity, for closed-form checks).
pub fn trpo_step_with_operator(
    net: &mut PolicyNet,
    batch: &Minibatch,
    cfg: &TrpoConfig,
    mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<TrpoReport> {
    batch.validate(net.dims())?;
    trpo_step_impl(net, batch, cfg, move |_net, v| op(v))
}

fn trpo_step_impl(
    net: &mut PolicyNet,
    batch: &Minibatch,
    cfg: &TrpoConfig,
    mut op: impl FnMut(&PolicyNet, &[f64]) -> Result<Vec<f64>>,
) -> Result<TrpoReport> {
    // Gradient of the maximized surrogate: pg_loss minimizes its negation.
    let eval = pg_loss(net, batch)?;
    let mut g = eval.grads.to_flat();
    for gi in &mut g {
        *gi = -*gi;
    }
    let gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if gnorm < 1e-12 {
        return Ok(TrpoReport {
            accepted: false,
            outcome: TrpoOutcome::ZeroGradient,
            kl: 0.0,
            improvement: 0.0,
            cg_residual: 0.0,
            backtracks: 0,
        });
    }

    let (x, cg_residual) = conjugate_gradient(net, &mut op, &g, cfg.cg_iters)?;
    // Scale to the trust region boundary: beta = sqrt(2 max_kl / (x^T A x)).
    let ax = op(net, &x)?;
    let xax: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    if !(xax > 0.0) || !xax.is_finite() {
        return Err(CoreError::Numeric(
            "trpo_step: non-positive curvature in step scaling".into(),
        ));
    }
    let beta = (2.0 * cfg.max_kl / xax).sqrt();

    let base_params = net.flat_params();
    let base_surrogate = surrogate_value(net, batch)?;
    let mut scale = beta;
    for backtracks in 0..cfg.max_backtracks {
        let candidate: Vec<f64> = base_params
            .iter()
            .zip(&x)
            .map(|(p, d)| p + scale * d)
            .collect();
        net.set_flat_params(&candidate)?;
        let kl = mean_kl(net, batch)?;
        let surrogate = surrogate_value(net, batch)?;
        let improvement = surrogate - base_surrogate;
        if kl <= cfg.max_kl && improvement > 0.0 {
            return Ok(TrpoReport {
                accepted: true,
                outcome: TrpoOutcome::Accepted,
                kl,
                improvement,
                cg_residual,
                backtracks,
            });
        }
        scale *= cfg.backtrack_factor;
    }
    net.set_flat_params(&base_params)?;
    Ok(TrpoReport {
        accepted: false,
        outcome: TrpoOutcome::LineSearchFailed,
        kl: 0.0,
        improvement: 0.0,
        cg_residual,
        backtracks: cfg.max_backtracks,
    })
}

/// Plain CG on the (damped) curvature operator; returns the solution and
/// the final residual norm. Errors on a non-finite iterate.
fn conjugate_gradient(
    net: &PolicyNet,
    op: &mut impl FnMut(&PolicyNet, &[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    iters: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rdotr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..iters {
        if rdotr < 1e-10 * 1e-10 {
            break;
        }
        let ap = op(net, &p)?;
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rdotr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Numeric("trpo_step: non-finite CG iterate".into()));
        }
        let new_rdotr: f64 = r.iter().map(|v| v * v).sum();
        let ratio = new_rdotr / rdotr;
        rdotr = new_rdotr;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
    }
    Ok((x, rdotr.sqrt()))
}
