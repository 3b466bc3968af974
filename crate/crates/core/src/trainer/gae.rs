//! Generalized advantage estimation over one actor segment.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Exponentially weighted TD residuals:
/// `A_t = sum_l (gamma lambda)^l delta_{t+l}` with
/// `delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t)`.
///
/// `next_values[t]` is the critic's estimate for the observation that
/// followed step `t` (the pre-reset one at truncation boundaries), so
/// truncated tails bootstrap while terminal tails contribute nothing. The
/// lambda chain also stops at both kinds of episode boundary. Returns are
/// `A + V`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    dones: &[bool],
    truncateds: &[bool],
    gamma: f64,
    lam: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t_len = rewards.len();
    if values.len() != t_len
        || next_values.len() != t_len
        || dones.len() != t_len
        || truncateds.len() != t_len
    {
        return Err(invalid("compute_gae: field lengths differ"));
    }
    let mut advantages = vec![0.0; t_len];
    let mut returns = vec![0.0; t_len];
    let mut carry = 0.0;
    for t in (0..t_len).rev() {
        let nonterminal = if dones[t] { 0.0 } else { 1.0 };
        let boundary = dones[t] || truncateds[t];
        let delta = rewards[t] + gamma * next_values[t] * nonterminal - values[t];
        carry = delta + if boundary { 0.0 } else { gamma * lam * carry };
        advantages[t] = carry;
        returns[t] = carry + values[t];
    }
    Ok((advantages, returns))
}

/// Batch normalization of advantages to zero mean and unit (population)
/// standard deviation, with a 1e-8 floor on the denominator.
pub fn normalize_advantages(adv: &[f64]) -> Result<Vec<f64>> {
    if adv.len() < 2 {
        return Err(invalid("normalize_advantages: need at least 2 samples"));
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let denom = var.sqrt().max(1e-8);
    Ok(adv.iter().map(|a| (a - mean) / denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn lambda_zero_is_one_step_td() {
        let rewards = [1.0, -0.5, 2.0];
        let values = [0.3, 0.7, -0.2];
        let next_values = [0.7, -0.2, 0.4];
        let dones = [false; 3];
        let truncs = [false, false, true];
        let (adv, _) =
            compute_gae(&rewards, &values, &next_values, &dones, &truncs, 0.9, 0.0).unwrap();
        for t in 0..3 {
            let delta = rewards[t] + 0.9 * next_values[t] - values[t];
            assert_abs_diff_eq!(adv[t], delta, epsilon = 1e-14);
        }
    }

    #[test]
    fn lambda_one_zero_values_is_reward_to_go() {
        let rewards = [1.0, 2.0, 4.0, 8.0];
        let values = [0.0; 4];
        let next_values = [0.0; 4];
        let mut dones = [false; 4];
        dones[3] = true;
        let truncs = [false; 4];
        let gamma = 0.5;
        let (adv, ret) =
            compute_gae(&rewards, &values, &next_values, &dones, &truncs, gamma, 1.0).unwrap();
        // Discounted reward-to-go of a single terminated episode.
        assert_abs_diff_eq!(adv[3], 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(adv[2], 4.0 + gamma * 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(adv[1], 2.0 + gamma * (4.0 + gamma * 8.0), epsilon = 1e-14);
        assert_abs_diff_eq!(adv[0], 1.0 + gamma * adv[1], epsilon = 1e-14);
        assert_eq!(adv, &ret[..]);
    }

    #[test]
    fn matches_brute_force_double_sum() {
        let mut rng = crate::rng::rng_for(3, 90);
        let t_len = 5;
        let rewards: Vec<f64> = (0..t_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let values: Vec<f64> = (0..t_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut next_values = vec![0.0; t_len];
        for t in 0..t_len - 1 {
            next_values[t] = values[t + 1];
        }
        next_values[t_len - 1] = rng.gen_range(-1.0..1.0);
        let dones = [false; 5];
        let mut truncs = [false; 5];
        truncs[4] = true;
        let (gamma, lam) = (0.97, 0.8);
        let (adv, ret) =
            compute_gae(&rewards, &values, &next_values, &dones, &truncs, gamma, lam).unwrap();

        // Brute force: explicit double sum over future residuals.
        for t in 0..t_len {
            let mut expected = 0.0;
            for l in 0..t_len - t {
                let u = t + l;
                let delta = rewards[u] + gamma * next_values[u] - values[u];
                expected += (gamma * lam).powi(l as i32) * delta;
            }
            assert_abs_diff_eq!(adv[t], expected, epsilon = 1e-12);
            assert_abs_diff_eq!(ret[t], expected + values[t], epsilon = 1e-12);
        }
    }

    #[test]
    fn terminal_cuts_both_bootstrap_and_carry() {
        // Two episodes in one segment; the first ends terminally at t=1.
        let rewards = [1.0, 1.0, 1.0, 1.0];
        let values = [0.0; 4];
        let next_values = [9.0, 9.0, 9.0, 0.5];
        let dones = [false, true, false, false];
        let truncs = [false, false, false, true];
        let gamma = 0.9;
        let (adv, _) =
            compute_gae(&rewards, &values, &next_values, &dones, &truncs, gamma, 1.0).unwrap();
        // t=1 is terminal: no bootstrap, no carry from t>=2.
        assert_abs_diff_eq!(adv[1], 1.0, epsilon = 1e-14);
        // t=0 chains into t=1: delta_0 + gamma*lambda*adv_1 = (1 + 0.9*9) + 0.9*1.
        assert_abs_diff_eq!(adv[0], 10.0, epsilon = 1e-14);
        // t=3 truncated: bootstraps its own next value.
        assert_abs_diff_eq!(adv[3], 1.0 + gamma * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn normalize_advantages_contract() {
        assert!(normalize_advantages(&[1.0]).is_err());
        // Constant vector maps to zeros through the denominator guard.
        let z = normalize_advantages(&[3.0, 3.0, 3.0]).unwrap();
        assert!(z.iter().all(|&x| x == 0.0));
        // [-1, 1] already has zero mean and unit population std.
        let same = normalize_advantages(&[-1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(same[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same[1], 1.0, epsilon = 1e-12);
        // Random vector: recompute moments post hoc.
        let mut rng = crate::rng::rng_for(4, 90);
        let data: Vec<f64> = (0..257).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let out = normalize_advantages(&data).unwrap();
        let mean = out.iter().sum::<f64>() / out.len() as f64;
        let var = out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / out.len() as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-10);
    }
}
