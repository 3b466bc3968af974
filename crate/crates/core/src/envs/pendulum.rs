//! Torque-limited pendulum swing-up, the classic benchmark definition.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::rng;

use super::{clip_action, Env, EnvSpec, StepResult};

const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;
const MAX_TORQUE: f64 = 2.0;
const MAX_SPEED: f64 = 8.0;
const HORIZON: usize = 200;

/// Observation `(cos th, sin th, thdot)`; `th = 0` is upright. Cost is
/// `th_norm^2 + 0.1 thdot^2 + 0.001 u^2` evaluated on the pre-step state,
/// with the angle wrapped to `[-pi, pi)`. Episodes start at a uniform angle
/// with a small random velocity and truncate at 200 steps.
#[derive(Debug, Clone)]
pub struct PendulumEnv {
    theta: f64,
    theta_dot: f64,
    steps: usize,
    rng: ChaCha8Rng,
    clipped: u64,
}

impl PendulumEnv {
    pub fn new(seed: u64) -> Self {
        PendulumEnv {
            theta: 0.0,
            theta_dot: 0.0,
            steps: 0,
            rng: rng::rng_for(seed, 0),
            clipped: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }

    /// Direct state override for tests.
    #[cfg(test)]
    fn set_state(&mut self, theta: f64, theta_dot: f64) {
        self.theta = theta;
        self.theta_dot = theta_dot;
    }
}

fn angle_normalize(x: f64) -> f64 {
    let r = (x + PI) % (2.0 * PI);
    let r = if r < 0.0 { r + 2.0 * PI } else { r };
    r - PI
}

impl Env for PendulumEnv {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            obs_dim: 3,
            act_dim: 1,
            max_episode_steps: HORIZON,
            action_low: vec![-MAX_TORQUE],
            action_high: vec![MAX_TORQUE],
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.theta = self.rng.gen_range(-PI..=PI);
        self.theta_dot = self.rng.gen_range(-1.0..=1.0);
        self.steps = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let spec = self.spec();
        let (a, was_clipped) = clip_action(action, &spec.action_low, &spec.action_high);
        if was_clipped {
            self.clipped += 1;
        }
        let u = a[0];
        let th = self.theta;
        let cost = angle_normalize(th).powi(2) + 0.1 * self.theta_dot.powi(2) + 0.001 * u * u;

        // Semi-implicit Euler with the velocity clamp of the classic task.
        let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * th.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
        self.theta_dot = (self.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += self.theta_dot * DT;
        self.steps += 1;

        Ok(StepResult {
            next_obs: self.obs(),
            reward: -cost,
            done: false,
            truncated: self.steps >= HORIZON,
        })
    }

    fn clipped_action_count(&self) -> u64 {
        self.clipped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn upright_at_rest_with_zero_torque_is_free() {
        let mut env = PendulumEnv::new(0);
        env.reset();
        env.set_state(0.0, 0.0);
        let r = env.step(&[0.0]).unwrap();
        assert_eq!(r.reward, 0.0);
        // Upright is an (unstable) equilibrium: the state does not move.
        assert_eq!(env.theta, 0.0);
    }

    #[test]
    fn hanging_down_costs_pi_squared_per_step() {
        let mut env = PendulumEnv::new(0);
        env.reset();
        env.set_state(PI, 0.0);
        for _ in 0..5 {
            let r = env.step(&[0.0]).unwrap();
            assert_abs_diff_eq!(r.reward, -(PI * PI), epsilon = 1e-10);
        }
    }

    #[test]
    fn angle_wraps_to_symmetric_interval() {
        assert_abs_diff_eq!(angle_normalize(PI), -PI, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_normalize(3.0 * PI), -PI, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_normalize(0.3), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_normalize(-0.3), -0.3, epsilon = 1e-12);
    }

    #[test]
    fn torque_is_clipped() {
        let mut env = PendulumEnv::new(0);
        env.reset();
        env.set_state(0.0, 0.0);
        env.step(&[100.0]).unwrap();
        assert_eq!(env.clipped_action_count(), 1);
        // Acceleration reflects the clamped torque: 3/(m l^2) * 2 * dt.
        assert_abs_diff_eq!(env.theta_dot, 3.0 * MAX_TORQUE * DT, epsilon = 1e-12);
    }

    #[test]
    fn golden_run_return_is_reproducible() {
        use rand::Rng;
        let mut env = PendulumEnv::new(7);
        let mut rng = crate::rng::rng_for(7, 81);
        env.reset();
        let mut total = 0.0;
        for _ in 0..HORIZON {
            let action = [rng.gen_range(-2.0..2.0)];
            total += env.step(&action).unwrap().reward;
        }
        assert_eq!(total, GOLDEN_RETURN_SEED_7);
    }

    const GOLDEN_RETURN_SEED_7: f64 = -1369.5597689279375;
}
