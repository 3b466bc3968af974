//! Diagonal Gaussian action distribution.

use alloc::format;
use alloc::vec::Vec;

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, CoreError, Result};

/// A diagonal Gaussian over actions; `std` is elementwise positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDist {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl GaussianDist {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(invalid("GaussianDist: mean/std length mismatch"));
        }
        if std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(CoreError::Domain(format!("GaussianDist: std not positive: {std:?}")));
        }
        Ok(GaussianDist { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Joint log density of `action` under the diagonal Gaussian.
    pub fn log_prob(&self, action: &[f64]) -> Result<f64> {
        if action.len() != self.dim() {
            return Err(invalid("log_prob: action dimension mismatch"));
        }
        let mut lp = 0.0;
        for i in 0..self.dim() {
            let z = (action[i] - self.mean[i]) / self.std[i];
            lp += -0.5 * z * z - self.std[i].ln() - 0.5 * (2.0 * PI).ln();
        }
        Ok(lp)
    }

    /// Reparameterized draw `mean + std * z`, `z` standard normal.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.mean[i] + self.std[i] * standard_normal(rng))
            .collect()
    }

    /// Differential entropy `sum_i (ln std_i + (1 + ln 2 pi) / 2)`.
    pub fn entropy(&self) -> f64 {
        self.std
            .iter()
            .map(|s| s.ln() + 0.5 * (1.0 + (2.0 * PI).ln()))
            .sum()
    }
}

/// `KL(a || b)` for diagonal Gaussians, in closed form.
pub fn kl(a: &GaussianDist, b: &GaussianDist) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(invalid("kl: dimension mismatch"));
    }
    let mut total = 0.0;
    for i in 0..a.dim() {
        let (sa, sb) = (a.std[i], b.std[i]);
        let dm = a.mean[i] - b.mean[i];
        total += (sb / sa).ln() + (sa * sa + dm * dm) / (2.0 * sb * sb) - 0.5;
    }
    Ok(total)
}

/// One standard normal draw via Box-Muller; consumes exactly two uniforms,
/// which keeps rollout RNG streams easy to reason about.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
