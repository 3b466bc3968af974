//! Welford running statistics, per tracked dimension.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Streaming mean/variance with an exact merge (Chan's parallel update), so
/// stats of merged streams equal stats of the concatenated stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    pub fn new(dim: usize) -> Self {
        RunningStats { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, sample: &[f64]) {
        debug_assert_eq!(sample.len(), self.dim());
        self.count += 1;
        let n = self.count as f64;
        for i in 0..self.mean.len() {
            let delta = sample[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (sample[i] - self.mean[i]);
        }
    }

    pub fn push_scalar(&mut self, x: f64) {
        self.push(&[x]);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        debug_assert_eq!(self.dim(), other.dim());
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Population variance; zero before the first sample.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.dim()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|m2| (m2 / n).max(0.0)).collect()
    }

    /// `sqrt(var + 1e-8)`, the denominator used for normalization.
    pub fn normalization_std(&self) -> Vec<f64> {
        self.variance().iter().map(|v| (v + 1e-8).sqrt()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn matches_direct_computation() {
        let data = [1.0, 4.0, -2.0, 7.5, 0.25];
        let mut stats = RunningStats::new(1);
        for &x in &data {
            stats.push_scalar(x);
        }
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / data.len() as f64;
        assert_abs_diff_eq!(stats.mean()[0], mean, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.variance()[0], var, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn merge_equals_concatenation(
            a in proptest::collection::vec(-100.0f64..100.0, 1..40),
            b in proptest::collection::vec(-100.0f64..100.0, 0..40),
        ) {
            let mut left = RunningStats::new(1);
            for &x in &a {
                left.push_scalar(x);
            }
            let mut right = RunningStats::new(1);
            for &x in &b {
                right.push_scalar(x);
            }
            let mut concat = RunningStats::new(1);
            for &x in a.iter().chain(&b) {
                concat.push_scalar(x);
            }
            left.merge(&right);
            prop_assert_eq!(left.count(), concat.count());
            prop_assert!((left.mean()[0] - concat.mean()[0]).abs() <= 1e-10);
            prop_assert!((left.variance()[0] - concat.variance()[0]).abs() <= 1e-10);
            prop_assert!(left.variance()[0] >= 0.0);
        }
    }
}
