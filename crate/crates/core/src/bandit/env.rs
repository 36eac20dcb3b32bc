//! Bernoulli reward environment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::link::mu;
use crate::types::{ArmSet, Theta};

/// Anything that can be pulled for a Bernoulli reward.
pub trait RewardSource {
    fn num_arms(&self) -> usize;
    fn pull(&mut self, arm: usize) -> Result<u8>;

    /// Pulls `arm` `n` times and returns the number of successes.
    fn pull_many(&mut self, arm: usize, n: u64) -> Result<u64> {
        let mut s = 0;
        for _ in 0..n {
            s += self.pull(arm)? as u64;
        }
        Ok(s)
    }
}

/// Rewards `Bernoulli(mu(x^T theta*))` from a seeded generator; pulls
/// consume the stream in order.
#[derive(Debug, Clone)]
pub struct Environment {
    arms: ArmSet,
    theta_star: Theta,
    means: Vec<f64>,
    rng: ChaCha8Rng,
    pulls: u64,
}

impl Environment {
    pub fn new(arms: ArmSet, theta_star: Theta, seed: u64) -> Result<Self> {
        arms.check_theta(&theta_star)?;
        let means = arms.iter().map(|a| mu(a.dot(&theta_star))).collect();
        Ok(Self {
            arms,
            theta_star,
            means,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pulls: 0,
        })
    }

    pub fn arms(&self) -> &ArmSet {
        &self.arms
    }

    pub fn theta_star(&self) -> &Theta {
        &self.theta_star
    }

    /// `mu(x^T theta*)` per arm.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Index of the best arm (lowest index among ties).
    pub fn best_arm(&self) -> usize {
        let mut best = 0;
        for i in 1..self.means.len() {
            if self.means[i] > self.means[best] {
                best = i;
            }
        }
        best
    }

    /// `mu(x*^T theta*) - mu(x^T theta*)` per arm.
    pub fn gaps(&self) -> Vec<f64> {
        let top = self.means[self.best_arm()];
        self.means.iter().map(|m| top - m).collect()
    }

    pub fn pull_count(&self) -> u64 {
        self.pulls
    }

    pub fn draw(&mut self, arm: usize) -> u8 {
        self.pulls += 1;
        self.rng.random_bool(self.means[arm]) as u8
    }
}

impl RewardSource for Environment {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn pull(&mut self, arm: usize) -> Result<u8> {
        if arm >= self.arms.len() {
            return Err(Error::InvalidArgument(format!(
                "arm index {arm} out of range"
            )));
        }
        Ok(self.draw(arm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(theta: Vec<f64>, seed: u64) -> Environment {
        let arms = ArmSet::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        Environment::new(arms, Theta::new(theta).unwrap(), seed).unwrap()
    }

    #[test]
    fn orthogonal_arm_is_fair_coin() {
        let mut e = env(vec![3.0, 0.0], 1);
        let n = 10_000;
        let s: u32 = (0..n).map(|_| e.pull(1).unwrap() as u32).sum();
        assert!((s as f64 / n as f64 - 0.5).abs() < 0.02);
        assert_eq!(e.pull_count(), n as u64);
    }

    #[test]
    fn saturated_arm_always_pays() {
        let mut e = env(vec![50.0, 0.0], 2);
        assert!((0..1000).all(|_| e.pull(0).unwrap() == 1));
    }

    #[test]
    fn seeded_streams_repeat() {
        let mut a = env(vec![0.3, -0.2], 9);
        let mut b = env(vec![0.3, -0.2], 9);
        let sa: Vec<u8> = (0..500).map(|i| a.pull(i % 2).unwrap()).collect();
        let sb: Vec<u8> = (0..500).map(|i| b.pull(i % 2).unwrap()).collect();
        assert_eq!(sa, sb);
        let mut c = env(vec![0.3, -0.2], 10);
        let sc: Vec<u8> = (0..500).map(|i| c.pull(i % 2).unwrap()).collect();
        assert_ne!(sa, sc);
    }

    #[test]
    fn gaps_and_best() {
        let e = env(vec![1.0, 2.0], 0);
        assert_eq!(e.best_arm(), 1);
        assert_eq!(e.gaps()[1], 0.0);
        assert!((e.gaps()[0] - (mu(2.0) - mu(1.0))).abs() < 1e-15);
        assert!(e.clone().pull(5).is_err());
    }
}
