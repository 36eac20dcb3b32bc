//! Anytime empirical-Bernstein tracking of per-arm natural-parameter bounds.

use serde::{Deserialize, Serialize};

use crate::link::logit;

const CLAMP: f64 = 1e-12;

/// `sqrt(2 mu_hat (1 - mu_hat) c / N) + 3 c / N` with
/// `c = ln(3 / delta_N)`, `delta_N = delta / (K N (N + 1))`.
pub fn bernstein_width(mu_hat: f64, n: u64, delta: f64, k: usize) -> f64 {
    assert!(n >= 1, "bernstein_width needs N >= 1");
    let nf = n as f64;
    let c = (3.0 * k as f64 * nf * (nf + 1.0) / delta).ln();
    (2.0 * mu_hat * (1.0 - mu_hat) * c / nf).sqrt() + 3.0 * c / nf
}

/// Bounds on `|x^T theta*|` from the mean interval `[mu_hat - W, mu_hat + W]`.
pub fn natural_bounds(mu_hat: f64, w: f64) -> (f64, f64) {
    let a = logit((mu_hat - w).clamp(CLAMP, 1.0 - CLAMP));
    let b = logit((mu_hat + w).clamp(CLAMP, 1.0 - CLAMP));
    let lo = if a <= 0.0 && b >= 0.0 {
        0.0
    } else {
        a.abs().min(b.abs())
    };
    (lo, a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmStatus {
    Undecided,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub pulls: u64,
    pub successes: u64,
    pub width: f64,
    pub lo: f64,
    pub hi: f64,
    pub status: ArmStatus,
}

impl ArmStats {
    fn fresh() -> Self {
        Self {
            pulls: 0,
            successes: 0,
            width: f64::INFINITY,
            lo: 0.0,
            hi: f64::INFINITY,
            status: ArmStatus::Undecided,
        }
    }

    pub fn mu_hat(&self) -> f64 {
        if self.pulls == 0 {
            0.5
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }
}

/// Per-arm anytime statistics for the accept/reject tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinTracker {
    delta: f64,
    arms: Vec<ArmStats>,
}

impl BernsteinTracker {
    pub fn new(k: usize, delta: f64) -> Self {
        Self {
            delta,
            arms: vec![ArmStats::fresh(); k],
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn stats(&self, arm: usize) -> &ArmStats {
        &self.arms[arm]
    }

    pub fn status(&self, arm: usize) -> ArmStatus {
        self.arms[arm].status
    }

    /// Adds observations and refreshes the width and bounds.
    pub fn record(&mut self, arm: usize, pulls: u64, successes: u64) {
        let k = self.arms.len();
        let a = &mut self.arms[arm];
        a.pulls += pulls;
        a.successes += successes;
        if a.pulls > 0 {
            a.width = bernstein_width(a.mu_hat(), a.pulls, self.delta, k);
            let (lo, hi) = natural_bounds(a.mu_hat(), a.width);
            a.lo = lo;
            a.hi = hi;
        }
    }

    /// One-way transition out of `Undecided`.
    pub fn set_status(&mut self, arm: usize, status: ArmStatus) {
        let a = &mut self.arms[arm];
        assert!(
            a.status == ArmStatus::Undecided || a.status == status,
            "arm decisions are final"
        );
        a.status = status;
    }

    /// Arms pulled at least once.
    pub fn tested(&self) -> Vec<usize> {
        (0..self.arms.len())
            .filter(|&i| self.arms[i].pulls > 0)
            .collect()
    }

    pub fn total_pulls(&self) -> u64 {
        self.arms.iter().map(|a| a.pulls).sum()
    }
}
