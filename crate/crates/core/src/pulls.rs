use serde::{Deserialize, Serialize};

/// Aggregated fixed-design data: per-arm pull and success counts.
///
/// The Bernoulli likelihood depends on the sample only through these counts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PullLog {
    pulls: Vec<u64>,
    successes: Vec<u64>,
}

impl PullLog {
    pub fn new(k: usize) -> Self {
        Self {
            pulls: vec![0; k],
            successes: vec![0; k],
        }
    }

    /// Builds a log from explicit counts. Panics if a success count exceeds
    /// its pull count or the lengths differ.
    pub fn from_counts(pulls: Vec<u64>, successes: Vec<u64>) -> Self {
        assert_eq!(
            pulls.len(),
            successes.len(),
            "pulls/successes length mismatch"
        );
        for (p, s) in pulls.iter().zip(&successes) {
            assert!(s <= p, "successes {s} exceed pulls {p}");
        }
        Self { pulls, successes }
    }

    pub fn record(&mut self, arm: usize, reward: u8) {
        self.pulls[arm] += 1;
        self.successes[arm] += reward as u64;
    }

    pub fn record_many(&mut self, arm: usize, pulls: u64, successes: u64) {
        assert!(successes <= pulls);
        self.pulls[arm] += pulls;
        self.successes[arm] += successes;
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    /// Total pulls `t`.
    pub fn total(&self) -> u64 {
        self.pulls.iter().sum()
    }

    /// Number of distinct arms pulled at least once.
    pub fn t_eff(&self) -> usize {
        self.pulls.iter().filter(|&&p| p > 0).count()
    }

    pub fn pulled_arms(&self) -> Vec<usize> {
        (0..self.pulls.len())
            .filter(|&i| self.pulls[i] > 0)
            .collect()
    }

    /// Doubles every count; used by homogeneity checks.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            pulls: self.pulls.iter().map(|p| p * factor).collect(),
            successes: self.successes.iter().map(|s| s * factor).collect(),
        }
    }
}
