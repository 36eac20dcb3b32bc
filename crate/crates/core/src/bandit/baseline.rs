//! Simple comparison policies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::env::{Environment, RewardSource};
use super::ledger::{Phase, RegretLedger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Baseline {
    /// Round-robin over all arms.
    Uniform,
    /// `m` pulls per arm round-robin, then the empirical best.
    Etc { m: u64 },
}

impl Baseline {
    pub fn name(&self) -> String {
        match self {
            Baseline::Uniform => "uniform".into(),
            Baseline::Etc { m } => format!("etc{m}"),
        }
    }
}

pub fn baseline_policy(
    kind: Baseline,
    env: &mut Environment,
    horizon: u64,
) -> Result<RegretLedger> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let k = env.num_arms();
    let mut ledger = RegretLedger::with_capacity(env.gaps(), horizon as usize);
    match kind {
        Baseline::Uniform => {
            for t in 0..horizon {
                let arm = (t % k as u64) as usize;
                let r = env.pull(arm)?;
                ledger.record(arm, r, Phase::Explore);
            }
        }
        Baseline::Etc { m } => {
            if m == 0 {
                return Err(Error::InvalidArgument("etc needs m >= 1".into()));
            }
            let explore = (m * k as u64).min(horizon);
            let mut wins = vec![0u64; k];
            let mut pulls = vec![0u64; k];
            for t in 0..explore {
                let arm = (t % k as u64) as usize;
                let r = env.pull(arm)?;
                wins[arm] += r as u64;
                pulls[arm] += 1;
                ledger.record(arm, r, Phase::Explore);
            }
            let mean = |i: usize| {
                if pulls[i] == 0 {
                    -1.0
                } else {
                    wins[i] as f64 / pulls[i] as f64
                }
            };
            let best = (0..k).fold(0, |b, i| if mean(i) > mean(b) { i } else { b });
            for _ in explore..horizon {
                let r = env.pull(best)?;
                ledger.record(best, r, Phase::Commit);
            }
        }
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ArmSet, Theta};

    fn instance(seed: u64) -> Environment {
        let arms =
            ArmSet::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-0.6, 0.8]]).unwrap();
        Environment::new(arms, Theta::new(vec![2.0, 0.5]).unwrap(), seed).unwrap()
    }

    #[test]
    fn uniform_regret_matches_mean_gap() {
        let mut env = instance(1);
        let gaps = env.gaps();
        let mean_gap = gaps.iter().sum::<f64>() / 3.0;
        let l = baseline_policy(Baseline::Uniform, &mut env, 100_000).unwrap();
        assert_eq!(l.len(), 100_000);
        assert!((l.final_regret() - 100_000.0 * mean_gap).abs() <= 0.05 * 100_000.0 * mean_gap);
    }

    #[test]
    fn etc_commits_after_exploring() {
        let mut env = instance(2);
        let l = baseline_policy(Baseline::Etc { m: 200 }, &mut env, 10_000).unwrap();
        assert_eq!(l.phase_count(|p| p == Phase::Explore), 600);
        let tail: Vec<u32> = l.entries()[600..].iter().map(|e| e.arm).collect();
        assert!(tail.iter().all(|&a| a == 0));
    }

    #[test]
    fn etc_with_huge_m_is_uniform() {
        let a = baseline_policy(Baseline::Etc { m: 1_000_000 }, &mut instance(3), 5000).unwrap();
        let b = baseline_policy(Baseline::Uniform, &mut instance(3), 5000).unwrap();
        let arms = |l: &RegretLedger| l.entries().iter().map(|e| e.arm).collect::<Vec<_>>();
        assert_eq!(arms(&a), arms(&b));
        assert_eq!(a.final_regret(), b.final_regret());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(baseline_policy(Baseline::Etc { m: 0 }, &mut instance(0), 10).is_err());
        assert!(baseline_policy(Baseline::Uniform, &mut instance(0), 0).is_err());
    }
}
