//! Per-pull pseudo-regret accounting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which part of a policy produced a pull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Warmup,
    Explore,
    Round(u32),
    Commit,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Warmup => write!(f, "warmup"),
            Phase::Explore => write!(f, "explore"),
            Phase::Round(k) => write!(f, "round{k}"),
            Phase::Commit => write!(f, "commit"),
        }
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warmup" => Ok(Phase::Warmup),
            "explore" => Ok(Phase::Explore),
            "commit" => Ok(Phase::Commit),
            _ => s
                .strip_prefix("round")
                .and_then(|k| k.parse().ok())
                .map(Phase::Round)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown phase '{s}'"))),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub arm: u32,
    pub reward: u8,
    pub regret: f64,
    pub phase: Phase,
}

/// Sequence of pulls with instantaneous and cumulative pseudo-regret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    gaps: Vec<f64>,
    entries: Vec<LedgerEntry>,
    cum: Vec<f64>,
}

/// A point on a downsampled regret curve; `t` counts pulls from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub cum_regret: f64,
    pub phase: Phase,
}

impl RegretLedger {
    /// `gaps[x] = mu(x*^T theta*) - mu(x^T theta*)`.
    pub fn new(gaps: Vec<f64>) -> Self {
        assert!(gaps.iter().all(|g| *g >= 0.0), "gaps must be nonnegative");
        Self {
            gaps,
            entries: Vec::new(),
            cum: Vec::new(),
        }
    }

    pub fn with_capacity(gaps: Vec<f64>, n: usize) -> Self {
        let mut l = Self::new(gaps);
        l.entries.reserve(n);
        l.cum.reserve(n);
        l
    }

    pub fn record(&mut self, arm: usize, reward: u8, phase: Phase) {
        let regret = self.gaps[arm];
        let prev = self.cum.last().copied().unwrap_or(0.0);
        self.entries.push(LedgerEntry {
            arm: arm as u32,
            reward,
            regret,
            phase,
        });
        self.cum.push(prev + regret);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// `R_t` after each pull.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn final_regret(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Regret accrued over pulls `[from, to)`.
    pub fn regret_between(&self, from: usize, to: usize) -> f64 {
        let at = |i: usize| if i == 0 { 0.0 } else { self.cum[i - 1] };
        at(to) - at(from)
    }

    pub fn pull_counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.gaps.len()];
        for e in &self.entries {
            c[e.arm as usize] += 1;
        }
        c
    }

    /// `sum_x gap_x T_x` from the pull counts.
    pub fn regret_from_counts(&self) -> f64 {
        self.pull_counts()
            .iter()
            .zip(&self.gaps)
            .map(|(&n, g)| n as f64 * g)
            .sum()
    }

    pub fn phase_count(&self, pred: impl Fn(Phase) -> bool) -> u64 {
        self.entries.iter().filter(|e| pred(e.phase)).count() as u64
    }

    /// At most `max_points` evenly spaced points; the last pull is always kept.
    pub fn downsample(&self, max_points: usize) -> Vec<CurvePoint> {
        let n = self.entries.len();
        if n == 0 || max_points == 0 {
            return Vec::new();
        }
        let point = |i: usize| CurvePoint {
            t: i as u64 + 1,
            cum_regret: self.cum[i],
            phase: self.entries[i].phase,
        };
        if n <= max_points {
            return (0..n).map(point).collect();
        }
        let mut out: Vec<CurvePoint> = (1..=max_points)
            .map(|j| point((j * n).div_ceil(max_points) - 1))
            .collect();
        out.dedup_by_key(|p| p.t);
        out
    }
}
