//! Rounding a continuous design to integer pull counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::DesignWeights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingPlan {
    pub counts: Vec<u64>,
    pub n: u64,
    pub eps: f64,
}

impl RoundingPlan {
    pub fn support(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&i| self.counts[i] > 0)
            .collect()
    }
}

/// Minimum budget `r(eps) = ceil(p (1 + eps) / eps)` for a support of size `p`.
pub fn min_budget(support_size: usize, eps: f64) -> u64 {
    (support_size as f64 * (1.0 + eps) / eps).ceil() as u64
}

/// `counts_x = ceil(n lam_x / (1 + eps))` on the support, then the leftover
/// pulls go one at a time to support arms in descending weight order.
pub fn round_design(n: u64, lam: &DesignWeights, eps: f64) -> Result<RoundingPlan> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let support = lam.support();
    let required = min_budget(support.len(), eps);
    if n < required {
        return Err(Error::BudgetTooSmall { n, required });
    }
    let mut counts = vec![0u64; lam.len()];
    for &i in &support {
        counts[i] = (n as f64 * lam.get(i) / (1.0 + eps)).ceil() as u64;
    }
    let used: u64 = counts.iter().sum();
    if used > n {
        // only reachable through floating-point noise at n == r(eps)
        return Err(Error::BudgetTooSmall { n, required: used });
    }
    let mut order = support.clone();
    order.sort_by(|&a, &b| lam.get(b).total_cmp(&lam.get(a)).then(a.cmp(&b)));
    let mut left = n - used;
    let rounds = left / order.len() as u64;
    for &i in &order {
        counts[i] += rounds;
    }
    left -= rounds * order.len() as u64;
    for &i in order.iter().take(left as usize) {
        counts[i] += 1;
    }
    Ok(RoundingPlan { counts, n, eps })
}
