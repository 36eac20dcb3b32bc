//! Warmup procedures producing an initial estimate `theta_hat0` with
//! `max_x |x^T (theta_hat0 - theta*)| <= 1` with probability `1 - delta`.
//!
//! * [`naive_warmup`]: G design under worst-case variances `mudot(S ||x||)`.
//! * [`war`]: accept/reject probing followed by pessimistic planning.
//! * [`oracle_warmup`]: G design at the true parameter.

pub mod bernstein;
pub mod confidence;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bandit::RewardSource;
use crate::design::{
    g_optimal, naive_warmup_design, pessimistic_design, two_approx_on, DesignOptions,
    DesignSolution,
};
use crate::error::{Error, Result};
use crate::fisher::information_with_variances;
use crate::glm::{check_delta, fit_mle, gamma, MleOptions};
use crate::link::mudot;
use crate::pulls::PullLog;
use crate::types::{ArmSet, DesignWeights, Theta};

pub use bernstein::{bernstein_width, natural_bounds, ArmStats, ArmStatus, BernsteinTracker};
pub use confidence::{optimistic_mudot, pessimistic_mudot, ConfidenceSummary, TestedArm};

/// Safety cap on WAR probing iterations.
pub const MAX_WAR_ITERATIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarParams {
    /// Reject once `lo_x > l`.
    pub l: f64,
    /// Accept once `hi_x < u`.
    pub u: f64,
    /// Elimination uses `mudot(l / r)`.
    pub r: f64,
    pub delta: f64,
    pub s: f64,
    pub max_pulls_per_arm: u64,
    /// Pulls between width updates.
    pub batch: u64,
    /// Cap on total probing pulls.
    pub probe_budget: Option<u64>,
}

impl Default for WarParams {
    fn default() -> Self {
        Self {
            l: 1.0,
            u: 2.399,
            r: 2.0,
            delta: 0.05,
            s: 1.0,
            max_pulls_per_arm: 1_000_000,
            batch: 8,
            probe_budget: None,
        }
    }
}

impl WarParams {
    pub fn new(s: f64, delta: f64) -> Self {
        Self {
            s,
            delta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if !(self.l > 0.0 && self.l < self.u && self.u <= 2.399) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < L < U <= 2.399, got L={}, U={}",
                self.l, self.u
            )));
        }
        if !(self.r > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need r > 1, got {}",
                self.r
            )));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need S > 0, got {}",
                self.s
            )));
        }
        if self.batch == 0 || self.max_pulls_per_arm == 0 {
            return Err(Error::InvalidArgument(
                "batch and max_pulls_per_arm must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One accept/reject outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub iteration: usize,
    pub arm: usize,
    pub status: ArmStatus,
    pub pulls: u64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupReport {
    pub method: String,
    pub theta_hat0: Theta,
    pub samples_probing: u64,
    pub samples_planning: u64,
    pub total: u64,
    pub iterations: usize,
    pub decisions: Vec<Decision>,
    /// Planning design and its objective value.
    pub design: DesignWeights,
    pub objective: f64,
    /// `objective * gamma(d, K, delta)` before rounding up.
    pub planning_count_real: f64,
    pub planning_log: PullLog,
    pub mle_converged: bool,
}

/// `objective * gamma(d, t_eff, delta)`, no integer rounding.
pub fn warmup_sample_count(
    design: &DesignSolution,
    d: usize,
    t_eff: usize,
    delta: f64,
) -> Result<f64> {
    Ok(design.objective * gamma(d, t_eff, delta)?)
}

/// Pulls `arm` in batches until `hi < U` (accept) or `lo > L` (reject).
pub fn decide_arm<E: RewardSource + ?Sized>(
    env: &mut E,
    arm: usize,
    tracker: &mut BernsteinTracker,
    params: &WarParams,
) -> Result<ArmStatus> {
    if tracker.status(arm) != ArmStatus::Undecided {
        return Err(Error::InvalidArgument(format!("arm {arm} already decided")));
    }
    loop {
        let st = *tracker.stats(arm);
        if st.pulls > 0 {
            if st.hi < params.u {
                tracker.set_status(arm, ArmStatus::Accepted);
                return Ok(ArmStatus::Accepted);
            }
            if st.lo > params.l {
                tracker.set_status(arm, ArmStatus::Rejected);
                return Ok(ArmStatus::Rejected);
            }
        }
        if st.pulls >= params.max_pulls_per_arm {
            warn!("arm {arm} undecided after {} pulls; rejecting", st.pulls);
            tracker.set_status(arm, ArmStatus::Rejected);
            return Ok(ArmStatus::Rejected);
        }
        let mut n = params.batch.min(params.max_pulls_per_arm - st.pulls);
        if let Some(b) = params.probe_budget {
            let used = tracker.total_pulls();
            if used >= b {
                return Err(Error::BudgetExhausted { used });
            }
            n = n.min(b - used);
        }
        let s = env.pull_many(arm, n)?;
        tracker.record(arm, n, s);
    }
}

/// Pulls `ceil(lam_x * count)` per arm.
fn pull_plan<E: RewardSource + ?Sized>(
    env: &mut E,
    lam: &DesignWeights,
    count: f64,
) -> Result<PullLog> {
    let mut log = PullLog::new(lam.len());
    for i in lam.support() {
        let n = (lam.get(i) * count).ceil() as u64;
        let s = env.pull_many(i, n)?;
        log.record_many(i, n, s);
    }
    Ok(log)
}

struct Planned {
    theta: Theta,
    log: PullLog,
    count_real: f64,
    converged: bool,
}

fn plan_and_fit<E: RewardSource + ?Sized>(
    env: &mut E,
    arms: &ArmSet,
    sol: &DesignSolution,
    delta: f64,
    cap: Option<f64>,
) -> Result<Planned> {
    let count_real = warmup_sample_count(sol, arms.dim(), arms.len(), delta)?;
    let log = pull_plan(env, &sol.weights, count_real)?;
    let opts = MleOptions {
        norm_cap: cap,
        ..Default::default()
    };
    let fit = fit_mle(arms, &log, &opts)?;
    if !fit.converged {
        warn!(
            "warmup MLE stopped with gradient norm {:.3e}",
            fit.grad_norm
        );
    }
    Ok(Planned {
        theta: fit.theta_hat,
        log,
        count_real,
        converged: fit.converged,
    })
}

fn report(
    method: &str,
    sol: DesignSolution,
    p: Planned,
    probing: u64,
    iterations: usize,
    decisions: Vec<Decision>,
) -> WarmupReport {
    let planning = p.log.total();
    WarmupReport {
        method: method.to_string(),
        theta_hat0: p.theta,
        samples_probing: probing,
        samples_planning: planning,
        total: probing + planning,
        iterations,
        decisions,
        design: sol.weights,
        objective: sol.objective,
        planning_count_real: p.count_real,
        planning_log: p.log,
        mle_converged: p.converged,
    }
}

/// Pulls `ceil(lam_x g gamma(d))` under the worst-case variances `mudot(S ||x||)`.
pub fn naive_warmup<E: RewardSource + ?Sized>(
    env: &mut E,
    arms: &ArmSet,
    s: f64,
    delta: f64,
    opts: &DesignOptions,
) -> Result<WarmupReport> {
    check_delta(delta)?;
    let sol = naive_warmup_design(arms, s, opts)?;
    let p = plan_and_fit(env, arms, &sol, delta, Some(s))?;
    Ok(report("naive", sol, p, 0, 0, Vec::new()))
}

/// G design at the true parameter; a lower reference for the other warmups.
pub fn oracle_warmup<E: RewardSource + ?Sized>(
    env: &mut E,
    arms: &ArmSet,
    theta_true: &Theta,
    delta: f64,
    opts: &DesignOptions,
) -> Result<WarmupReport> {
    check_delta(delta)?;
    let sol = g_optimal(arms, &arms.all_indices(), theta_true, opts)?;
    let cap = Some(theta_true.norm()).filter(|s| *s > 0.0);
    let p = plan_and_fit(env, arms, &sol, delta, cap)?;
    Ok(report("oracle", sol, p, 0, 0, Vec::new()))
}

/// Warmup by accepts and rejects.
///
/// Each iteration computes a 2-approximate design on the surviving arms,
/// decides its undecided support arms, stops once the whole support is
/// accepted, and otherwise drops arms whose optimistic variance is at most
/// `mudot(L / r)`. Planning then solves the G design under pessimistic
/// variances. The estimate uses the planning samples only.
pub fn war<E: RewardSource + ?Sized>(
    env: &mut E,
    arms: &ArmSet,
    params: &WarParams,
    opts: &DesignOptions,
) -> Result<WarmupReport> {
    params.validate()?;
    let d = arms.dim();
    if arms.rank_of(&arms.all_indices()) < d {
        return Err(Error::RankDeficient {
            d,
            rank: arms.rank_of(&arms.all_indices()),
        });
    }
    let k = arms.len();
    let mut tracker = BernsteinTracker::new(k, params.delta);
    let mut survivors = arms.all_indices();
    let mut decisions = Vec::new();
    let threshold = mudot(params.l / params.r);
    let mut iterations = 0;
    let mut done = false;
    while iterations < MAX_WAR_ITERATIONS {
        iterations += 1;
        let rank = arms.rank_of(&survivors);
        if rank < d {
            warn!("WAR survivors span rank {rank} < {d}; planning over all arms");
            done = true;
            break;
        }
        let accepted: Vec<bool> = (0..k)
            .map(|i| tracker.status(i) == ArmStatus::Accepted)
            .collect();
        let support = two_approx_on(arms, &survivors, Some(&accepted))?.support();
        for &i in &support {
            if tracker.status(i) == ArmStatus::Undecided {
                let status = decide_arm(env, i, &mut tracker, params)?;
                let st = tracker.stats(i);
                decisions.push(Decision {
                    iteration: iterations,
                    arm: i,
                    status,
                    pulls: st.pulls,
                    lo: st.lo,
                    hi: st.hi,
                });
            }
        }
        if support
            .iter()
            .all(|&i| tracker.status(i) == ArmStatus::Accepted)
        {
            done = true;
            break;
        }
        let summary = ConfidenceSummary::from_tracker(arms, &tracker, params.s)?;
        let before = survivors.len();
        survivors.retain(|&i| optimistic_mudot(arms.get(i), &summary) > threshold);
        if survivors.is_empty() {
            warn!("WAR eliminated every arm; planning over all arms");
            done = true;
            break;
        }
        debug_assert!(survivors.len() < before);
    }
    if !done {
        return Err(Error::LoopCap(MAX_WAR_ITERATIONS));
    }
    let summary = ConfidenceSummary::from_tracker(arms, &tracker, params.s)?;
    let pes: Vec<f64> = arms
        .iter()
        .map(|x| pessimistic_mudot(x, &summary))
        .collect();
    let mut sol = pessimistic_design(arms, &pes, opts)?;
    // pes >= mudot(S ||x||), so the naive design scores no worse under pes
    // than under the naive variances; keep it when the solver's tolerance
    // left the pessimistic solution behind.
    let naive = naive_warmup_design(arms, params.s, opts)?;
    let info = information_with_variances(arms, naive.weights.as_slice(), &pes);
    if let Ok(f) = info.factor(0.0) {
        let obj = arms
            .iter()
            .map(|x| f.inv_quad(x.coords()))
            .fold(0.0, f64::max);
        if obj < sol.objective {
            sol = DesignSolution {
                objective: obj,
                ..naive
            };
        }
    }
    let p = plan_and_fit(env, arms, &sol, params.delta, Some(params.s))?;
    Ok(report(
        "war",
        sol,
        p,
        tracker.total_pulls(),
        iterations,
        decisions,
    ))
}
