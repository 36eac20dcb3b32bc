//! HOMER: phased elimination with mixed H- and G-optimal designs.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::design::{
    g_optimal, h_optimal, min_budget, mix_designs, round_design, DesignOptions, DesignSolution,
};
use crate::error::{Error, Result};
use crate::glm::{check_delta, fit_mle, gamma, MleOptions};
use crate::link::mu;
use crate::pulls::PullLog;
use crate::types::{ArmSet, DesignWeights, Theta};
use crate::warmup::{naive_warmup, oracle_warmup, war, WarParams, WarmupReport};

use super::env::{Environment, RewardSource};
use super::ledger::{Phase, RegretLedger};

/// `6.1^2 * 3^3`.
const H_CONSTANT: f64 = 37.21 * 27.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmupChoice {
    Naive,
    War,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomerParams {
    pub delta: f64,
    pub eps: f64,
    /// Norm bound used by the warmup and as the MLE cap.
    pub s: f64,
    pub warmup: WarmupChoice,
    pub war: WarParams,
    pub design: DesignOptions,
}

impl HomerParams {
    pub fn new(s: f64, delta: f64, eps: f64, warmup: WarmupChoice) -> Self {
        Self {
            delta,
            eps,
            s,
            warmup,
            war: WarParams::new(s, delta),
            design: DesignOptions::default(),
        }
    }
}

/// `delta_k = delta / (4 (2 + K) K k^2)`.
pub fn round_delta(delta: f64, k: u32, num_arms: usize) -> f64 {
    let kf = num_arms as f64;
    delta / (4.0 * (2.0 + kf) * kf * (k as f64).powi(2))
}

/// `ceil(6 (1 + eps) 6.1^2 3^3 4^k h ln(1/delta_k))`.
pub fn h_budget(k: u32, h: f64, delta_k: f64, eps: f64) -> u64 {
    (6.0 * (1.0 + eps) * H_CONSTANT * 4f64.powi(k as i32) * h * (1.0 / delta_k).ln()).ceil() as u64
}

/// `ceil(6 (1 + eps) gamma(d, |X_k|, delta_k) g)`.
pub fn g_budget(d: usize, active: usize, g: f64, delta_k: f64, eps: f64) -> Result<u64> {
    Ok((6.0 * (1.0 + eps) * gamma(d, active, delta_k)? * g).ceil() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomerBudgets {
    pub delta_k: f64,
    pub lam_h: DesignSolution,
    pub lam_g: DesignSolution,
    pub n_h: u64,
    pub n_g: u64,
}

/// Designs on `active` at `theta_prev` and the round budgets.
pub fn homer_budgets(
    k: u32,
    active: &[usize],
    theta_prev: &Theta,
    delta: f64,
    eps: f64,
    arms: &ArmSet,
    opts: &DesignOptions,
) -> Result<HomerBudgets> {
    check_delta(delta)?;
    if k == 0 {
        return Err(Error::InvalidArgument("rounds are numbered from 1".into()));
    }
    let mut opts = *opts;
    if arms.rank_of(active) < arms.dim() {
        debug!("round {k}: active arms do not span; solving on their span");
        opts = opts.rank_deficient_ok();
    }
    let delta_k = round_delta(delta, k, arms.len());
    let lam_h = h_optimal(arms, active, theta_prev, &opts)?;
    let lam_g = g_optimal(arms, active, theta_prev, &opts)?;
    let n_h = h_budget(k, lam_h.objective, delta_k, eps);
    let n_g = g_budget(arms.dim(), active.len(), lam_g.objective, delta_k, eps)?;
    Ok(HomerBudgets {
        delta_k,
        lam_h,
        lam_g,
        n_h,
        n_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomerState {
    pub k: u32,
    pub active: Vec<usize>,
    pub theta_prev: Theta,
    pub delta_k: f64,
    pub n_h: u64,
    pub n_g: u64,
    pub n_k: u64,
    pub samples: PullLog,
}

impl HomerState {
    pub fn new(arms: &ArmSet, theta0: Theta) -> Self {
        Self {
            k: 1,
            active: arms.all_indices(),
            theta_prev: theta0,
            delta_k: 0.0,
            n_h: 0,
            n_g: 0,
            n_k: 0,
            samples: PullLog::new(arms.len()),
        }
    }
}

/// Environment wrapper that writes every pull into the ledger and stops
/// at the horizon.
pub struct Recorder<'a> {
    env: &'a mut Environment,
    ledger: &'a mut RegretLedger,
    horizon: u64,
    pub phase: Phase,
}

impl<'a> Recorder<'a> {
    pub fn new(env: &'a mut Environment, ledger: &'a mut RegretLedger, horizon: u64) -> Self {
        Self {
            env,
            ledger,
            horizon,
            phase: Phase::Warmup,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.horizon - self.ledger.len() as u64
    }
}

impl RewardSource for Recorder<'_> {
    fn num_arms(&self) -> usize {
        self.env.num_arms()
    }

    fn pull(&mut self, arm: usize) -> Result<u8> {
        if self.remaining() == 0 {
            return Err(Error::BudgetExhausted { used: self.horizon });
        }
        let r = self.env.pull(arm)?;
        self.ledger.record(arm, r, self.phase);
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundSummary {
    pub k: u32,
    pub active_before: Vec<usize>,
    pub active_after: Vec<usize>,
    pub n_h: u64,
    pub n_g: u64,
    pub n_k: u64,
    pub h_hat: f64,
    pub g_hat: f64,
    pub theta_hat: Theta,
    pub samples: PullLog,
}

/// One round: budgets, mixing, rounding, pulls, MLE on this round's
/// samples, and elimination of arms `2 * 2^-k` below the empirical best.
pub fn homer_round(
    state: &mut HomerState,
    env: &mut Recorder<'_>,
    arms: &ArmSet,
    params: &HomerParams,
) -> Result<RoundSummary> {
    if state.active.len() < 2 {
        return Err(Error::InvalidArgument(
            "a round needs at least two active arms".into(),
        ));
    }
    let k = state.k;
    let b = homer_budgets(
        k,
        &state.active,
        &state.theta_prev,
        params.delta,
        params.eps,
        arms,
        &params.design,
    )?;
    let lam = mix_designs(&b.lam_h.weights, b.n_h, &b.lam_g.weights, b.n_g)?;
    let n_k = (b.n_h + b.n_g).max(min_budget(lam.support().len(), params.eps));
    state.delta_k = b.delta_k;
    state.n_h = b.n_h;
    state.n_g = b.n_g;
    state.n_k = n_k;
    let plan = round_design(n_k, &lam, params.eps)?;
    state.samples = PullLog::new(arms.len());
    env.phase = Phase::Round(k);
    for arm in interleave(&plan.counts) {
        let r = env.pull(arm)?;
        state.samples.record(arm, r);
    }
    let fit = fit_mle(
        arms,
        &state.samples,
        &MleOptions::default().with_cap(params.s),
    )?;
    if !fit.converged {
        warn!("round {k}: MLE gradient norm {:.3e}", fit.grad_norm);
    }
    let before = state.active.clone();
    state.active = eliminate(arms, &before, &fit.theta_hat, 2.0 * 0.5f64.powi(k as i32));
    state.theta_prev = fit.theta_hat.clone();
    state.k += 1;
    Ok(RoundSummary {
        k,
        active_before: before,
        active_after: state.active.clone(),
        n_h: b.n_h,
        n_g: b.n_g,
        n_k,
        h_hat: b.lam_h.objective,
        g_hat: b.lam_g.objective,
        theta_hat: fit.theta_hat,
        samples: state.samples.clone(),
    })
}

/// Pull order spreading each arm's `n_x` pulls evenly over the round: the
/// `j`-th pull of arm `x` is placed at `(j + 1/2) / n_x`, ties to the lower
/// index.
pub fn interleave(counts: &[u64]) -> impl Iterator<Item = usize> + '_ {
    let mut heap: BinaryHeap<Reverse<Slot>> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(arm, &n)| Reverse(Slot { j: 0, n, arm }))
        .collect();
    std::iter::from_fn(move || {
        let Reverse(s) = heap.pop()?;
        if s.j + 1 < s.n {
            heap.push(Reverse(Slot { j: s.j + 1, ..s }));
        }
        Some(s.arm)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    j: u64,
    n: u64,
    arm: usize,
}

impl Ord for Slot {
    fn cmp(&self, o: &Self) -> Ordering {
        // (2j + 1) / (2n) compared exactly
        let a = (2 * self.j as u128 + 1) * o.n as u128;
        let b = (2 * o.j as u128 + 1) * self.n as u128;
        a.cmp(&b).then(self.arm.cmp(&o.arm))
    }
}

impl PartialOrd for Slot {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Keeps arms whose plug-in mean is within `threshold` of the best.
fn eliminate(arms: &ArmSet, active: &[usize], theta: &Theta, threshold: f64) -> Vec<usize> {
    let means: Vec<f64> = active.iter().map(|&i| mu(arms.get(i).dot(theta))).collect();
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    active
        .iter()
        .zip(&means)
        .filter(|(_, m)| top - **m < threshold)
        .map(|(&i, _)| i)
        .collect()
}

/// Active arm with the largest plug-in mean, lowest index among ties.
fn empirical_best(arms: &ArmSet, active: &[usize], theta: &Theta) -> usize {
    let mut best = active[0];
    for &i in &active[1..] {
        if arms.get(i).dot(theta) > arms.get(best).dot(theta) {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomerRun {
    pub ledger: RegretLedger,
    pub warmup: Option<WarmupReport>,
    pub rounds: Vec<RoundSummary>,
    pub committed_to: Option<usize>,
    /// Whether the best arm was active after every completed round.
    pub best_survived: bool,
    pub truncated: bool,
}

/// Warmup, rounds until one arm is left or the horizon is reached, then
/// the survivor for the remaining pulls. Internal errors end the rounds
/// and commit to the current empirical best.
pub fn run_homer(env: &mut Environment, horizon: u64, params: &HomerParams) -> Result<HomerRun> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    check_delta(params.delta)?;
    let arms = env.arms().clone();
    let best = env.best_arm();
    let theta_star = env.theta_star().clone();
    let mut ledger = RegretLedger::with_capacity(env.gaps(), horizon as usize);
    let mut rec = Recorder::new(env, &mut ledger, horizon);
    let mut warmup = None;
    let mut rounds = Vec::new();
    let mut truncated = false;
    let mut state = HomerState::new(&arms, Theta::zeros(arms.dim()));

    if arms.len() > 1 {
        let wres = match params.warmup {
            WarmupChoice::Naive => {
                naive_warmup(&mut rec, &arms, params.s, params.delta, &params.design)
            }
            WarmupChoice::War => war(&mut rec, &arms, &params.war, &params.design),
            WarmupChoice::Oracle => {
                oracle_warmup(&mut rec, &arms, &theta_star, params.delta, &params.design)
            }
        };
        match wres {
            Ok(r) => {
                state.theta_prev = r.theta_hat0.clone();
                warmup = Some(r);
            }
            Err(Error::BudgetExhausted { .. }) => truncated = true,
            Err(e) => warn!("warmup failed ({e}); committing"),
        }
        if warmup.is_some() {
            while state.active.len() > 1 {
                match homer_round(&mut state, &mut rec, &arms, params) {
                    Ok(s) => rounds.push(s),
                    Err(Error::BudgetExhausted { .. }) => {
                        truncated = true;
                        break;
                    }
                    Err(e) => {
                        warn!("round {} failed ({e}); committing", state.k);
                        break;
                    }
                }
            }
        }
    }

    let mut committed_to = None;
    if rec.remaining() > 0 {
        let arm = if warmup.is_some() || arms.len() == 1 {
            empirical_best(&arms, &state.active, &state.theta_prev)
        } else {
            raw_best(rec.ledger)
        };
        rec.phase = Phase::Commit;
        let n = rec.remaining();
        rec.pull_many(arm, n)?;
        committed_to = Some(arm);
    }
    let best_survived = rounds.iter().all(|r| r.active_after.contains(&best));
    Ok(HomerRun {
        ledger,
        warmup,
        rounds,
        committed_to,
        best_survived,
        truncated,
    })
}

/// Highest empirical mean over pulled arms, or arm 0 if nothing was pulled.
fn raw_best(ledger: &RegretLedger) -> usize {
    let k = ledger.gaps().len();
    let mut n = vec![0u64; k];
    let mut s = vec![0u64; k];
    for e in ledger.entries() {
        n[e.arm as usize] += 1;
        s[e.arm as usize] += e.reward as u64;
    }
    let mean = |i: usize| {
        if n[i] == 0 {
            f64::NEG_INFINITY
        } else {
            s[i] as f64 / n[i] as f64
        }
    };
    (0..k).fold(0, |b, i| if mean(i) > mean(b) { i } else { b })
}

/// Weights of the round-`k` mixture, exposed for inspection.
pub fn mixed_design(b: &HomerBudgets) -> Result<DesignWeights> {
    mix_designs(&b.lam_h.weights, b.n_h, &b.lam_g.weights, b.n_g)
}
