//! Optimal-design solvers, design mixing and rounding.

mod away_step;
mod rounding;
mod support;
mod weighted_g;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use rounding::{min_budget, round_design, RoundingPlan};
pub use weighted_g::StepRule;

use crate::error::{Error, Result};
use crate::link::mudot;
use crate::types::{ArmSet, DesignWeights, Theta};

/// Weights below this are dropped before a design is returned.
pub const PRUNE_THRESHOLD: f64 = 1e-8;

/// A solved design with its objective and optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub weights: DesignWeights,
    pub objective: f64,
    pub iterations: usize,
    /// Relative slack of the optimality certificate (0 at the optimum).
    pub certificate_gap: f64,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    arm_index: usize,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    objective: f64,
    iterations: usize,
    certificate_gap: f64,
    weights: Vec<WeightEntry>,
}

impl Serialize for DesignSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SolutionJson {
            objective: self.objective,
            iterations: self.iterations,
            certificate_gap: self.certificate_gap,
            weights: self
                .weights
                .support()
                .into_iter()
                .map(|i| WeightEntry {
                    arm_index: i,
                    weight: self.weights.get(i),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl DesignSolution {
    /// Parses the JSON form; `k` is the number of arms the weights index.
    pub fn from_json(value: &serde_json::Value, k: usize) -> Result<Self> {
        let raw: SolutionJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut w = vec![0.0; k];
        for e in raw.weights {
            if e.arm_index >= k {
                return Err(Error::InvalidArgument(format!(
                    "arm_index {} out of range",
                    e.arm_index
                )));
            }
            w[e.arm_index] = e.weight;
        }
        Ok(Self {
            weights: DesignWeights::new(w)?,
            objective: raw.objective,
            iterations: raw.iterations,
            certificate_gap: raw.certificate_gap,
            converged: true,
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.support()
    }
}

/// Options shared by the weighted-G family of solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignOptions {
    /// Target relative certificate gap.
    pub tol: f64,
    /// Iteration cap; `None` means `max(20 d K, 20000)`.
    pub max_iter: Option<usize>,
    pub step_rule: StepRule,
    /// Solve within the span of the vectors instead of failing when they do
    /// not span R^d.
    pub allow_rank_deficient: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: None,
            step_rule: StepRule::Smoothed,
            allow_rank_deficient: false,
        }
    }
}

impl DesignOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn rank_deficient_ok(mut self) -> Self {
        self.allow_rank_deficient = true;
        self
    }
}

fn columns(arms: &ArmSet, idx: &[usize], scale: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(arms.dim(), idx.len(), |r, c| {
        let i = idx[c];
        arms.get(i).coords()[r] * scale(i)
    })
}

fn check_active(arms: &ArmSet, active: &[usize]) -> Result<()> {
    if active.is_empty() {
        return Err(Error::InvalidArgument("empty active set".into()));
    }
    if let Some(&bad) = active.iter().find(|&&i| i >= arms.len()) {
        return Err(Error::InvalidArgument(format!(
            "arm index {bad} out of range"
        )));
    }
    Ok(())
}

fn scatter(k: usize, idx: &[usize], local: &[f64]) -> DesignWeights {
    let mut w = vec![0.0; k];
    for (&i, &v) in idx.iter().zip(local) {
        w[i] += v;
    }
    DesignWeights::from_raw(w)
}

/// Spanning subset of `d` arms chosen by successive Householder reflections.
pub fn initial_support(arms: &ArmSet) -> Result<Vec<usize>> {
    support::initial_support_matrix(&columns(arms, &arms.all_indices(), |_| 1.0), None)
}

/// Wolfe's away-step algorithm for the D-optimal design, stopped at the
/// equivalence-theorem certificate `d (1 - eps) <= omega(k) <= d (1 + eps)`.
pub fn away_step_design(arms: &ArmSet, init: &DesignWeights, eps: f64) -> Result<DesignSolution> {
    away_step_on(arms, &arms.all_indices(), init.as_slice(), eps)
}

fn away_step_on(
    arms: &ArmSet,
    idx: &[usize],
    init_full: &[f64],
    eps: f64,
) -> Result<DesignSolution> {
    if init_full.len() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: init_full.len(),
        });
    }
    let x = columns(arms, idx, |_| 1.0);
    let init: Vec<f64> = idx.iter().map(|&i| init_full[i]).collect();
    let s: f64 = init.iter().sum();
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(
            "initial design has no mass on the arms".into(),
        ));
    }
    let init: Vec<f64> = init.iter().map(|v| v / s).collect();
    if away_step::leverages(&x, &init).is_none() && arms.dim() > 1 {
        let rank = arms.rank_of(idx);
        return Err(Error::RankDeficient {
            d: arms.dim(),
            rank,
        });
    }
    let out = away_step::away_step_matrix(&x, &init, eps, 1_000_000)?;
    Ok(DesignSolution {
        weights: scatter(arms.len(), idx, &out.weights),
        objective: out.objective,
        iterations: out.iterations,
        certificate_gap: out.certificate_gap,
        converged: out.converged,
    })
}

/// Initial support plus away steps with `eps = 1`: `max omega <= 2 d`.
pub fn two_approx_design(arms: &ArmSet) -> Result<DesignSolution> {
    two_approx_on(arms, &arms.all_indices(), None)
}

/// [`two_approx_design`] restricted to `idx`; arms flagged in `preferred`
/// (indexed like `arms`) are picked first for the initial support.
pub fn two_approx_on(
    arms: &ArmSet,
    idx: &[usize],
    preferred: Option<&[bool]>,
) -> Result<DesignSolution> {
    check_active(arms, idx)?;
    let x = columns(arms, idx, |_| 1.0);
    let pref: Option<Vec<bool>> = preferred.map(|p| idx.iter().map(|&i| p[i]).collect());
    let init = support::initial_support_matrix(&x, pref.as_deref())?;
    let mut w = vec![0.0; arms.len()];
    for &j in &init {
        w[idx[j]] = 1.0 / init.len() as f64;
    }
    away_step_on(arms, idx, &w, 1.0)
}

/// Minimizes `max_i w_i ||y_i||^2_{A(lam)^{-1}}` over the simplex,
/// `A(lam) = sum_i lam_i y_i y_i^T`.
pub fn weighted_g_design(
    vectors: &ArmSet,
    point_weights: &[f64],
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    let y = columns(vectors, &vectors.all_indices(), |_| 1.0);
    solve(
        y,
        point_weights,
        vectors.len(),
        &vectors.all_indices(),
        opts,
    )
}

fn solve(
    y: DMatrix<f64>,
    w: &[f64],
    k: usize,
    idx: &[usize],
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    let (d, kk) = (y.nrows(), y.ncols());
    let y = match weighted_g::reduce_to_span(&y) {
        Some(r) if opts.allow_rank_deficient => r,
        Some(r) => return Err(Error::RankDeficient { d, rank: r.nrows() }),
        None => y,
    };
    let max_iter = opts.max_iter.unwrap_or((20 * d * kk).max(20_000));
    let out = weighted_g::solve_weighted_g(&y, w, opts.tol, max_iter, opts.step_rule)?;
    Ok(DesignSolution {
        weights: scatter(k, idx, &out.weights),
        objective: out.objective,
        iterations: out.iterations,
        certificate_gap: out.certificate_gap,
        converged: out.converged,
    })
}

/// Weighted-G design over `active` with per-arm variances `v`:
/// `min_lam max_x scale_x ||x||^2_{H^{-1}}`, `H = sum lam_x v_x x x^T`.
fn variance_design(
    arms: &ArmSet,
    active: &[usize],
    variance: impl Fn(usize) -> f64,
    point_weight: impl Fn(usize) -> f64,
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    check_active(arms, active)?;
    let v: Vec<f64> = (0..arms.len())
        .map(|i| {
            if active.contains(&i) {
                variance(i)
            } else {
                0.0
            }
        })
        .collect();
    if let Some(&bad) = active.iter().find(|&&i| !(v[i] > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "arm {bad} has non-positive variance"
        )));
    }
    let y = columns(arms, active, |i| v[i].sqrt());
    let w: Vec<f64> = active.iter().map(|&i| point_weight(i) / v[i]).collect();
    solve(y, &w, arms.len(), active, opts)
}

/// `min_lam max_{x in active} ||x||^2_{H_lam(theta)^{-1}}`.
pub fn g_optimal(
    arms: &ArmSet,
    active: &[usize],
    theta: &Theta,
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    arms.check_theta(theta)?;
    variance_design(
        arms,
        active,
        |i| mudot(arms.get(i).dot(theta)),
        |_| 1.0,
        opts,
    )
}

/// `min_lam max_{x in active} mudot(x^T theta)^2 ||x||^2_{H_lam(theta)^{-1}}`.
pub fn h_optimal(
    arms: &ArmSet,
    active: &[usize],
    theta: &Theta,
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    arms.check_theta(theta)?;
    let m = |i: usize| mudot(arms.get(i).dot(theta));
    variance_design(arms, active, m, |i| m(i) * m(i), opts)
}

/// G design under the worst-case variances `mudot(||x|| S)`.
pub fn naive_warmup_design(arms: &ArmSet, s: f64, opts: &DesignOptions) -> Result<DesignSolution> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "S must be nonnegative, got {s}"
        )));
    }
    variance_design(
        arms,
        &arms.all_indices(),
        |i| mudot(arms.get(i).norm() * s),
        |_| 1.0,
        opts,
    )
}

/// G design under caller-supplied pessimistic variances.
pub fn pessimistic_design(
    arms: &ArmSet,
    mudot_pes: &[f64],
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    if mudot_pes.len() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: mudot_pes.len(),
        });
    }
    if let Some(v) = mudot_pes
        .iter()
        .find(|v| !(**v > 0.0 && **v <= 0.25 + 1e-15))
    {
        return Err(Error::InvalidArgument(format!(
            "pessimistic variance {v} outside (0, 1/4]"
        )));
    }
    variance_design(arms, &arms.all_indices(), |i| mudot_pes[i], |_| 1.0, opts)
}

/// Entrywise max of the budget-scaled designs, renormalized.
pub fn mix_designs(
    lam_h: &DesignWeights,
    n_h: u64,
    lam_g: &DesignWeights,
    n_g: u64,
) -> Result<DesignWeights> {
    if lam_h.len() != lam_g.len() {
        return Err(Error::DimensionMismatch {
            expected: lam_h.len(),
            got: lam_g.len(),
        });
    }
    let total = (n_h + n_g) as f64;
    if total == 0.0 {
        return Err(Error::InvalidArgument(
            "mix_designs needs n_H + n_G >= 1".into(),
        ));
    }
    let (a, b) = (n_h as f64 / total, n_g as f64 / total);
    let w = lam_h
        .as_slice()
        .iter()
        .zip(lam_g.as_slice())
        .map(|(h, g)| (a * h).max(b * g))
        .collect();
    DesignWeights::from_unnormalized(w)
}
