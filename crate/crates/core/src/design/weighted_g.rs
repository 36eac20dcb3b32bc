//! Frank-Wolfe for the weighted G objective
//! `f(lam) = max_i w_i y_i^T A(lam)^{-1} y_i`, `A(lam) = sum_j lam_j y_j y_j^T`.
//!
//! The default rule runs away-step Frank-Wolfe with exact line search on the
//! log-sum-exp smoothing `F_b(lam) = (1/b) ln sum_i exp(b f_i(lam))`, raising
//! `b` whenever the smoothing bias dominates. Every iterate also yields a
//! lower bound on the optimum: for any probability vector `pi`,
//! `min_lam sum_i pi_i f_i(lam) >= phi^2 / max_j g_j` where
//! `phi = sum_i pi_i f_i(lam)` and `g_j = y_j^T A^{-1} B A^{-1} y_j` with
//! `B = sum_i pi_i w_i y_i y_i^T`. The reported certificate gap is
//! `f / lower_bound - 1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::support::initial_support_matrix;
use crate::error::{Error, Result};

const BETA_START: f64 = 16.0;
const BETA_MAX: f64 = 1e9;
const GOLDEN_ITERS: usize = 64;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Smoothed objective, away steps, exact line search.
    #[default]
    Smoothed,
    /// Plain Frank-Wolfe on the active max with step `2 / (k + 2)`.
    Standard,
}

pub(crate) struct SolverOutput {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub certificate_gap: f64,
    pub converged: bool,
}

struct Eval {
    /// `L^{-1} Y`, so that `omega_i = ||z_i||^2` and `y_i^T A^{-1} y_j = z_i . z_j`.
    z: DMatrix<f64>,
    omega: Vec<f64>,
    f: Vec<f64>,
}

fn evaluate(y: &DMatrix<f64>, w: &[f64], lam: &[f64]) -> Option<Eval> {
    let d = y.nrows();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for (j, &l) in lam.iter().enumerate() {
        if l > 0.0 {
            let c = y.column(j);
            a.ger(l, &c, &c, 1.0);
        }
    }
    let ch = a.cholesky()?;
    let mut z = y.clone();
    ch.l_dirty().solve_lower_triangular_mut(&mut z);
    let omega: Vec<f64> = z.column_iter().map(|c| c.norm_squared()).collect();
    if !omega.iter().all(|v| v.is_finite()) {
        return None;
    }
    let f = omega.iter().zip(w).map(|(o, wi)| o * wi).collect();
    Some(Eval { z, omega, f })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `g_j = z_j^T P z_j` with `P = sum_i pi_i w_i z_i z_i^T`.
fn directional(e: &Eval, w: &[f64], pi: &[f64]) -> Vec<f64> {
    let d = e.z.nrows();
    let mut p = DMatrix::<f64>::zeros(d, d);
    for (i, (&pi_i, &w_i)) in pi.iter().zip(w).enumerate() {
        if pi_i > 0.0 {
            let c = e.z.column(i);
            p.ger(pi_i * w_i, &c, &c, 1.0);
        }
    }
    e.z.column_iter().map(|c| (&p * c).dot(&c)).collect()
}

fn softmax(f: &[f64], beta: f64) -> Vec<f64> {
    let m = max_of(f);
    let mut pi: Vec<f64> = f.iter().map(|v| (beta * (v - m)).exp()).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    pi
}

/// Objective values along the segment toward (`toward = true`) or away
/// from vertex `j`, via Sherman-Morrison on the current factorization.
struct Segment {
    /// `(w_i, omega_i, omega_i omega_j - (y_i^T A^{-1} y_j)^2)`
    terms: Vec<(f64, f64, f64)>,
    oj: f64,
    toward: bool,
}

impl Segment {
    fn new(e: &Eval, w: &[f64], j: usize, toward: bool) -> Self {
        let oj = e.omega[j];
        let zj = e.z.column(j);
        let terms = (0..w.len())
            .map(|i| {
                let c = e.z.column(i).dot(&zj);
                (w[i], e.omega[i], (e.omega[i] * oj - c * c).max(0.0))
            })
            .collect();
        Self { terms, oj, toward }
    }

    fn value(&self, w: f64, o: f64, dij: f64, gamma: f64) -> f64 {
        if self.toward {
            let s = 1.0 - gamma;
            w * (o * s + gamma * dij) / (s * (s + gamma * self.oj))
        } else {
            let den = 1.0 + gamma - gamma * self.oj;
            if den <= 0.0 {
                f64::INFINITY
            } else {
                w * ((o * (1.0 + gamma) - gamma * dij) / ((1.0 + gamma) * den)).max(0.0)
            }
        }
    }

    /// Smoothed objective at step `gamma`.
    fn smoothed(&self, gamma: f64, beta: f64) -> f64 {
        let m = self
            .terms
            .iter()
            .map(|&(w, o, dd)| self.value(w, o, dd, gamma))
            .fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return m;
        }
        let s: f64 = self
            .terms
            .iter()
            .map(|&(w, o, dd)| (beta * (self.value(w, o, dd, gamma) - m)).exp())
            .sum();
        m + s.ln() / beta
    }
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..GOLDEN_ITERS {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    // the endpoints are candidates too (the minimum may sit on the boundary)
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))]
        .into_iter()
        .fold(
            (0.0, f64::INFINITY),
            |acc, (g, v)| if v < acc.1 { (g, v) } else { acc },
        )
        .0
}

pub(crate) fn solve_weighted_g(
    y: &DMatrix<f64>,
    w: &[f64],
    tol: f64,
    max_iter: usize,
    rule: StepRule,
) -> Result<SolverOutput> {
    let d = y.nrows();
    let k = y.ncols();
    if w.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: w.len(),
        });
    }
    if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "point weights must be positive and finite".into(),
        ));
    }
    let init = initial_support_matrix(y, None)?;
    if d == 1 {
        // a scalar information is maximised by the longest vector
        let sq: Vec<f64> = (0..k).map(|i| y[(0, i)] * y[(0, i)]).collect();
        let j = argmax(&sq);
        let mut lam = vec![0.0; k];
        lam[j] = 1.0;
        let objective = max_of(&(0..k).map(|i| w[i] * sq[i] / sq[j]).collect::<Vec<_>>());
        return Ok(SolverOutput {
            weights: lam,
            objective,
            iterations: 0,
            certificate_gap: 0.0,
            converged: true,
        });
    }
    let mut lam = vec![0.0; k];
    for &i in &init {
        lam[i] = 1.0 / init.len() as f64;
    }
    let out = match rule {
        StepRule::Smoothed => smoothed(y, w, lam, tol, max_iter)?,
        StepRule::Standard => standard(y, w, lam, tol, max_iter)?,
    };
    finish(y, w, out, tol)
}

struct Raw {
    lam: Vec<f64>,
    lower_bound: f64,
    iterations: usize,
}

fn finish(y: &DMatrix<f64>, w: &[f64], raw: Raw, tol: f64) -> Result<SolverOutput> {
    let mut lam = raw.lam;
    let pruned: Vec<f64> = lam
        .iter()
        .map(|&v| if v < 1e-8 { 0.0 } else { v })
        .collect();
    let s: f64 = pruned.iter().sum();
    let pruned: Vec<f64> = pruned.iter().map(|v| v / s).collect();
    let e = match evaluate(y, w, &pruned) {
        Some(e) => {
            lam = pruned;
            e
        }
        None => evaluate(y, w, &lam).ok_or(Error::Singular)?,
    };
    let objective = max_of(&e.f);
    let gap = (objective / raw.lower_bound - 1.0).max(0.0);
    Ok(SolverOutput {
        weights: lam,
        objective,
        iterations: raw.iterations,
        certificate_gap: gap,
        converged: gap <= tol,
    })
}

fn smoothed(
    y: &DMatrix<f64>,
    w: &[f64],
    mut lam: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Raw> {
    let k = y.ncols();
    let d = y.nrows();
    let mut beta_rel = BETA_START;
    let mut beta = f64::NAN;
    let mut best = (f64::INFINITY, lam.clone());
    let mut best_lb = 0.0f64;
    let mut iterations = 0;
    while iterations < max_iter {
        let e = evaluate(y, w, &lam).ok_or(Error::RankDeficient { d, rank: d - 1 })?;
        let fmax = max_of(&e.f);
        if beta.is_nan() {
            beta = beta_rel / fmax;
        }
        let pi = softmax(&e.f, beta);
        let phi: f64 = pi.iter().zip(&e.f).map(|(p, f)| p * f).sum();
        let g = directional(&e, w, &pi);
        let s = argmax(&g);
        best_lb = best_lb.max(phi * phi / g[s]);
        if fmax < best.0 {
            best = (fmax, lam.clone());
        }
        let gap = best.0 / best_lb - 1.0;
        if gap <= tol {
            break;
        }
        let fw_gap = g[s] - phi;
        let mut a = usize::MAX;
        for j in 0..k {
            if lam[j] > 0.0 && (a == usize::MAX || g[j] < g[a]) {
                a = j;
            }
        }
        let away_gap = phi - g[a];
        if fw_gap.max(away_gap) <= 0.5 * gap * phi && beta_rel < BETA_MAX {
            beta_rel *= 4.0;
            beta = beta_rel / fmax;
            continue;
        }
        iterations += 1;
        let toward = fw_gap >= away_gap || lam[a] >= 1.0;
        let (vertex, hi) = if toward {
            (s, 1.0 - 1e-12)
        } else {
            (a, lam[a] / (1.0 - lam[a]))
        };
        let seg = Segment::new(&e, w, vertex, toward);
        let gamma = golden_min(0.0, hi, |t| seg.smoothed(t, beta));
        if gamma <= 0.0 {
            if beta_rel >= BETA_MAX {
                break;
            }
            beta_rel *= 4.0;
            beta = beta_rel / fmax;
            continue;
        }
        if toward {
            lam.iter_mut().for_each(|l| *l *= 1.0 - gamma);
            lam[s] += gamma;
        } else {
            lam.iter_mut().for_each(|l| *l *= 1.0 + gamma);
            lam[a] -= gamma;
            if gamma >= hi * (1.0 - 1e-9) {
                // drop step
                lam[a] = 0.0;
                let total: f64 = lam.iter().sum();
                lam.iter_mut().for_each(|l| *l /= total);
            }
        }
    }
    Ok(Raw {
        lam: best.1,
        lower_bound: best_lb,
        iterations,
    })
}

fn standard(
    y: &DMatrix<f64>,
    w: &[f64],
    mut lam: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Raw> {
    const WINDOW: usize = 25;
    let d = y.nrows();
    let mut best = (f64::INFINITY, lam.clone());
    let mut best_lb = 0.0f64;
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        let e = evaluate(y, w, &lam).ok_or(Error::RankDeficient { d, rank: d - 1 })?;
        let i_star = argmax(&e.f);
        let fmax = e.f[i_star];
        let mut pi = vec![0.0; w.len()];
        pi[i_star] = 1.0;
        let g = directional(&e, w, &pi);
        let j = argmax(&g);
        best_lb = best_lb.max(fmax * fmax / g[j]);
        if fmax < best.0 {
            best = (fmax, lam.clone());
        }
        history.push(best.0);
        if best.0 / best_lb - 1.0 <= tol {
            break;
        }
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            if (old - best.0) / old < tol {
                break;
            }
        }
        // counted from k = 1: a unit first step would discard the spanning start
        iterations += 1;
        let alpha = 2.0 / (iterations as f64 + 2.0);
        lam.iter_mut().for_each(|l| *l *= 1.0 - alpha);
        lam[j] += alpha;
    }
    Ok(Raw {
        lam: best.1,
        lower_bound: best_lb,
        iterations,
    })
}

/// Orthonormal coordinates of the columns of `y` within their span.
///
/// Returns `None` when the columns already span R^d.
pub(crate) fn reduce_to_span(y: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = y.nrows();
    let g = y * y.transpose();
    let eig = nalgebra::SymmetricEigen::new(g);
    let lmax = max_of(eig.eigenvalues.as_slice());
    let keep: Vec<usize> = (0..d)
        .filter(|&i| eig.eigenvalues[i] > RANK_TOL * lmax)
        .collect();
    if keep.len() == d || keep.is_empty() {
        return None;
    }
    let basis = DMatrix::from_fn(d, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    Some(basis.transpose() * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(rows: &[&[f64]]) -> DMatrix<f64> {
        let d = rows[0].len();
        DMatrix::from_fn(d, rows.len(), |r, c| rows[c][r])
    }

    #[test]
    fn kink_instance_reaches_optimum() {
        // plain subgradient steps stall above the optimum 2 on this instance
        let h = 0.5f64.sqrt();
        let y = cols(&[&[1.0, 0.0], &[0.0, 1.0], &[h, h]]);
        let out = solve_weighted_g(&y, &[1.0; 3], 1e-6, 100_000, StepRule::Smoothed).unwrap();
        assert!(out.converged);
        assert!((out.objective - 2.0).abs() < 1e-5, "{}", out.objective);
    }

    #[test]
    fn lower_bound_never_exceeds_objective() {
        let y = cols(&[&[0.9, 0.1], &[0.2, 0.8], &[-0.5, 0.5], &[0.7, -0.7]]);
        let w = [1.0, 2.5, 0.4, 3.0];
        let out = solve_weighted_g(&y, &w, 1e-6, 100_000, StepRule::Smoothed).unwrap();
        assert!(out.converged);
        assert!(out.certificate_gap >= 0.0 && out.certificate_gap <= 1e-6);
        // the lower bound certifies every other feasible design too
        let lb = out.objective / (1.0 + out.certificate_gap);
        let std = solve_weighted_g(&y, &w, 1e-8, 2000, StepRule::Standard).unwrap();
        assert!(std.objective >= lb);
    }

    #[test]
    fn span_reduction() {
        let y = cols(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.6, 0.8, 0.0]]);
        let r = reduce_to_span(&y).unwrap();
        assert_eq!(r.nrows(), 2);
        assert!((r.column(2).norm() - 1.0).abs() < 1e-12);
        assert!(reduce_to_span(&DMatrix::identity(3, 3)).is_none());
    }
}
