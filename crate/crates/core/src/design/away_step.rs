//! Wolfe's away-step algorithm for the D-optimal (equivalently G-optimal)
//! linear design.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) struct AwayStepOutput {
    pub weights: Vec<f64>,
    /// `max_k omega(k)`.
    pub objective: f64,
    pub iterations: usize,
    pub certificate_gap: f64,
    pub converged: bool,
}

/// `omega(k) = x_k^T V^{-1} x_k` for every column, `V = X diag(lam) X^T`.
pub(crate) fn leverages(x: &DMatrix<f64>, lam: &[f64]) -> Option<Vec<f64>> {
    let d = x.nrows();
    let mut v = DMatrix::<f64>::zeros(d, d);
    for (j, &l) in lam.iter().enumerate() {
        if l > 0.0 {
            let c = x.column(j);
            v.ger(l, &c, &c, 1.0);
        }
    }
    let ch = v.cholesky()?;
    let mut z = x.clone();
    ch.l_dirty().solve_lower_triangular_mut(&mut z);
    let omega: Vec<f64> = z.column_iter().map(|c| c.norm_squared()).collect();
    omega.iter().all(|w| w.is_finite()).then_some(omega)
}

pub(crate) fn away_step_matrix(
    x: &DMatrix<f64>,
    init: &[f64],
    eps: f64,
    max_iter: usize,
) -> Result<AwayStepOutput> {
    let d = x.nrows();
    let k = x.ncols();
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if d == 1 {
        // the optimum is a point mass on the longest vector
        let mut best = 0;
        for i in 1..k {
            if x[(0, i)].abs() > x[(0, best)].abs() {
                best = i;
            }
        }
        if x[(0, best)] == 0.0 {
            return Err(Error::RankDeficient { d: 1, rank: 0 });
        }
        let mut w = vec![0.0; k];
        w[best] = 1.0;
        return Ok(AwayStepOutput {
            weights: w,
            objective: 1.0,
            iterations: 0,
            certificate_gap: 0.0,
            converged: true,
        });
    }
    let df = d as f64;
    let mut lam = init.to_vec();
    let mut iterations = 0;
    loop {
        let omega = leverages(x, &lam).ok_or(Error::RankDeficient { d, rank: d - 1 })?;
        let (mut i_plus, mut e_plus) = (0, f64::NEG_INFINITY);
        let (mut j_minus, mut e_minus) = (0, f64::NEG_INFINITY);
        for (idx, &w) in omega.iter().enumerate() {
            let up = (w - df) / df;
            if up > e_plus {
                e_plus = up;
                i_plus = idx;
            }
            if lam[idx] > 0.0 {
                let down = (df - w) / df;
                if down > e_minus {
                    e_minus = down;
                    j_minus = idx;
                }
            }
        }
        let gap = e_plus.max(e_minus);
        let objective = omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if gap <= eps || iterations >= max_iter {
            return Ok(AwayStepOutput {
                weights: lam,
                objective,
                iterations,
                certificate_gap: gap.max(0.0),
                converged: gap <= eps,
            });
        }
        iterations += 1;
        if e_plus > e_minus {
            let w = omega[i_plus];
            let psi = (w - df) / ((df - 1.0) * w);
            for l in lam.iter_mut() {
                *l /= 1.0 + psi;
            }
            lam[i_plus] += psi / (1.0 + psi);
        } else {
            let w = omega[j_minus];
            let psi_star = (w - df) / ((df - 1.0) * w);
            let psi = psi_star.max(-lam[j_minus]);
            let drop = psi <= -lam[j_minus];
            for l in lam.iter_mut() {
                *l /= 1.0 + psi;
            }
            lam[j_minus] += psi / (1.0 + psi);
            if drop {
                lam[j_minus] = 0.0;
            }
        }
    }
}
