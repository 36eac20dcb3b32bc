//! Spanning initial support by successive Householder reflections.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold below which a projection counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Picks `d` columns of `y` (d x K) that span R^d.
///
/// At step `j` the column with the largest `|v^T y|` is chosen, where `v` is
/// the j-th column of the running orthogonal matrix. If `preferred` is
/// given, preferred columns that still add rank are chosen first.
pub(crate) fn initial_support_matrix(
    y: &DMatrix<f64>,
    preferred: Option<&[bool]>,
) -> Result<Vec<usize>> {
    let d = y.nrows();
    let k = y.ncols();
    let scale = (0..k).map(|i| y.column(i).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::RankDeficient { d, rank: 0 });
    }
    let mut q = DMatrix::<f64>::identity(d, d);
    let mut chosen = Vec::with_capacity(d);
    for j in 0..d {
        let v = q.column(j).clone_owned();
        let score = |i: usize| v.dot(&y.column(i)).abs();
        let pick = |filter: &dyn Fn(usize) -> bool| {
            let mut best: Option<(usize, f64)> = None;
            for i in (0..k).filter(|&i| filter(i)) {
                let s = score(i);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
            best.filter(|&(_, s)| s > RANK_TOL * scale)
        };
        let choice = match preferred {
            Some(p) => pick(&|i| p[i] && !chosen.contains(&i)).or_else(|| pick(&|_| true)),
            None => pick(&|_| true),
        };
        let Some((l, _)) = choice else {
            return Err(Error::RankDeficient { d, rank: j });
        };
        chosen.push(l);

        let mut w: DVector<f64> = q.transpose() * y.column(l);
        for i in 0..j {
            w[i] = 0.0;
        }
        let wn = w.norm();
        let s = if w[j] >= 0.0 { 1.0 } else { -1.0 };
        let mut u = w.clone();
        u[j] += s * wn;
        let denom = wn * (w[j].abs() + wn);
        let qu = &q * &u;
        q -= qu * u.transpose() / denom;
    }
    Ok(chosen)
}
