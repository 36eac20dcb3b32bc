//! Certified relaxations of the confidence set built from tested arms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::link::mudot;
use crate::types::{Arm, ArmSet};

use super::bernstein::BernsteinTracker;

/// A tested arm with bounds `lo <= |z^T theta*| <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestedArm {
    pub index: usize,
    pub coords: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// Intervals on tested arms plus the norm bound `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSummary {
    pub s: f64,
    pub tested: Vec<TestedArm>,
    /// `(M + (m / S^2) I)^{-1}` with `M = sum z z^T / hi_z^2`, cached.
    #[serde(skip)]
    ellipsoid: Option<DMatrix<f64>>,
}

const HI_FLOOR: f64 = 1e-6;

impl ConfidenceSummary {
    pub fn new(s: f64, tested: Vec<TestedArm>) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "S must be positive, got {s}"
            )));
        }
        let d = tested.first().map(|t| t.coords.len());
        for t in &tested {
            if Some(t.coords.len()) != d {
                return Err(Error::DimensionMismatch {
                    expected: d.unwrap_or(0),
                    got: t.coords.len(),
                });
            }
            if !(t.lo >= 0.0 && t.lo <= t.hi) {
                return Err(Error::InvalidArgument(format!(
                    "arm {} has inconsistent interval [{}, {}]",
                    t.index, t.lo, t.hi
                )));
            }
        }
        let ellipsoid = d.map(|d| {
            let m = tested.len() as f64;
            let mut a = DMatrix::<f64>::identity(d, d) * (m / (s * s));
            for t in &tested {
                let z = DVector::from_column_slice(&t.coords);
                a += &z * z.transpose() / t.hi.max(HI_FLOOR).powi(2);
            }
            // a >= (m / S^2) I, so the inverse exists
            a.try_inverse()
                .expect("ellipsoid matrix is positive definite")
        });
        Ok(Self {
            s,
            tested,
            ellipsoid,
        })
    }

    /// Empty summary: nothing tested.
    pub fn vacuous(s: f64) -> Result<Self> {
        Self::new(s, Vec::new())
    }

    /// Summary of every arm the tracker has pulled.
    pub fn from_tracker(arms: &ArmSet, tracker: &BernsteinTracker, s: f64) -> Result<Self> {
        let tested = tracker
            .tested()
            .into_iter()
            .map(|i| {
                let st = tracker.stats(i);
                let cap = s * arms.get(i).norm();
                TestedArm {
                    index: i,
                    coords: arms.get(i).coords().to_vec(),
                    lo: st.lo.min(cap),
                    hi: st.hi.min(cap),
                }
            })
            .collect();
        Self::new(s, tested)
    }

    /// Lower bound on `min |x^T theta|` over the confidence set.
    pub fn lo_rel(&self, x: &[f64]) -> f64 {
        let mut lo = 0.0f64;
        for t in &self.tested {
            let (c, r) = project(x, &t.coords);
            lo = lo.max(c.abs() * t.lo - self.s * r);
        }
        lo
    }

    /// Upper bound on `max |x^T theta|` over the confidence set.
    pub fn hi_rel(&self, x: &[f64]) -> f64 {
        let mut hi = self.s * norm(x);
        for t in &self.tested {
            let (c, r) = project(x, &t.coords);
            hi = hi.min(c.abs() * t.hi + self.s * r);
        }
        if let Some(a) = &self.ellipsoid {
            let v = DVector::from_column_slice(x);
            let q = (v.transpose() * a * &v)[(0, 0)].max(0.0);
            hi = hi.min((2.0 * self.tested.len() as f64 * q).sqrt());
            hi = hi.min(self.weighted_ellipsoid(&v));
        }
        hi
    }

    /// Any `alpha` in the simplex gives `theta^T A(alpha) theta <= 1` with
    /// `A(alpha) = sum_z alpha_z z z^T / hi_z^2 + alpha_0 I / S^2`, hence
    /// `|x^T theta| <= ||x||_{A(alpha)^{-1}}`. The weights are improved by
    /// multiplicative c-optimal updates; the smallest bound seen is returned.
    fn weighted_ellipsoid(&self, x: &DVector<f64>) -> f64 {
        let d = x.len();
        let m = self.tested.len();
        let rows: Vec<DVector<f64>> = self
            .tested
            .iter()
            .map(|t| DVector::from_column_slice(&t.coords) / t.hi.max(HI_FLOOR))
            .collect();
        let s2 = self.s * self.s;
        let mut alpha = vec![0.5 / m as f64; m];
        let mut alpha0 = 0.5;
        let mut best = f64::INFINITY;
        for _ in 0..ELLIPSOID_ITERS {
            let mut a = DMatrix::<f64>::identity(d, d) * (alpha0 / s2);
            for (r, w) in rows.iter().zip(&alpha) {
                a += r * r.transpose() * *w;
            }
            let Some(ch) = a.cholesky() else { break };
            let u = ch.solve(x);
            let f = x.dot(&u).max(0.0);
            best = best.min(f.sqrt());
            let scores: Vec<f64> = rows.iter().map(|r| r.dot(&u).abs()).collect();
            let score0 = u.norm() / self.s;
            let total: f64 =
                alpha.iter().zip(&scores).map(|(w, g)| w * g).sum::<f64>() + alpha0 * score0;
            if !(total > 0.0) {
                break;
            }
            for (w, g) in alpha.iter_mut().zip(&scores) {
                *w *= g / total;
            }
            alpha0 *= score0 / total;
        }
        best
    }
}

const ELLIPSOID_ITERS: usize = 60;

/// `c = x^T z / ||z||^2` and the residual norm `||x - c z||`.
fn project(x: &[f64], z: &[f64]) -> (f64, f64) {
    let zz = dot(z, z);
    if zz == 0.0 {
        return (0.0, norm(x));
    }
    let c = dot(x, z) / zz;
    let r: f64 = x
        .iter()
        .zip(z)
        .map(|(a, b)| (a - c * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (c, r)
}

/// `mudot(lo_rel(x))`, an upper bound on the largest variance over the set.
pub fn optimistic_mudot(x: &Arm, summary: &ConfidenceSummary) -> f64 {
    mudot(summary.lo_rel(x.coords()))
}

/// `mudot(hi_rel(x))`, a lower bound on the smallest variance over the set.
pub fn pessimistic_mudot(x: &Arm, summary: &ConfidenceSummary) -> f64 {
    mudot(summary.hi_rel(x.coords()))
}
