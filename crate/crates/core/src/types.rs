//! Arms, parameters and design weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Slack on the unit-ball constraint for arms.
pub const ARM_NORM_SLACK: f64 = 1e-12;
/// Tolerance on `sum(weights) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A feature vector in the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Arm(Vec<f64>);

impl Arm {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("arm must have d >= 1".into()));
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(
                "arm coordinates must be finite".into(),
            ));
        }
        let n = norm(&coords);
        if n > 1.0 + ARM_NORM_SLACK {
            return Err(Error::InvalidArgument(format!("arm norm {n} exceeds 1")));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, theta: &Theta) -> f64 {
        dot(&self.0, theta.coords())
    }
}

impl TryFrom<Vec<f64>> for Arm {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Arm::new(v)
    }
}

impl From<Arm> for Vec<f64> {
    fn from(a: Arm) -> Self {
        a.0
    }
}

/// The finite action set. Indices are stable for the lifetime of the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Arm>", into = "Vec<Arm>")]
pub struct ArmSet {
    arms: Vec<Arm>,
    d: usize,
}

impl ArmSet {
    pub fn new(arms: Vec<Arm>) -> Result<Self> {
        let first = arms
            .first()
            .ok_or_else(|| Error::InvalidArgument("arm set must be non-empty".into()))?;
        let d = first.dim();
        if let Some(bad) = arms.iter().find(|a| a.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(Self { arms, d })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Arm::new).collect::<Result<Vec<_>>>()?)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn get(&self, i: usize) -> &Arm {
        &self.arms[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Arm> {
        self.arms.iter()
    }

    pub fn check_theta(&self, theta: &Theta) -> Result<()> {
        if theta.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: theta.dim(),
            });
        }
        Ok(())
    }

    /// `x^T theta` for every arm.
    pub fn projections(&self, theta: &Theta) -> Vec<f64> {
        self.arms.iter().map(|a| a.dot(theta)).collect()
    }

    /// Numerical rank of the arms indexed by `idx`.
    pub fn rank_of(&self, idx: &[usize]) -> usize {
        let vs: Vec<&[f64]> = idx.iter().map(|&i| self.arms[i].coords()).collect();
        crate::linalg::span_rank(&vs, self.d)
    }

    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// Canonical basis `e_1..e_d`.
    pub fn canonical(d: usize) -> Self {
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(rows).expect("canonical basis is valid")
    }
}

impl TryFrom<Vec<Arm>> for ArmSet {
    type Error = Error;
    fn try_from(v: Vec<Arm>) -> Result<Self> {
        ArmSet::new(v)
    }
}

impl From<ArmSet> for Vec<Arm> {
    fn from(a: ArmSet) -> Self {
        a.arms
    }
}

/// Natural parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Theta(Vec<f64>);

impl Theta {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(
                "theta must be non-empty and finite".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

/// A probability vector over arm indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DesignWeights(Vec<f64>);

impl DesignWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument(
                "design over an empty arm set".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "design weights must be finite and >= 0".into(),
            ));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!(
                "design weights sum to {s}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    /// Normalizes a nonnegative vector with positive mass.
    pub fn from_unnormalized(mut weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("cannot normalize weights".into()));
        }
        weights.iter_mut().for_each(|w| *w /= s);
        Ok(Self(weights))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    /// Uniform mass on `support`, zero elsewhere.
    pub fn uniform_on(k: usize, support: &[usize]) -> Self {
        let mut w = vec![0.0; k];
        let m = support.len() as f64;
        for &i in support {
            w[i] = 1.0 / m;
        }
        Self(w)
    }

    pub fn point_mass(k: usize, i: usize) -> Self {
        let mut w = vec![0.0; k];
        w[i] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Indices with strictly positive mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    /// Zeroes entries below `threshold` and renormalizes.
    pub fn pruned(&self, threshold: f64) -> Self {
        let w: Vec<f64> = self
            .0
            .iter()
            .map(|&v| if v < threshold { 0.0 } else { v })
            .collect();
        Self::from_unnormalized(w).unwrap_or_else(|_| self.clone())
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self(weights)
    }
}

impl TryFrom<Vec<f64>> for DesignWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        DesignWeights::new(v)
    }
}

impl From<DesignWeights> for Vec<f64> {
    fn from(w: DesignWeights) -> Self {
        w.0
    }
}
