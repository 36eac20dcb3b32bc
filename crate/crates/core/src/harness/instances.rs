//! Arm sets and parameters for the experiments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::logit;
use crate::types::{ArmSet, Theta};

/// How the arm set is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ArmSpec {
    /// `count` directions drawn uniformly on the unit sphere in `R^d`.
    UnitSphere { count: usize },
    /// `(cos(2 pi i / count), sin(2 pi i / count))`.
    Circle { count: usize },
    /// `count` evenly spaced points on `[-1, 1]` (`d = 1`).
    Grid { count: usize },
    /// Unit vectors in the plane whose means under `theta* = (S, 0)` are
    /// evenly spaced from `0.95` down to `0.05`.
    SpacedMeans { count: usize },
    /// Rows given inline.
    Explicit { rows: Vec<Vec<f64>> },
}

impl ArmSpec {
    /// Short names accepted on the command line: `circle30`, `sphere20`,
    /// `grid2001`, `spaced10`.
    pub fn parse_short(s: &str) -> Result<Self> {
        let num = |p: &str| -> Result<usize> {
            s[p.len()..]
                .parse()
                .map_err(|_| Error::Config(format!("bad arm spec '{s}'")))
        };
        if s.starts_with("circle") {
            Ok(ArmSpec::Circle {
                count: num("circle")?,
            })
        } else if s.starts_with("sphere") {
            Ok(ArmSpec::UnitSphere {
                count: num("sphere")?,
            })
        } else if s.starts_with("grid") {
            Ok(ArmSpec::Grid {
                count: num("grid")?,
            })
        } else if s.starts_with("spaced") {
            Ok(ArmSpec::SpacedMeans {
                count: num("spaced")?,
            })
        } else {
            Err(Error::Config(format!("unknown arm spec '{s}'")))
        }
    }

    pub fn count(&self) -> usize {
        match self {
            ArmSpec::UnitSphere { count }
            | ArmSpec::Circle { count }
            | ArmSpec::Grid { count }
            | ArmSpec::SpacedMeans { count } => *count,
            ArmSpec::Explicit { rows } => rows.len(),
        }
    }

    /// Dimension implied by the spec, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            ArmSpec::Circle { .. } | ArmSpec::SpacedMeans { .. } => Some(2),
            ArmSpec::Grid { .. } => Some(1),
            ArmSpec::Explicit { rows } => rows.first().map(Vec::len),
            ArmSpec::UnitSphere { .. } => None,
        }
    }

    /// Builds the arm set; `s` is only used by `SpacedMeans`.
    pub fn build<R: Rng + ?Sized>(&self, d: usize, s: f64, rng: &mut R) -> Result<ArmSet> {
        if let Some(fd) = self.fixed_dim() {
            if fd != d {
                return Err(Error::Config(format!(
                    "arm spec needs d = {fd}, config has d = {d}"
                )));
            }
        }
        if self.count() == 0 {
            return Err(Error::Config("arm count must be positive".into()));
        }
        match self {
            ArmSpec::UnitSphere { count } => {
                ArmSet::from_rows((0..*count).map(|_| unit_vector(rng, d)).collect())
            }
            ArmSpec::Circle { count } => Ok(circle(*count)),
            ArmSpec::Grid { count } => {
                if *count < 2 {
                    return Err(Error::Config("grid needs at least two points".into()));
                }
                let n = *count - 1;
                ArmSet::from_rows(
                    (0..=n)
                        .map(|i| vec![-1.0 + 2.0 * i as f64 / n as f64])
                        .collect(),
                )
            }
            ArmSpec::SpacedMeans { count } => spaced_means(*count, s),
            ArmSpec::Explicit { rows } => ArmSet::from_rows(rows.clone()),
        }
    }
}

/// The unknown parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ThetaSpec {
    /// Uniform direction scaled to norm `S`.
    RandomDirection,
    /// `(S, 0, ..., 0)`.
    Axis,
    Explicit {
        coords: Vec<f64>,
    },
}

impl ThetaSpec {
    pub fn build<R: Rng + ?Sized>(&self, d: usize, s: f64, rng: &mut R) -> Result<Theta> {
        match self {
            ThetaSpec::RandomDirection => {
                Theta::new(unit_vector(rng, d).into_iter().map(|v| v * s).collect())
            }
            ThetaSpec::Axis => {
                let mut v = vec![0.0; d];
                v[0] = s;
                Theta::new(v)
            }
            ThetaSpec::Explicit { coords } => {
                if coords.len() != d {
                    return Err(Error::Config(format!(
                        "theta has {} coordinates, d = {d}",
                        coords.len()
                    )));
                }
                Theta::new(coords.clone())
            }
        }
    }
}

/// Gaussian vector normalised to unit length.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|a: &f64| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

pub fn circle(count: usize) -> ArmSet {
    let rows = (0..count)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    ArmSet::from_rows(rows).expect("circle arms are valid")
}

/// Arm `i` has first coordinate `logit(m_i) / S`, sign of the second
/// coordinate alternating, `m_i` evenly spaced on `[0.05, 0.95]`.
pub fn spaced_means(count: usize, s: f64) -> Result<ArmSet> {
    if count < 2 {
        return Err(Error::Config("spaced_means needs at least two arms".into()));
    }
    let top = logit(0.95);
    if !(s >= top) {
        return Err(Error::Config(format!(
            "spaced_means needs S >= {top:.4}, got {s}"
        )));
    }
    let rows = (0..count)
        .map(|i| {
            let m = 0.95 - 0.9 * i as f64 / (count - 1) as f64;
            let a = logit(m) / s;
            let b = (1.0 - a * a).max(0.0).sqrt();
            vec![a, if i % 2 == 0 { b } else { -b }]
        })
        .collect();
    ArmSet::from_rows(rows)
}
