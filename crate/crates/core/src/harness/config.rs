//! Experiment configuration.

use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{Baseline, HomerParams, WarmupChoice};
use crate::design::DesignOptions;
use crate::error::{Error, Result};
use crate::glm::check_delta;
use crate::warmup::WarParams;

use super::instances::{ArmSpec, ThetaSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Table1,
    DesignContrast,
    Bias,
    Regret,
    Design,
    WarmupBench,
}

/// One experiment. `(config, seed)` determines every output byte.
///
/// `war.delta` and `war.s` are ignored; the top-level `delta` and `s`
/// (or each entry of `s_values` for `table1`) are used instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: usize,
    pub arms: ArmSpec,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: ThetaSpec,
    pub delta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub seed: u64,
    #[serde(default)]
    pub war: WarParams,
    #[serde(default = "default_warmup")]
    pub warmup: WarmupChoice,
    #[serde(default = "default_baselines")]
    pub baselines: Vec<Baseline>,
    #[serde(default)]
    pub design: DesignOptions,
    /// Points kept per regret curve.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_s() -> f64 {
    1.0
}
fn default_s_values() -> Vec<f64> {
    vec![2.0, 4.0, 8.0]
}
fn default_theta() -> ThetaSpec {
    ThetaSpec::RandomDirection
}
fn default_eps() -> f64 {
    0.1
}
fn default_horizon() -> u64 {
    200_000
}
fn default_repeats() -> usize {
    1
}
fn default_warmup() -> WarmupChoice {
    WarmupChoice::War
}
fn default_baselines() -> Vec<Baseline> {
    vec![Baseline::Uniform]
}
fn default_max_points() -> usize {
    1000
}

impl ExperimentConfig {
    /// Defaults for `kind` with the given arms.
    pub fn new(kind: ExperimentKind, d: usize, arms: ArmSpec, delta: f64, seed: u64) -> Self {
        Self {
            kind,
            d,
            arms,
            s: default_s(),
            s_values: default_s_values(),
            theta: default_theta(),
            delta,
            eps: default_eps(),
            horizon: default_horizon(),
            repeats: default_repeats(),
            seed,
            war: WarParams::default(),
            warmup: default_warmup(),
            baselines: default_baselines(),
            design: DesignOptions::default(),
            max_points: default_max_points(),
            output: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if let Some(fd) = self.arms.fixed_dim() {
            if fd != self.d {
                return bad(format!("arms need d = {fd}, got d = {}", self.d));
            }
        }
        if self.arms.count() == 0 {
            return bad("arm count must be positive".into());
        }
        check_delta(self.delta).map_err(|e| Error::Config(format!("delta: {e}")))?;
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.horizon == 0 || self.repeats == 0 || self.max_points == 0 {
            return bad("horizon, repeats and max_points must be positive".into());
        }
        // for `bias`, `s` is the natural parameter `c` and may be any real
        let s_ok = self.s.is_finite() && (self.s > 0.0 || self.kind == ExperimentKind::Bias);
        if !s_ok {
            return bad(format!("s must be positive, got {}", self.s));
        }
        if self.kind == ExperimentKind::Table1
            && (self.s_values.is_empty()
                || self.s_values.iter().any(|s| !(*s > 0.0 && s.is_finite())))
        {
            return bad("s_values must be non-empty and positive".into());
        }
        if self
            .baselines
            .iter()
            .any(|b| matches!(b, Baseline::Etc { m: 0 }))
        {
            return bad("etc baseline needs m >= 1".into());
        }
        if self.kind != ExperimentKind::Bias {
            self.war_params(self.s)
                .validate()
                .map_err(|e| Error::Config(format!("war: {e}")))?;
        }
        Ok(())
    }

    pub fn war_params(&self, s: f64) -> WarParams {
        WarParams {
            s,
            delta: self.delta,
            ..self.war
        }
    }

    pub fn homer_params(&self) -> HomerParams {
        HomerParams {
            delta: self.delta,
            eps: self.eps,
            s: self.s,
            warmup: self.warmup,
            war: self.war_params(self.s),
            design: self.design,
        }
    }
}

/// Independent seed for task `(tag, index)` under `base`.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(tag);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}
