//! Desk-scale experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{baseline_policy, run_homer, Environment, Phase, RegretLedger};
use crate::design::{g_optimal, h_optimal, naive_warmup_design, DesignOptions, DesignSolution};
use crate::error::{Error, Result};
use crate::glm::{exact_bias_1d, Estimator};
use crate::link::mudot;
use crate::types::{ArmSet, Theta};
use crate::warmup::{naive_warmup, oracle_warmup, war, warmup_sample_count, WarmupReport};

use super::config::{derive_seed, ExperimentConfig, ExperimentKind};
use super::parallel::run_indexed;

const TAG_INSTANCE: u64 = 1;
const TAG_ENV: u64 = 2;

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    cfg.validate()?;
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "experiment kind {:?} not handled here",
            cfg.kind
        )))
    }
}

/// One line of `table1.csv`. Naive and oracle counts are
/// `objective * gamma(d, K, delta)` without rounding; for WAR,
/// `samples_probing` is the number of probing pulls and
/// `samples_planning` the same real-valued planning count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub method: String,
    #[serde(rename = "S")]
    pub s: f64,
    pub repeat: usize,
    pub samples_probing: f64,
    pub samples_planning: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Summary {
    pub method: String,
    #[serde(rename = "S")]
    pub s: f64,
    pub mean_planning: f64,
    pub std_planning: f64,
    pub mean_total: f64,
    pub std_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Output {
    pub rows: Vec<Table1Row>,
    pub summary: Vec<Table1Summary>,
}

/// Naive, WAR and oracle warmup counts on random unit-sphere instances.
pub fn table1_experiment(cfg: &ExperimentConfig) -> Result<Table1Output> {
    expect_kind(cfg, &[ExperimentKind::Table1])?;
    let reps = cfg.repeats;
    let tasks = cfg.s_values.len() * reps;
    let k = cfg.arms.count();
    let per_task = run_indexed(tasks, |t| {
        let (si, rep) = (t / reps, t % reps);
        let s = cfg.s_values[si];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_INSTANCE, t as u64));
        let arms = cfg.arms.build(cfg.d, s, &mut rng)?;
        let theta = cfg.theta.build(cfg.d, s, &mut rng)?;
        let naive = warmup_sample_count(
            &naive_warmup_design(&arms, s, &cfg.design)?,
            cfg.d,
            k,
            cfg.delta,
        )?;
        let oracle = warmup_sample_count(
            &g_optimal(&arms, &arms.all_indices(), &theta, &cfg.design)?,
            cfg.d,
            k,
            cfg.delta,
        )?;
        let mut env = Environment::new(
            arms.clone(),
            theta,
            derive_seed(cfg.seed, TAG_ENV, t as u64),
        )?;
        let w = war(&mut env, &arms, &cfg.war_params(s), &cfg.design)?;
        let row = |method: &str, probing: f64, planning: f64| Table1Row {
            method: method.into(),
            s,
            repeat: rep,
            samples_probing: probing,
            samples_planning: planning,
            total: probing + planning,
        };
        Ok(vec![
            row("naive", 0.0, naive),
            row("war", w.samples_probing as f64, w.planning_count_real),
            row("oracle", 0.0, oracle),
        ])
    })?;
    let rows: Vec<Table1Row> = per_task.into_iter().flatten().collect();
    let mut summary = Vec::new();
    for &s in &cfg.s_values {
        for method in ["naive", "war", "oracle"] {
            let sel: Vec<&Table1Row> = rows
                .iter()
                .filter(|r| r.s == s && r.method == method)
                .collect();
            let (mp, sp) = mean_std(sel.iter().map(|r| r.samples_planning));
            let (mt, st) = mean_std(sel.iter().map(|r| r.total));
            summary.push(Table1Summary {
                method: method.into(),
                s,
                mean_planning: mp,
                std_planning: sp,
                mean_total: mt,
                std_total: st,
            });
        }
    }
    Ok(Table1Output { rows, summary })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub arms: ArmSet,
    pub theta: Theta,
}

/// G- and H-optimal designs at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignPair {
    pub instance: Instance,
    pub g: DesignSolution,
    pub h: DesignSolution,
}

pub fn design_pair(arms: &ArmSet, theta: &Theta, opts: &DesignOptions) -> Result<DesignPair> {
    let all = arms.all_indices();
    Ok(DesignPair {
        instance: Instance {
            arms: arms.clone(),
            theta: theta.clone(),
        },
        g: g_optimal(arms, &all, theta, opts)?,
        h: h_optimal(arms, &all, theta, opts)?,
    })
}

fn build_instance(cfg: &ExperimentConfig) -> Result<(ArmSet, Theta)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_INSTANCE, 0));
    let arms = cfg.arms.build(cfg.d, cfg.s, &mut rng)?;
    let theta = cfg.theta.build(cfg.d, cfg.s, &mut rng)?;
    Ok((arms, theta))
}

/// `design` experiment: both designs for the configured instance.
pub fn design_experiment(cfg: &ExperimentConfig) -> Result<DesignPair> {
    expect_kind(
        cfg,
        &[ExperimentKind::Design, ExperimentKind::DesignContrast],
    )?;
    let (arms, theta) = build_instance(cfg)?;
    design_pair(&arms, &theta, &cfg.design)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsBlock {
    pub objective: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportStats {
    pub g_support: Vec<usize>,
    pub h_support: Vec<usize>,
    /// Mean of `|x^T theta*|` over each support.
    pub g_mean_abs_margin: f64,
    pub h_mean_abs_margin: f64,
}

/// Contents of `design_contrast.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignContrast {
    pub instance: Instance,
    pub g: WeightsBlock,
    pub h: WeightsBlock,
    pub support_stats: SupportStats,
}

pub fn design_contrast_experiment(cfg: &ExperimentConfig) -> Result<DesignContrast> {
    let pair = design_experiment(cfg)?;
    let Instance { arms, theta } = &pair.instance;
    let margin = |idx: &[usize]| {
        idx.iter()
            .map(|&i| arms.get(i).dot(theta).abs())
            .sum::<f64>()
            / idx.len() as f64
    };
    let (gs, hs) = (pair.g.support(), pair.h.support());
    Ok(DesignContrast {
        support_stats: SupportStats {
            g_mean_abs_margin: margin(&gs),
            h_mean_abs_margin: margin(&hs),
            g_support: gs,
            h_support: hs,
        },
        g: WeightsBlock {
            objective: pair.g.objective,
            weights: pair.g.weights.as_slice().to_vec(),
        },
        h: WeightsBlock {
            objective: pair.h.objective,
            weights: pair.h.weights.as_slice().to_vec(),
        },
        instance: pair.instance,
    })
}

/// One line of `bias.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub estimator: Estimator,
    pub c: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub bias: f64,
    pub normalized_bias: f64,
}

/// `N_j = ceil(2^j / mudot(c))`, `j = 1..=7`.
pub fn bias_grid(c: f64) -> Vec<u64> {
    (1..=7)
        .map(|j| (2f64.powi(j) / mudot(c)).ceil() as u64)
        .collect()
}

/// Exact biases on `bias_grid(c)`; MLE normalized by `N mudot(c)`, KT by
/// `(N mudot(c))^2`.
pub fn bias_rows(c: f64) -> Vec<BiasRow> {
    let mut rows = Vec::new();
    for est in [Estimator::Mle, Estimator::Kt] {
        for n in bias_grid(c) {
            let bias = exact_bias_1d(est, c, n);
            let scale = n as f64 * mudot(c);
            let normalized_bias = match est {
                Estimator::Mle => bias * scale,
                Estimator::Kt => bias * scale * scale,
            };
            rows.push(BiasRow {
                estimator: est,
                c,
                n,
                bias,
                normalized_bias,
            });
        }
    }
    rows
}

/// `c` is the configured `s`.
pub fn bias_experiment(cfg: &ExperimentConfig) -> Result<Vec<BiasRow>> {
    expect_kind(cfg, &[ExperimentKind::Bias])?;
    Ok(bias_rows(cfg.s))
}

/// One point of `regret.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub policy: String,
    pub seed: u64,
    pub t: u64,
    pub cum_regret: f64,
    pub phase: Phase,
}

/// One line of `regret_summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub policy: String,
    pub seed: u64,
    pub final_regret: f64,
    pub first_half: f64,
    pub second_half: f64,
    pub warmup_pulls: u64,
    pub rounds: usize,
    pub final_active: usize,
    pub best_survived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretOutput {
    pub curves: Vec<RegretRow>,
    pub summary: Vec<RegretSummary>,
}

fn summarize(policy: &str, seed: u64, l: &RegretLedger) -> RegretSummary {
    let half = l.len() / 2;
    RegretSummary {
        policy: policy.into(),
        seed,
        final_regret: l.final_regret(),
        first_half: l.regret_between(0, half),
        second_half: l.regret_between(half, l.len()),
        warmup_pulls: l.phase_count(|p| p == Phase::Warmup),
        rounds: 0,
        final_active: 0,
        best_survived: true,
    }
}

fn curve(policy: &str, seed: u64, l: &RegretLedger, max_points: usize) -> Vec<RegretRow> {
    l.downsample(max_points)
        .into_iter()
        .map(|p| RegretRow {
            policy: policy.into(),
            seed,
            t: p.t,
            cum_regret: p.cum_regret,
            phase: p.phase,
        })
        .collect()
}

/// HOMER and the baselines on `repeats` seeds.
pub fn regret_experiment(cfg: &ExperimentConfig) -> Result<RegretOutput> {
    expect_kind(cfg, &[ExperimentKind::Regret])?;
    let params = cfg.homer_params();
    let per_seed = run_indexed(cfg.repeats, |r| {
        let seed = derive_seed(cfg.seed, TAG_ENV, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_INSTANCE, r as u64));
        let arms = cfg.arms.build(cfg.d, cfg.s, &mut rng)?;
        let theta = cfg.theta.build(cfg.d, cfg.s, &mut rng)?;
        let mut curves = Vec::new();
        let mut summary = Vec::new();

        let mut env = Environment::new(arms.clone(), theta.clone(), seed)?;
        let run = run_homer(&mut env, cfg.horizon, &params)?;
        let mut s = summarize("homer", seed, &run.ledger);
        s.rounds = run.rounds.len();
        s.final_active = run
            .rounds
            .last()
            .map_or(arms.len(), |r| r.active_after.len());
        s.best_survived = run.best_survived;
        curves.extend(curve("homer", seed, &run.ledger, cfg.max_points));
        summary.push(s);

        for b in &cfg.baselines {
            let mut env = Environment::new(arms.clone(), theta.clone(), seed)?;
            let l = baseline_policy(*b, &mut env, cfg.horizon)?;
            let name = b.name();
            curves.extend(curve(&name, seed, &l, cfg.max_points));
            let mut s = summarize(&name, seed, &l);
            s.final_active = arms.len();
            summary.push(s);
        }
        Ok((curves, summary))
    })?;
    let mut out = RegretOutput {
        curves: Vec::new(),
        summary: Vec::new(),
    };
    for (c, s) in per_seed {
        out.curves.extend(c);
        out.summary.extend(s);
    }
    Ok(out)
}

/// One line of `warmup.csv`: realised pulls of one warmup run and the
/// error `max_x |x^T (theta_hat0 - theta*)|` of its estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupRow {
    pub method: String,
    pub repeat: usize,
    pub samples_probing: u64,
    pub samples_planning: u64,
    pub total: u64,
    pub max_error: f64,
    pub valid: bool,
}

fn warmup_row(rep: usize, arms: &ArmSet, theta: &Theta, w: &WarmupReport) -> WarmupRow {
    let max_error = arms
        .iter()
        .map(|x| (x.dot(&w.theta_hat0) - x.dot(theta)).abs())
        .fold(0.0, f64::max);
    WarmupRow {
        method: w.method.clone(),
        repeat: rep,
        samples_probing: w.samples_probing,
        samples_planning: w.samples_planning,
        total: w.total,
        max_error,
        valid: max_error <= 1.0,
    }
}

/// Naive, WAR and oracle warmups with real sampling, one instance per repeat.
pub fn warmup_bench_experiment(cfg: &ExperimentConfig) -> Result<Vec<WarmupRow>> {
    expect_kind(cfg, &[ExperimentKind::WarmupBench])?;
    let per = run_indexed(cfg.repeats, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_INSTANCE, r as u64));
        let arms = cfg.arms.build(cfg.d, cfg.s, &mut rng)?;
        let theta = cfg.theta.build(cfg.d, cfg.s, &mut rng)?;
        let env = |m: u64| {
            Environment::new(
                arms.clone(),
                theta.clone(),
                derive_seed(cfg.seed, TAG_ENV + m, r as u64),
            )
        };
        let n = naive_warmup(&mut env(0)?, &arms, cfg.s, cfg.delta, &cfg.design)?;
        let w = war(&mut env(1)?, &arms, &cfg.war_params(cfg.s), &cfg.design)?;
        let o = oracle_warmup(&mut env(2)?, &arms, &theta, cfg.delta, &cfg.design)?;
        Ok([n, w, o]
            .iter()
            .map(|rep| warmup_row(r, &arms, &theta, rep))
            .collect::<Vec<_>>())
    })?;
    Ok(per.into_iter().flatten().collect())
}
