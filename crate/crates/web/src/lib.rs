//! wasm-bindgen exports for `www/index.html`. Every export returns JSON.

use logbandit::harness::{
    bias_rows, design_contrast_experiment, table1_experiment, ArmSpec, ExperimentConfig,
    ExperimentKind, ThetaSpec,
};
use logbandit::Error;
use wasm_bindgen::prelude::*;

fn to_js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))
}

pub fn design_contrast_json(arms: &str, theta_x: f64, theta_y: f64) -> Result<String, Error> {
    let spec = ArmSpec::parse_short(arms)?;
    let mut cfg = ExperimentConfig::new(ExperimentKind::DesignContrast, 2, spec, 0.05, 0);
    cfg.theta = ThetaSpec::Explicit {
        coords: vec![theta_x, theta_y],
    };
    json(&design_contrast_experiment(&cfg)?)
}

pub fn bias_curve_json(c: f64) -> Result<String, Error> {
    if !c.is_finite() || c.abs() > 12.0 {
        return Err(Error::InvalidArgument(format!(
            "c must lie in [-12, 12], got {c}"
        )));
    }
    json(&bias_rows(c))
}

pub fn warmup_counts_json(s: f64, arms: usize, seed: u64) -> Result<String, Error> {
    let mut cfg = ExperimentConfig::new(
        ExperimentKind::Table1,
        3,
        ArmSpec::UnitSphere { count: arms },
        0.05,
        seed,
    );
    cfg.s_values = vec![s];
    cfg.validate()?;
    json(&table1_experiment(&cfg)?.rows)
}

/// G- and H-optimal designs on a 2-d arm set (`circle30`, `spaced10`, ...).
#[wasm_bindgen]
pub fn design_contrast(arms: &str, theta_x: f64, theta_y: f64) -> Result<String, JsValue> {
    design_contrast_json(arms, theta_x, theta_y).map_err(to_js)
}

/// Exact bias of the MLE and KT estimators of a single logistic parameter.
#[wasm_bindgen]
pub fn bias_curve(c: f64) -> Result<String, JsValue> {
    bias_curve_json(c).map_err(to_js)
}

/// Naive, WAR and oracle warmup sample counts on one random instance.
#[wasm_bindgen]
pub fn warmup_counts(s: f64, arms: usize, seed: u64) -> Result<String, JsValue> {
    warmup_counts_json(s, arms, seed).map_err(to_js)
}
