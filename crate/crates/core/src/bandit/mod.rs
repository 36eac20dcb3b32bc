//! HOMER, baselines, and regret accounting.

pub mod baseline;
pub mod env;
pub mod homer;
pub mod ledger;

pub use baseline::{baseline_policy, Baseline};
pub use env::{Environment, RewardSource};
pub use homer::{
    homer_budgets, homer_round, run_homer, HomerParams, HomerRun, HomerState, WarmupChoice,
};
pub use ledger::{CurvePoint, Phase, RegretLedger};
