//! Experiment configuration, seeding, execution and output files.

pub mod config;
pub mod experiments;
pub mod instances;
pub mod output;
pub mod parallel;

pub use config::{derive_seed, ExperimentConfig, ExperimentKind};
pub use experiments::{
    bias_experiment, bias_grid, bias_rows, design_contrast_experiment, design_experiment,
    design_pair, regret_experiment, table1_experiment, warmup_bench_experiment, BiasRow,
    DesignContrast, DesignPair, RegretRow, RegretSummary, Table1Row, Table1Summary, WarmupRow,
};
pub use instances::{ArmSpec, ThetaSpec};
