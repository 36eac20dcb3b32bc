//! Logistic bandits with optimal experimental designs.
//!
//! The crate is organised bottom-up: [`link`] and [`linalg`] provide the
//! numeric kernels, [`fisher`] evaluates information matrices and design
//! objectives, [`glm`] fits the logistic MLE, [`design`] solves optimal
//! designs, [`warmup`] produces initial estimates, [`bandit`] runs HOMER and
//! baselines, and [`harness`] drives reproducible experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod design;
pub mod error;
pub mod fisher;
pub mod glm;
pub mod harness;
pub mod linalg;
pub mod link;
pub mod pulls;
pub mod types;
pub mod warmup;

pub use error::{Error, Result};
pub use linalg::SpdMatrix;
pub use pulls::PullLog;
pub use types::{Arm, ArmSet, DesignWeights, Theta};
