//! Experiment harness for blind deconvolution by regularized gradient
//! descent: configuration, Monte Carlo grids, CSV output, plot scripts and
//! the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod plots;
pub mod record;
pub mod trial;

pub use config::{Algo, AlgoChoice, ExperimentConfig, ExperimentKind, Settings};
pub use error::{AppError, AppResult};
pub use record::TrialRecord;
