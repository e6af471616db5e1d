//! Warmup schedules for adaptive optimizers, the update rules they modulate,
//! and instrumentation for studying optimizer update dynamics.
//!
//! The crate has five pieces:
//!
//! * [`schedules`] — warmup factor functions (linear, exponential, the
//!   untuned rules of thumb, RAdam's rectifier) and the effective warmup
//!   period functional.
//! * [`optim`] — SGD, Adam, and RAdam steppers with decoupled weight decay,
//!   warmup scheduling, and JSON checkpoints.
//! * [`stats`] — quantiles, Pearson correlation, coefficient of variation.
//! * [`sim`] — Monte-Carlo distribution of Adam's update magnitudes at a
//!   simulated local minimum.
//! * [`train`] — a small feed-forward classifier over IDX image data with a
//!   gradient-statistics probe, for studying the same quantities during real
//!   training.
//!
//! A rendered guide with worked examples lives in `book/`; its code snippets
//! compile and run as this crate's doctests.

pub mod error;
pub mod optim;
pub mod schedules;
pub mod sim;
pub mod stats;
pub mod train;

mod guide;

pub use error::{Error, Result};
pub use optim::{
    adam_step, radam_step, sgd_step, AdamHyperparams, Checkpoint, Optimizer, OptimizerKind,
    OptimizerState, RadamAblationMode, StepResult,
};
pub use schedules::{
    effective_warmup_period, exponential_warmup, linear_warmup, radam_rho, radam_warmup_factor,
    untuned_exponential_tau, untuned_linear_tau, RadamPhase, RhoTerms, WarmupSchedule,
};
pub use sim::{run_local_minimum_sim, stationary_median, SimConfig, SimTrajectory};
pub use train::{
    compare_warmups, load_idx, synthetic_digits, train, IdxDataset, MlpModel, ProbeConfig,
    ProbeRecord, TrainConfig, TrainOutcome,
};
