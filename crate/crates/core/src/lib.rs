//! Points-per-game projection for NHL skaters and a Player Availability
//! Rating (PAR) built on top of it.
//!
//! The pipeline:
//!
//! 1. [`ingest`] reads skater, team, and baseline CSV snapshots, splits the
//!    skaters 80/10/10 with a seeded shuffle, and z-scores the four features
//!    (height, weight, time on ice, shooting percentage) using training
//!    statistics only.
//! 2. [`models`] fits five regressors written from scratch (ridge regression,
//!    k-nearest neighbours, CART, random forest, and a ReLU MLP), grid-searches
//!    each on the validation split, and keeps the kind with the lowest
//!    validation MAE.
//! 3. [`evaluate`] scores predictions and external projections on the top
//!    scorers by actual PPG and emits per-rank curve data.
//! 4. [`par`] turns the gap between projected and actual PPG, scaled by team
//!    form, into a ranked availability leaderboard.
//!
//! [`persist`] saves fitted models as JSON archives that reload bit-exactly,
//! and [`cli`] wires the stages together behind the `puckpar` binary.
//!
//! ```no_run
//! use puckpar::{ingest, models, par, synth};
//!
//! # fn main() -> puckpar::Result<()> {
//! let records = synth::skaters(&synth::SynthConfig::default());
//! let dataset = ingest::Dataset::from_records(&records, 42)?;
//! let report = models::search_all(&dataset, models::default_grid)?;
//! let model = report.winner_model();
//! let predicted = model.predict_records(&records)?;
//! # let _ = (predicted, par::ParConfig::default());
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod matrix;
pub mod models;
pub mod par;
pub mod persist;
pub mod synth;

pub use domain::{
    ppg, FeatureVector, Hyperparams, ModelKind, ParEntry, PpgLabel, SkaterRecord, TeamForm,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
