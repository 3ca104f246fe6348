//! Statistical word aligners: IBM Model 1 and the diagonal-tension
//! reparameterization of IBM Model 2, trained with EM.
//!
//! Training runs in either direction. A reverse model is trained on the
//! corpus with source and target exchanged, and its decoded links are
//! transposed back so every [`AlignmentSet`](crate::corpus::AlignmentSet)
//! produced here is in `(source, target)` orientation.
//!
//! Hyperparameter defaults (5 iterations, add-0.01 smoothing, initial
//! tension 4.0, NULL probability 0.08) are the conventional choices for this
//! model family.

mod distortion;
mod model;
mod table;
mod train;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use distortion::{diag_weight, LAMBDA_MAX, LAMBDA_MIN, LAMBDA_TOLERANCE};
pub use model::AlignmentModel;
pub use table::{TranslationTable, NULL_TOKEN, UNKNOWN_TOKEN};
pub use train::{decode, train, TrainOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Uniform distortion; tension is ignored.
    Model1,
    /// Diagonal prior with tension lambda.
    Diagonal,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Model1 => "ibm1",
            ModelKind::Diagonal => "diag",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ibm1" | "model1" => Ok(ModelKind::Model1),
            "diag" | "diagonal" => Ok(ModelKind::Diagonal),
            other => Err(Error::config(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Each target word picks one source word.
    Forward,
    /// Each source word picks one target word.
    Reverse,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Reverse => "rev",
        })
    }
}

/// Distortion parameters of a trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalParams {
    pub lambda: f64,
    pub p0: f64,
    pub kind: ModelKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub iterations: usize,
    /// Add-alpha smoothing of the lexical M-step. Zero gives exact EM.
    pub smoothing_alpha: f64,
    pub initial_lambda: f64,
    pub p0: f64,
    /// Re-fit lambda after every E-step (diagonal model only).
    pub lambda_search: bool,
    /// Recorded for provenance; training itself is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kind: ModelKind::Diagonal,
            iterations: 5,
            smoothing_alpha: 0.01,
            initial_lambda: 4.0,
            p0: 0.08,
            lambda_search: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::config("iterations must be at least 1"));
        }
        if !(self.smoothing_alpha >= 0.0 && self.smoothing_alpha.is_finite()) {
            return Err(Error::config("smoothing alpha must be a finite value ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.p0) {
            return Err(Error::config("p0 must lie in [0, 1)"));
        }
        if !(self.initial_lambda >= 0.0 && self.initial_lambda.is_finite()) {
            return Err(Error::config("lambda must be a finite value ≥ 0"));
        }
        Ok(())
    }
}
