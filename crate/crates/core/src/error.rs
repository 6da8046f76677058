use std::io;

use thiserror::Error;

use crate::tensor::TensorKind;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid radar config: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}` (expected one of: raddet-ti, desk-small)")]
    UnknownPreset(String),

    #[error("reflection point rejected: {field} = {value} ({reason})")]
    InvalidPoint {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: [usize; 3],
        actual: [usize; 3],
    },

    #[error("expected a {expected:?} tensor, got {actual:?}")]
    WrongKind {
        expected: TensorKind,
        actual: TensorKind,
    },

    #[error("PSF window {window:?} does not fit the grid {grid:?}")]
    PsfTooLarge { window: [usize; 3], grid: [usize; 3] },

    #[error("PSF has zero energy")]
    DegeneratePsf,

    #[error("energy fraction must lie in (0, 1], got {0}")]
    InvalidEnergyFraction(f64),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("infeasible scene: {0}")]
    InfeasibleScene(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
