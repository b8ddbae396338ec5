use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    Architecture(String),

    #[error("parameter vector has length {got}, architecture needs {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("bending rigidity must be nonzero")]
    ZeroRigidity,

    #[error("invalid material: {0}")]
    Material(String),

    #[error("boundary normal ({nx}, {ny}) is not unit length")]
    NonUnitNormal { nx: f64, ny: f64 },

    #[error("non-finite residual at collocation point {index}")]
    NonFiniteResidual { index: usize },

    #[error("non-finite loss")]
    NonFiniteLoss,

    #[error("training diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("oracle field is identically zero on the sample set")]
    ZeroNormOracle,

    #[error("field sample sets differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown benchmark case '{0}'; valid ids: ss-square, clamped-square, clamped-circular, ss-winkler")]
    UnknownCase(String),

    #[error("invalid parameters file: {0}")]
    ParamsFile(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
