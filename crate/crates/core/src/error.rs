use std::path::PathBuf;

use thiserror::Error;

use crate::image::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("partition has {len} labels but the image has {expected} pixels")]
    PartitionSize { len: usize, expected: usize },

    #[error("side {0} of the partition is empty")]
    EmptySide(Side),

    #[error("pixel {pixel} is the last pixel on side {side}")]
    LastPixelOnSide { pixel: usize, side: Side },

    #[error("transfer mixes pixels from both sides")]
    MixedTransfer,

    #[error("pixel {pixel} out of range for {len} pixels")]
    PixelOutOfRange { pixel: usize, len: usize },

    #[error("optimizer did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("patch at (top={top}, left={left}): {source}")]
    Patch {
        top: usize,
        left: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("dice coefficient is undefined for two empty sets")]
    UndefinedDice,

    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: dimension mismatch: {reason}")]
    DimensionMismatch { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report: {0}")]
    Report(String),
}

impl Error {
    /// Short machine-readable identifier for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidImage(_) => "invalid_image",
            Error::InvalidConfig(_) => "invalid_config",
            Error::PartitionSize { .. } => "partition_size",
            Error::EmptySide(_) => "empty_side",
            Error::LastPixelOnSide { .. } => "last_pixel_on_side",
            Error::MixedTransfer => "mixed_transfer",
            Error::PixelOutOfRange { .. } => "pixel_out_of_range",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Patch { source, .. } => source.kind(),
            Error::Geometry(_) => "geometry",
            Error::UndefinedDice => "undefined_dice",
            Error::MalformedHeader { .. } => "malformed_header",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Io { .. } => "io",
            Error::Report(_) => "report",
        }
    }
}
