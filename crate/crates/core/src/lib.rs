//! Two-region image segmentation by minimising an L2 distance between
//! empirical distributions and their target intensities.

pub mod bench;
pub mod config;
pub mod distance;
pub mod error;
pub mod eval;
pub mod image;
pub mod io;
pub mod optimizer;
pub mod pipeline;
pub mod report;
pub mod set_metric;
pub mod state;
pub mod sum_index;
pub mod synth;

pub use config::{Backend, InitMode, NetgainMode, SegConfig, TsetMode};
pub use distance::{distance, f_pair, pair_sum};
pub use error::{Error, Result};
pub use eval::{dsc, dsc_masks, landscape_chain, ChainPoint};
pub use image::{Image, Mask, Partition, PixelId, Side};
pub use io::{read_image, read_mask, write_image, write_mask};
pub use optimizer::{run, run_from, RunOutcome, SweepStats, TransferSet};
pub use pipeline::{segment, Exec, Mode, Segmentation};
pub use report::{BenchRecord, RunReport};
pub use set_metric::{delta, PixelSet};
pub use state::SegState;
