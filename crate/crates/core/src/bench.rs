//! Per-window timing of patch-wise segmentation across patch lengths.
//!
//! Timing is strictly serial. With `sample` set, only that many evenly
//! spaced windows are timed and the full-run time is extrapolated from the
//! per-window mean; the window count always reflects the full grid.

use std::time::Instant;

use crate::config::{Backend, SegConfig};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::pipeline::{extract_patches, window_votes};
use crate::report::BenchRecord;
use crate::synth::{add_noise, make_shape, NoiseSpec, ShapeKind, ShapeSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub lengths: Vec<usize>,
    pub reps: usize,
    /// Windows timed per length; `None` times every window.
    pub sample: Option<usize>,
    pub backends: Vec<Backend>,
}

/// Noisy circle used as the benchmark input.
pub fn bench_image(size: usize, sigma: f64, seed: u64) -> Result<Image> {
    let spec = ShapeSpec::default_for(ShapeKind::Circle, size, size, seed);
    let (clean, _) = make_shape(&spec)?;
    add_noise(&clean, NoiseSpec { sigma, seed })
}

/// `k` evenly spaced indices out of `n`.
fn spread(n: usize, k: usize) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    (0..k).map(|i| i * n / k).collect()
}

pub fn bench_harness(
    img: &Image,
    base: &SegConfig,
    opts: &BenchOptions,
) -> Result<Vec<BenchRecord>> {
    if opts.reps == 0 {
        return Err(Error::InvalidConfig("reps must be positive".into()));
    }
    if opts.sample == Some(0) {
        return Err(Error::InvalidConfig("sample must be positive".into()));
    }
    let mut records = Vec::new();
    for &backend in &opts.backends {
        for &len in &opts.lengths {
            let cfg = SegConfig {
                patch_len: len,
                backend,
                ..base.clone()
            };
            cfg.validate()?;
            let grid = extract_patches(img.width(), img.height(), len, cfg.stride)?;
            let picked = spread(grid.len(), opts.sample.unwrap_or(grid.len()));
            let start = Instant::now();
            for _ in 0..opts.reps {
                for &w in &picked {
                    let (top, left) = grid.windows[w];
                    window_votes(img, &cfg, top, left)?;
                }
            }
            let per_window = start.elapsed().as_secs_f64() / (opts.reps * picked.len()) as f64;
            records.push(BenchRecord {
                backend,
                patch_len: len,
                t: per_window * grid.len() as f64,
                n: grid.len(),
            });
        }
    }
    Ok(records)
}
