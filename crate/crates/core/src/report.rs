//! Run reports (JSON) and benchmark records (CSV).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Backend, SegConfig};
use crate::error::{Error, Result};
use crate::optimizer::SweepStats;
use crate::pipeline::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub read_seconds: f64,
    pub segment_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub init_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub config: SegConfig,
    pub width: usize,
    pub height: usize,
    /// Per-sweep trace; empty unless a single full-image run produced the mask.
    pub sweeps: Vec<SweepStats>,
    /// Distance of the final mask, absent when a side is empty.
    pub final_distance: Option<f64>,
    pub foreground_pixels: usize,
    pub dsc: Option<f64>,
    pub timings: Timings,
    pub seeds: Seeds,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Seconds per unit of the `T1` column.
pub const T1_UNIT: f64 = 1e-5;

/// Timing of patch-wise segmentation at one patch length.
///
/// Only `t` and `n` are stored; every other column is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub backend: Backend,
    pub patch_len: usize,
    /// Seconds for one full patch-wise segmentation.
    pub t: f64,
    /// Number of windows.
    pub n: usize,
}

impl BenchRecord {
    /// Seconds per window.
    pub fn t1_seconds(&self) -> f64 {
        self.t / self.n as f64
    }

    /// Seconds per window in units of [`T1_UNIT`].
    pub fn t1(&self) -> f64 {
        self.t1_seconds() / T1_UNIT
    }

    /// `T1 / L^k` for `k = 1..=4`, with `T1` in units of [`T1_UNIT`].
    pub fn ratios(&self) -> [f64; 4] {
        let l = self.patch_len as f64;
        let t1 = self.t1();
        [t1 / l, t1 / l.powi(2), t1 / l.powi(3), t1 / l.powi(4)]
    }
}

pub const BENCH_HEADER: [&str; 9] = [
    "mode", "L", "T", "N", "T1", "T1/L", "T1/L^2", "T1/L^3", "T1/L^4",
];

pub fn write_bench_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Report(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for r in records {
        let mode = match r.backend {
            Backend::Naive => "naive",
            Backend::Indexed => "indexed",
        };
        let [a, b, c, d] = r.ratios();
        w.write_record([
            mode.to_string(),
            r.patch_len.to_string(),
            format!("{:.6}", r.t),
            r.n.to_string(),
            format!("{:.6}", r.t1()),
            format!("{a:.6e}"),
            format!("{b:.6e}"),
            format!("{c:.6e}"),
            format!("{d:.6e}"),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Report(e.to_string()))
}
