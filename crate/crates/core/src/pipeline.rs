//! Patch-wise segmentation, median post-filtering and the sort-based
//! "segment together" transform.
//!
//! Patch results are combined by voting: each window is segmented on its
//! own, its labels are aligned so that side one is the side whose mean is
//! further toward `p1`, and every pixel labelled side one gets a vote. A pixel ends
//! on side one when its vote fraction reaches `vote_threshold`. Windows with
//! a single repeated value carry no split; they vote for the side whose
//! target is nearer to that value.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SegConfig;
use crate::error::{Error, Result};
use crate::image::{Image, Mask, Partition, PixelId, Side};
use crate::optimizer;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    pub patch_len: usize,
    pub stride: usize,
    /// `(top, left)` origins, row-major.
    pub windows: Vec<(usize, usize)>,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Origins `0, stride, 2*stride, ...`; a final origin flush with the far
/// edge is added when the stride does not land on it.
fn axis_origins(dim: usize, len: usize, stride: usize) -> Vec<usize> {
    let last = dim - len;
    let mut out: Vec<usize> = (0..=last).step_by(stride).collect();
    if *out.last().unwrap() != last {
        out.push(last);
    }
    out
}

pub fn extract_patches(
    width: usize,
    height: usize,
    len: usize,
    stride: usize,
) -> Result<PatchGrid> {
    if len == 0 || stride == 0 {
        return Err(Error::InvalidConfig(
            "patch length and stride must be positive".into(),
        ));
    }
    if len > width.min(height) {
        return Err(Error::InvalidConfig(format!(
            "patch length {len} exceeds the {width}x{height} image"
        )));
    }
    let rows = axis_origins(height, len, stride);
    let cols = axis_origins(width, len, stride);
    let windows = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect();
    Ok(PatchGrid {
        patch_len: len,
        stride,
        windows,
    })
}

/// Per-pixel side-one votes and the number of windows covering the pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMap {
    pub votes: Vec<u32>,
    pub coverage: Vec<u32>,
}

impl VoteMap {
    pub fn fraction(&self, pixel: PixelId) -> f64 {
        self.votes[pixel] as f64 / self.coverage[pixel] as f64
    }

    /// Side one where the vote fraction reaches `threshold`.
    pub fn decide(&self, threshold: f64) -> Partition {
        let bools: Vec<bool> = self
            .votes
            .iter()
            .zip(&self.coverage)
            .map(|(&v, &c)| c > 0 && v as f64 >= threshold * c as f64)
            .collect();
        Partition::from_bools(&bools)
    }
}

/// Whether independent patch work may run on the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Serial,
    Parallel,
}

/// Optimizer seed for the window at `(top, left)`; the origin keeps `seed`.
pub fn window_seed(seed: u64, top: usize, left: usize) -> u64 {
    seed ^ (((top as u64) << 32) | left as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Relabels so side one is the side whose mean intensity lies further
/// toward `p1` along the `p2 -> p1` axis; between the targets this is the
/// side whose mean is nearest `p1`. On an exact tie, the side holding
/// pixel 0 becomes side two.
pub fn align_labels(img: &Image, part: &Partition, cfg: &SegConfig) -> Partition {
    let mean = |side: Side| -> Option<f64> {
        let n = part.count(side);
        (n > 0).then(|| part.members(side).map(|i| img.value(i)).sum::<f64>() / n as f64)
    };
    let dir = (cfg.p1 - cfg.p2).signum();
    let swap = match (mean(Side::One), mean(Side::Two)) {
        (Some(m1), Some(m2)) if m1 != m2 => (m2 - m1) * dir > 0.0,
        (Some(_), Some(_)) => part.side(0) == Side::One,
        _ => false,
    };
    if swap {
        part.swapped()
    } else {
        part.clone()
    }
}

fn is_constant(img: &Image) -> bool {
    let first = img.value(0);
    img.values().iter().all(|&v| v == first)
}

/// Side-one flags for one window, in window-local row-major order.
pub(crate) fn window_votes(
    img: &Image,
    cfg: &SegConfig,
    top: usize,
    left: usize,
) -> Result<Vec<bool>> {
    let len = cfg.patch_len;
    let patch = img.crop(top, left, len, len)?;
    if is_constant(&patch) {
        let vote = cfg.nearest_side(patch.value(0)) == Side::One;
        return Ok(vec![vote; patch.len()]);
    }
    let local = SegConfig {
        init_seed: window_seed(cfg.init_seed, top, left),
        ..cfg.clone()
    };
    let outcome = optimizer::run(&patch, &local).map_err(|e| Error::Patch {
        top,
        left,
        source: Box::new(e),
    })?;
    Ok(align_labels(&patch, &outcome.partition, cfg).side_one_mask())
}

pub fn vote_map(img: &Image, cfg: &SegConfig, exec: Exec) -> Result<VoteMap> {
    cfg.validate()?;
    let grid = extract_patches(img.width(), img.height(), cfg.patch_len, cfg.stride)?;
    let per_window: Vec<Vec<bool>> = match exec {
        Exec::Serial => grid
            .windows
            .iter()
            .map(|&(t, l)| window_votes(img, cfg, t, l))
            .collect::<Result<_>>()?,
        Exec::Parallel => grid
            .windows
            .par_iter()
            .map(|&(t, l)| window_votes(img, cfg, t, l))
            .collect::<Result<_>>()?,
    };

    let len = cfg.patch_len;
    let mut votes = vec![0u32; img.len()];
    let mut coverage = vec![0u32; img.len()];
    for (&(top, left), flags) in grid.windows.iter().zip(&per_window) {
        for r in 0..len {
            let row_start = (top + r) * img.width() + left;
            for c in 0..len {
                let p = row_start + c;
                coverage[p] += 1;
                votes[p] += flags[r * len + c] as u32;
            }
        }
    }
    Ok(VoteMap { votes, coverage })
}

pub fn segment_patchwise(img: &Image, cfg: &SegConfig) -> Result<Partition> {
    segment_patchwise_with(img, cfg, Exec::Parallel)
}

pub fn segment_patchwise_with(img: &Image, cfg: &SegConfig, exec: Exec) -> Result<Partition> {
    Ok(vote_map(img, cfg, exec)?.decide(cfg.vote_threshold))
}

/// Binary median over a `window x window` neighbourhood, replicating the
/// border pixels.
pub fn median_filter(mask: &Mask, window: usize) -> Result<Mask> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "median window must be odd and positive, got {window}"
        )));
    }
    if window == 1 {
        return Ok(mask.clone());
    }
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let half = (window / 2) as isize;
    let majority = window * window / 2 + 1;
    let mut out = Vec::with_capacity(mask.len());
    for r in 0..h {
        for c in 0..w {
            let mut ones = 0;
            for dr in -half..=half {
                let rr = (r + dr).clamp(0, h - 1) as usize;
                for dc in -half..=half {
                    let cc = (c + dc).clamp(0, w - 1) as usize;
                    ones += mask.get(rr, cc) as usize;
                }
            }
            out.push(ones >= majority);
        }
    }
    Mask::new(mask.width(), mask.height(), out)
}

/// Provenance of a sorted image: `forward[t]` is the original pixel now at
/// transformed position `t`; `inverse` undoes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortMapping {
    pub forward: Vec<PixelId>,
    pub inverse: Vec<usize>,
}

/// Same-shape image holding the values in nondecreasing row-major order.
/// Ties keep their original pixel order.
pub fn sort_transform(img: &Image) -> (Image, SortMapping) {
    let values = img.values();
    let mut forward: Vec<PixelId> = (0..img.len()).collect();
    forward.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut inverse = vec![0; forward.len()];
    for (t, &p) in forward.iter().enumerate() {
        inverse[p] = t;
    }
    let sorted = forward.iter().map(|&p| values[p]).collect();
    let transformed = Image::new(img.width(), img.height(), sorted).expect("same shape and values");
    (transformed, SortMapping { forward, inverse })
}

/// Writes each transformed-position label back to its original pixel.
pub fn restore(mask: &Mask, mapping: &SortMapping) -> Result<Mask> {
    if mask.len() != mapping.forward.len() {
        return Err(Error::InvalidImage(format!(
            "mask of {} pixels for a mapping of {}",
            mask.len(),
            mapping.forward.len()
        )));
    }
    let mut out = vec![false; mask.len()];
    for (t, &b) in mask.bits().iter().enumerate() {
        out[mapping.forward[t]] = b;
    }
    Mask::new(mask.width(), mask.height(), out)
}

/// Sort, segment patch-wise in the sorted image, restore.
pub fn segment_together(img: &Image, cfg: &SegConfig) -> Result<Partition> {
    let (sorted, mapping) = sort_transform(img);
    let part = segment_patchwise(&sorted, cfg)?;
    let mask = Mask::from_partition(img.width(), img.height(), &part)?;
    Ok(restore(&mask, &mapping)?.to_partition())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One optimizer run over the whole image.
    Full,
    /// Overlapping windows combined by voting.
    Patch,
    /// Patch-wise segmentation of the intensity-sorted image.
    Together,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "patch" => Ok(Mode::Patch),
            "together" => Ok(Mode::Together),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Patch => "patch",
            Mode::Together => "together",
        })
    }
}

/// Result of [`segment`]: the final mask plus the optimizer trace when a
/// single full-image run produced it.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: Mask,
    pub sweeps: Vec<optimizer::SweepStats>,
}

/// End-to-end segmentation. The median filter runs in the space where the
/// labels were produced, so in `Together` mode it smooths the sorted image
/// before the labels are restored.
pub fn segment(img: &Image, cfg: &SegConfig, mode: Mode, exec: Exec) -> Result<Segmentation> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    match mode {
        Mode::Full => {
            let out = optimizer::run(img, cfg)?;
            let mask = Mask::from_partition(w, h, &out.partition)?;
            Ok(Segmentation {
                mask: median_filter(&mask, cfg.median_window)?,
                sweeps: out.sweeps,
            })
        }
        Mode::Patch => {
            let part = segment_patchwise_with(img, cfg, exec)?;
            let mask = Mask::from_partition(w, h, &part)?;
            Ok(Segmentation {
                mask: median_filter(&mask, cfg.median_window)?,
                sweeps: Vec::new(),
            })
        }
        Mode::Together => {
            let (sorted, mapping) = sort_transform(img);
            let part = segment_patchwise_with(&sorted, cfg, exec)?;
            let mask = median_filter(&Mask::from_partition(w, h, &part)?, cfg.median_window)?;
            Ok(Segmentation {
                mask: restore(&mask, &mapping)?,
                sweeps: Vec::new(),
            })
        }
    }
}
