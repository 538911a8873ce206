//! Segmentation quality measures and the distance landscape around a known
//! partition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SegConfig;
use crate::distance::distance;
use crate::error::{Error, Result};
use crate::image::{Image, Mask, Partition, PixelId, Side};
use crate::set_metric::PixelSet;
use crate::state::SegState;

/// `2|A∩B| / (|A| + |B|)`.
pub fn dsc(a: &PixelSet, b: &PixelSet) -> Result<f64> {
    let total = a.len() + b.len();
    if total == 0 {
        return Err(Error::UndefinedDice);
    }
    Ok(2.0 * a.intersection_len(b) as f64 / total as f64)
}

/// Dice coefficient between the foregrounds of two same-shape masks.
pub fn dsc_masks(a: &Mask, b: &Mask) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::InvalidImage(format!(
            "mask shapes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let both = a
        .bits()
        .iter()
        .zip(b.bits())
        .filter(|(x, y)| **x && **y)
        .count();
    let total = a.count_ones() + b.count_ones();
    if total == 0 {
        return Err(Error::UndefinedDice);
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// Truth-foreground pixels the segmentation missed, as a white-on-black
/// image. A perfect segmentation gives an all-black image.
pub fn overlay(
    width: usize,
    height: usize,
    truth: &PixelSet,
    segmented: &PixelSet,
) -> Result<Image> {
    let n = width * height;
    let mut values = vec![0.0; n];
    for p in truth.iter() {
        if p >= n {
            return Err(Error::PixelOutOfRange { pixel: p, len: n });
        }
        if !segmented.contains(p) {
            values[p] = 1.0;
        }
    }
    Image::new(width, height, values)
}

pub fn invert(mask: &Mask) -> Mask {
    let bits = mask.bits().iter().map(|b| !b).collect();
    Mask::new(mask.width(), mask.height(), bits).expect("same shape")
}

/// One sample of the distance along the chain through the true partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    /// Negative: that many side-one pixels moved out. Positive: that many
    /// side-two pixels moved in.
    pub offset: i64,
    pub l_value: f64,
}

/// Walks away from `truth` in both directions, one pixel at a time in a
/// seeded random order, sampling the distance at every multiple of `step`.
/// Points that would empty a side are not evaluated. Sorted by offset.
pub fn landscape_chain(
    img: &Image,
    truth: &Partition,
    cfg: &SegConfig,
    order_seed: u64,
    step: usize,
) -> Result<Vec<ChainPoint>> {
    if step == 0 {
        return Err(Error::InvalidConfig(
            "landscape step must be positive".into(),
        ));
    }
    let l0 = distance(img, truth, cfg)?;

    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    let mut removals: Vec<PixelId> = truth.members(Side::One).collect();
    let mut additions: Vec<PixelId> = truth.members(Side::Two).collect();
    removals.shuffle(&mut rng);
    additions.shuffle(&mut rng);

    let walk = |order: &[PixelId], sign: i64| -> Result<Vec<ChainPoint>> {
        let mut state = SegState::new(img, truth.clone(), cfg)?;
        let mut out = Vec::new();
        // the last pixel of a side is never moved
        for (k, &p) in order[..order.len() - 1].iter().enumerate() {
            state.apply_transfer(&[p])?;
            let moved = k + 1;
            if moved % step == 0 {
                out.push(ChainPoint {
                    offset: sign * moved as i64,
                    l_value: state.distance(),
                });
            }
        }
        Ok(out)
    };
    let (down, up) = rayon::join(|| walk(&removals, -1), || walk(&additions, 1));

    let mut points = down?;
    points.reverse();
    points.push(ChainPoint {
        offset: 0,
        l_value: l0,
    });
    points.extend(up?);
    Ok(points)
}

/// Offset of the smallest sampled value; the first one on ties.
pub fn argmin_offset(points: &[ChainPoint]) -> Option<i64> {
    points
        .iter()
        .min_by(|a, b| a.l_value.total_cmp(&b.l_value))
        .map(|p| p.offset)
}
