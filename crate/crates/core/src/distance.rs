//! The two-region minimum L2 distance with `H(x) = x`.
//!
//! For a side with target `p` the integral over squared empirical
//! differences reduces to a double sum of the pairwise kernel
//! `f(a, b, p) = |a + b - 2p| - |a - b|`, normalised by the squared side
//! size. The kernel equals `2 sgn((a-p)(b-p)) min(|a-p|, |b-p|)`, which is
//! the form [`pair_sum`] evaluates after sorting.

use crate::config::SegConfig;
use crate::error::{Error, Result};
use crate::image::{Image, Partition, Side};

/// Pairwise kernel `|a + b - 2p| - |a - b|`.
#[inline]
pub fn f_pair(a: f64, b: f64, p: f64) -> f64 {
    (a + b - 2.0 * p).abs() - (a - b).abs()
}

/// `sum_i sum_j f_pair(a_i, a_j, p)` over every ordered pair, in
/// `O(n log n)`.
///
/// Works on the centred values `b = a - p`: same-sign pairs contribute
/// `+2 min(|b_i|, |b_j|)`, opposite-sign pairs `-2 min(...)`, zeros nothing.
pub fn pair_sum(values: impl IntoIterator<Item = f64>, p: f64) -> f64 {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for a in values {
        let b = a - p;
        if b > 0.0 {
            pos.push(b);
        } else if b < 0.0 {
            neg.push(-b);
        }
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);

    let same = same_sign_min_sum(&pos) + same_sign_min_sum(&neg);
    let cross = cross_min_sum(&pos, &neg);
    2.0 * same - 4.0 * cross
}

/// `sum_i sum_j min(x_i, x_j)` over ordered pairs of an ascending slice.
fn same_sign_min_sum(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| x * (2 * (m - 1 - k) + 1) as f64)
        .sum()
}

/// `sum_{x in xs} sum_{y in ys} min(x, y)` for ascending slices.
fn cross_min_sum(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.is_empty() || ys.is_empty() {
        return 0.0;
    }
    let mut prefix = Vec::with_capacity(ys.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &y in ys {
        acc += y;
        prefix.push(acc);
    }
    // xs ascending, so the split point into ys only moves right.
    let mut split = 0;
    let mut total = 0.0;
    for &x in xs {
        while split < ys.len() && ys[split] <= x {
            split += 1;
        }
        total += prefix[split] + x * (ys.len() - split) as f64;
    }
    total
}

/// Distance of a two-sided partition of `img`.
///
/// Rejects partitions of the wrong length or with an empty side.
pub fn distance(img: &Image, part: &Partition, cfg: &SegConfig) -> Result<f64> {
    if part.len() != img.len() {
        return Err(Error::PartitionSize {
            len: part.len(),
            expected: img.len(),
        });
    }
    part.check_nonempty()?;
    let mut total = 0.0;
    for side in Side::BOTH {
        let n = part.count(side) as f64;
        let values = part.members(side).map(|i| img.value(i));
        total += pair_sum(values, cfg.target(side)) / (n * n);
    }
    Ok(total)
}
