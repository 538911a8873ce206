//! Mutable optimizer state: a partition plus its sum index.

use crate::config::{Backend, NetgainMode, SegConfig};
use crate::distance::f_pair;
use crate::error::{Error, Result};
use crate::image::{Image, Partition, PixelId, Side};
use crate::sum_index::SumIndex;

/// A partition of `image` together with the structures that make netgain
/// queries cheap.
///
/// The image is shared read-only; the state is single-writer.
#[derive(Debug, Clone)]
pub struct SegState<'a> {
    image: &'a Image,
    partition: Partition,
    index: SumIndex,
    targets: [f64; 2],
    backend: Backend,
}

impl<'a> SegState<'a> {
    pub fn new(image: &'a Image, partition: Partition, cfg: &SegConfig) -> Result<Self> {
        if partition.len() != image.len() {
            return Err(Error::PartitionSize {
                len: partition.len(),
                expected: image.len(),
            });
        }
        partition.check_nonempty()?;
        let targets = cfg.targets();
        let index = SumIndex::new(image.values(), partition.labels(), targets);
        Ok(Self {
            image,
            partition,
            index,
            targets,
            backend: cfg.backend,
        })
    }

    pub fn image(&self) -> &'a Image {
        self.image
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn into_partition(self) -> Partition {
        self.partition
    }

    pub fn index(&self) -> &SumIndex {
        &self.index
    }

    #[inline]
    pub fn target(&self, side: Side) -> f64 {
        self.targets[side.index()]
    }

    pub fn len(&self, side: Side) -> usize {
        self.partition.count(side)
    }

    /// Current distance from the cached pair sums.
    pub fn distance(&self) -> f64 {
        Side::BOTH
            .iter()
            .map(|&s| {
                let n = self.partition.count(s) as f64;
                self.index.pair_sum(s) / (n * n)
            })
            .sum()
    }

    /// `sum_{i in side} f(x, a_i, p)` through the configured backend.
    pub fn row_sum(&self, side: Side, x: f64, p: f64) -> f64 {
        match self.backend {
            Backend::Indexed => self.index.row_sum(side, x, p),
            Backend::Naive => self
                .image
                .values()
                .iter()
                .zip(self.partition.labels())
                .filter(|(_, &s)| s == side)
                .map(|(&a, _)| f_pair(x, a, p))
                .sum(),
        }
    }

    fn check_movable(&self, pixel: PixelId) -> Result<Side> {
        if pixel >= self.partition.len() {
            return Err(Error::PixelOutOfRange {
                pixel,
                len: self.partition.len(),
            });
        }
        let side = self.partition.side(pixel);
        if self.partition.count(side) == 1 {
            return Err(Error::LastPixelOnSide { pixel, side });
        }
        Ok(side)
    }

    /// `L(after) - L(before)` for moving `pixel` to the other side.
    pub fn netgain_exact(&self, pixel: PixelId) -> Result<f64> {
        let from = self.check_movable(pixel)?;
        let to = from.other();
        let a = self.image.value(pixel);
        let (p_from, p_to) = (self.target(from), self.target(to));
        let n_from = self.partition.count(from) as f64;
        let n_to = self.partition.count(to) as f64;
        let a_from = self.index.pair_sum(from);
        let a_to = self.index.pair_sum(to);

        let a_from_after = a_from - 2.0 * self.row_sum(from, a, p_from) + f_pair(a, a, p_from);
        let a_to_after = a_to + 2.0 * self.row_sum(to, a, p_to) + f_pair(a, a, p_to);

        let before = a_from / (n_from * n_from) + a_to / (n_to * n_to);
        let after = a_from_after / ((n_from - 1.0) * (n_from - 1.0))
            + a_to_after / ((n_to + 1.0) * (n_to + 1.0));
        Ok(after - before)
    }

    /// Closed-form netgain with the current side sizes in every denominator.
    ///
    /// Differs from [`netgain_exact`](Self::netgain_exact) by `O(1/n)`.
    pub fn netgain_asymptotic(&self, pixel: PixelId) -> Result<f64> {
        let from = self.check_movable(pixel)?;
        let to = from.other();
        let a = self.image.value(pixel);
        let (p_from, p_to) = (self.target(from), self.target(to));
        let nf2 = (self.partition.count(from) as f64).powi(2);
        let nt2 = (self.partition.count(to) as f64).powi(2);
        Ok(-2.0 / nf2 * self.row_sum(from, a, p_from)
            + 2.0 / nt2 * self.row_sum(to, a, p_to)
            + f_pair(a, a, p_from) / nf2
            + f_pair(a, a, p_to) / nt2)
    }

    pub fn netgain(&self, pixel: PixelId, mode: NetgainMode) -> Result<f64> {
        match mode {
            NetgainMode::Exact => self.netgain_exact(pixel),
            NetgainMode::Asymptotic => self.netgain_asymptotic(pixel),
        }
    }

    /// Moves every listed pixel to the other side.
    ///
    /// All pixels must sit on the same side, be distinct, and leave that side
    /// nonempty. On error the state is unchanged.
    pub fn apply_transfer(&mut self, pixels: &[PixelId]) -> Result<()> {
        let Some(&first) = pixels.first() else {
            return Ok(());
        };
        let n = self.partition.len();
        if first >= n {
            return Err(Error::PixelOutOfRange {
                pixel: first,
                len: n,
            });
        }
        let from = self.partition.side(first);
        let mut seen = std::collections::HashSet::with_capacity(pixels.len());
        for &p in pixels {
            if p >= n {
                return Err(Error::PixelOutOfRange { pixel: p, len: n });
            }
            if self.partition.side(p) != from || !seen.insert(p) {
                return Err(Error::MixedTransfer);
            }
        }
        if pixels.len() >= self.partition.count(from) {
            return Err(Error::LastPixelOnSide {
                pixel: *pixels.last().unwrap(),
                side: from,
            });
        }
        for &p in pixels {
            self.move_pixel(p);
        }
        Ok(())
    }

    /// Unchecked single move; caller guarantees the side stays nonempty.
    pub(crate) fn move_pixel(&mut self, pixel: PixelId) {
        let from = self.partition.side(pixel);
        debug_assert!(self.partition.count(from) > 1);
        self.index.transfer(pixel, from);
        self.partition.flip(pixel);
    }

    /// Recomputes the sum index from the partition.
    pub fn rebuild_index(&mut self) {
        self.index.rebuild();
    }
}
