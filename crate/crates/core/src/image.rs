//! Grayscale images, two-sided partitions and binary masks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major pixel index: `row * width + col`.
pub type PixelId = usize;

/// Rectangular grid of real-valued intensities.
///
/// Clean images live in `[0, 1]`; observed images carry additive noise and
/// are never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} values for a {width}x{height} image",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite value at pixel {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn value(&self, pixel: PixelId) -> f64 {
        self.values[pixel]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn pixel_id(&self, row: usize, col: usize) -> PixelId {
        row * self.width + col
    }

    #[inline]
    pub fn row_col(&self, pixel: PixelId) -> (usize, usize) {
        (pixel / self.width, pixel % self.width)
    }

    /// Copies the `rows x cols` window whose top-left corner is `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, rows: usize, cols: usize) -> Result<Image> {
        if top + rows > self.height || left + cols > self.width {
            return Err(Error::Geometry(format!(
                "window {rows}x{cols} at ({top}, {left}) exceeds {}x{}",
                self.height, self.width
            )));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for r in top..top + rows {
            let start = r * self.width + left;
            values.extend_from_slice(&self.values[start..start + cols]);
        }
        Image::new(cols, rows, values)
    }
}

/// One of the two regions. Side one carries target `p1`, side two `p2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    #[inline]
    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub const BOTH: [Side; 2] = [Side::One, Side::Two];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::One => f.write_str("1"),
            Side::Two => f.write_str("2"),
        }
    }
}

/// Assignment of every pixel to one of two sides.
///
/// A partition may hold an empty side (segmentation outputs sometimes do);
/// the distance and the optimizer state reject such partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<Side>,
    counts: [usize; 2],
}

impl Partition {
    pub fn from_labels(labels: Vec<Side>) -> Self {
        let n1 = labels.iter().filter(|&&s| s == Side::One).count();
        let counts = [n1, labels.len() - n1];
        Self { labels, counts }
    }

    /// `true` marks side one.
    pub fn from_bools(side_one: &[bool]) -> Self {
        Self::from_labels(
            side_one
                .iter()
                .map(|&b| if b { Side::One } else { Side::Two })
                .collect(),
        )
    }

    pub fn from_side_one(len: usize, members: impl IntoIterator<Item = PixelId>) -> Self {
        let mut labels = vec![Side::Two; len];
        for p in members {
            labels[p] = Side::One;
        }
        Self::from_labels(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Side] {
        &self.labels
    }

    #[inline]
    pub fn side(&self, pixel: PixelId) -> Side {
        self.labels[pixel]
    }

    #[inline]
    pub fn count(&self, side: Side) -> usize {
        self.counts[side.index()]
    }

    pub fn n1(&self) -> usize {
        self.counts[0]
    }

    pub fn n2(&self) -> usize {
        self.counts[1]
    }

    pub fn members(&self, side: Side) -> impl Iterator<Item = PixelId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == side)
            .map(|(i, _)| i)
    }

    pub fn has_empty_side(&self) -> bool {
        self.counts[0] == 0 || self.counts[1] == 0
    }

    pub fn check_nonempty(&self) -> Result<()> {
        for side in Side::BOTH {
            if self.count(side) == 0 {
                return Err(Error::EmptySide(side));
            }
        }
        Ok(())
    }

    /// Moves `pixel` to the opposite side.
    pub fn flip(&mut self, pixel: PixelId) {
        let from = self.labels[pixel];
        self.labels[pixel] = from.other();
        self.counts[from.index()] -= 1;
        self.counts[from.other().index()] += 1;
    }

    /// Exchanges the two labels everywhere.
    pub fn swapped(&self) -> Partition {
        Partition {
            labels: self.labels.iter().map(|s| s.other()).collect(),
            counts: [self.counts[1], self.counts[0]],
        }
    }

    pub fn side_one_mask(&self) -> Vec<bool> {
        self.labels.iter().map(|&s| s == Side::One).collect()
    }
}

/// Binary image; `true` is foreground (side one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} mask bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_partition(width: usize, height: usize, part: &Partition) -> Result<Self> {
        Self::new(width, height, part.side_one_mask())
    }

    /// Foreground wherever the intensity is at least `threshold`.
    pub fn from_image(img: &Image, threshold: f64) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            bits: img.values().iter().map(|&v| v >= threshold).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_partition(&self) -> Partition {
        Partition::from_bools(&self.bits)
    }

    /// 0/1 intensity image, suitable for writing as a graymap.
    pub fn to_image(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            values: self
                .bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = PixelId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}
