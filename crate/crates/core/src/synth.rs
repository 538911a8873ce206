//! Synthetic test images: geometric shapes, the pseudo-QR pattern and
//! additive Gaussian noise.
//!
//! Noise uses a counter-indexed SplitMix64 stream: pixel `k` draws the
//! uniforms at counters `2k` and `2k + 1` and feeds them through Box-Muller
//! (cosine branch). Transcendentals come from `libm`, so a given seed gives
//! bit-identical images on every platform.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Circle,
    Square,
    Triangle,
    Star,
    PseudoQr,
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(ShapeKind::Circle),
            "square" => Ok(ShapeKind::Square),
            "triangle" => Ok(ShapeKind::Triangle),
            "star" => Ok(ShapeKind::Star),
            "qr" | "pseudo-qr" => Ok(ShapeKind::PseudoQr),
            other => Err(Error::Geometry(format!("unknown shape kind `{other}`"))),
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Square => "square",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Star => "star",
            ShapeKind::PseudoQr => "qr",
        })
    }
}

/// Geometry in pixel units. Polygon vertices are `(x, y) = (col, row)`
/// coordinates; a pixel is inside when its centre is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Circle {
        center_row: usize,
        center_col: usize,
        radius: usize,
    },
    Square {
        top: usize,
        left: usize,
        side: usize,
    },
    Polygon {
        vertices: Vec<(f64, f64)>,
    },
    PseudoQr {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub width: usize,
    pub height: usize,
    pub geometry: Geometry,
}

impl ShapeSpec {
    /// Default geometry for `kind`, scaled to the image size. `seed` only
    /// matters for the pseudo-QR pattern.
    pub fn default_for(kind: ShapeKind, width: usize, height: usize, seed: u64) -> Self {
        let side = width.min(height);
        let (w, h) = (width as f64, height as f64);
        let geometry = match kind {
            ShapeKind::Circle => Geometry::Circle {
                center_row: height / 2,
                center_col: width / 2,
                radius: (side * 3) / 10,
            },
            ShapeKind::Square => {
                let s = side / 2;
                Geometry::Square {
                    top: (height - s) / 2,
                    left: (width - s) / 2,
                    side: s,
                }
            }
            ShapeKind::Triangle => Geometry::Polygon {
                vertices: vec![
                    (0.5 * w, 0.15 * h),
                    (0.15 * w, 0.85 * h),
                    (0.85 * w, 0.85 * h),
                ],
            },
            ShapeKind::Star => {
                let outer = 0.4 * side as f64;
                let inner = 0.16 * side as f64;
                let (cx, cy) = (0.5 * w, 0.5 * h);
                let vertices = (0..10)
                    .map(|i| {
                        let r = if i % 2 == 0 { outer } else { inner };
                        let angle = -PI / 2.0 + i as f64 * PI / 5.0;
                        (cx + r * angle.cos(), cy + r * angle.sin())
                    })
                    .collect();
                Geometry::Polygon { vertices }
            }
            ShapeKind::PseudoQr => Geometry::PseudoQr {
                count: width * height / 2,
                seed,
            },
        };
        Self {
            kind,
            width,
            height,
            geometry,
        }
    }
}

/// Clean image (1 inside, 0 outside) and its true partition (inside = side one).
pub fn make_shape(spec: &ShapeSpec) -> Result<(Image, Partition)> {
    let (width, height) = (spec.width, spec.height);
    if width == 0 || height == 0 {
        return Err(Error::Geometry("image dimensions must be positive".into()));
    }
    let inside: Vec<bool> = match &spec.geometry {
        Geometry::Circle {
            center_row,
            center_col,
            radius,
        } => {
            let (cr, cc, r) = (*center_row, *center_col, *radius);
            if cr < r || cc < r || cr + r >= height || cc + r >= width {
                return Err(Error::Geometry(format!(
                    "circle of radius {r} at ({cr}, {cc}) leaves the {width}x{height} image"
                )));
            }
            let r2 = (r * r) as i64;
            (0..height * width)
                .map(|i| {
                    let dr = (i / width) as i64 - cr as i64;
                    let dc = (i % width) as i64 - cc as i64;
                    dr * dr + dc * dc <= r2
                })
                .collect()
        }
        Geometry::Square { top, left, side } => {
            let (t, l, s) = (*top, *left, *side);
            if t + s > height || l + s > width {
                return Err(Error::Geometry(format!(
                    "square of side {s} at ({t}, {l}) leaves the {width}x{height} image"
                )));
            }
            (0..height * width)
                .map(|i| {
                    let (r, c) = (i / width, i % width);
                    r >= t && r < t + s && c >= l && c < l + s
                })
                .collect()
        }
        Geometry::Polygon { vertices } => {
            if vertices.len() < 3 {
                return Err(Error::Geometry("polygon needs at least 3 vertices".into()));
            }
            let fits = vertices.iter().all(|&(x, y)| {
                x.is_finite()
                    && y.is_finite()
                    && (0.0..=width as f64).contains(&x)
                    && (0.0..=height as f64).contains(&y)
            });
            if !fits {
                return Err(Error::Geometry(format!(
                    "polygon vertex outside the {width}x{height} image"
                )));
            }
            (0..height * width)
                .map(|i| {
                    let x = (i % width) as f64 + 0.5;
                    let y = (i / width) as f64 + 0.5;
                    even_odd_contains(vertices, x, y)
                })
                .collect()
        }
        Geometry::PseudoQr { count, seed } => {
            return make_pseudo_qr(width, height, *count, *seed);
        }
    };
    let values = inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok((
        Image::new(width, height, values)?,
        Partition::from_bools(&inside),
    ))
}

fn even_odd_contains(vertices: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = vertices.len() - 1;
    for i in 0..vertices.len() {
        let (xi, yi) = vertices[i];
        let (xj, yj) = vertices[j];
        if (yi > y) != (yj > y) {
            let cross = xi + (y - yi) * (xj - xi) / (yj - yi);
            if x < cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// `count` distinct white pixels at uniformly drawn `(row, col)` pairs.
///
/// Collisions are redrawn, so the foreground has exactly `count` pixels.
pub fn make_pseudo_qr(
    width: usize,
    height: usize,
    count: usize,
    seed: u64,
) -> Result<(Image, Partition)> {
    let n = width * height;
    if n == 0 {
        return Err(Error::Geometry("image dimensions must be positive".into()));
    }
    if count > n {
        return Err(Error::Geometry(format!(
            "{count} foreground pixels requested for {n} pixels"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = BTreeSet::new();
    while chosen.len() < count {
        let row = rng.gen_range(0..height);
        let col = rng.gen_range(0..width);
        chosen.insert(row * width + col);
    }
    let mut values = vec![0.0; n];
    for &p in &chosen {
        values[p] = 1.0;
    }
    Ok((
        Image::new(width, height, values)?,
        Partition::from_side_one(n, chosen),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Element `counter` of the SplitMix64 sequence started at `seed`.
#[inline]
pub fn splitmix64_at(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Uniform on `(0, 1]` with 53 random bits.
#[inline]
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal deviate for pixel `index`.
pub fn standard_normal_at(seed: u64, index: u64) -> f64 {
    let u1 = unit_open(splitmix64_at(seed, 2 * index));
    let u2 = unit_open(splitmix64_at(seed, 2 * index + 1));
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Adds i.i.d. `N(0, sigma^2)` noise. The result is not clamped.
pub fn add_noise(img: &Image, spec: NoiseSpec) -> Result<Image> {
    if !spec.sigma.is_finite() || spec.sigma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise sigma must be finite and nonnegative, got {}",
            spec.sigma
        )));
    }
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let values = img
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| v + spec.sigma * standard_normal_at(spec.seed, i as u64))
        .collect();
    Image::new(img.width(), img.height(), values)
}
