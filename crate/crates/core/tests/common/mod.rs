//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use mdseg::{Image, Partition, SegConfig, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|a + b - 2p| - |a - b|` straight from the definition.
pub fn kernel(a: f64, b: f64, p: f64) -> f64 {
    (a + b - 2.0 * p).abs() - (a - b).abs()
}

/// Double sum over ordered pairs, diagonal included.
pub fn brute_pair_sum(values: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    for &a in values {
        for &b in values {
            s += kernel(a, b, p);
        }
    }
    s
}

pub fn brute_distance(img: &Image, part: &Partition, cfg: &SegConfig) -> f64 {
    Side::BOTH
        .iter()
        .map(|&side| {
            let vals: Vec<f64> = part.members(side).map(|i| img.value(i)).collect();
            let n = vals.len() as f64;
            brute_pair_sum(&vals, cfg.target(side)) / (n * n)
        })
        .sum()
}

pub fn brute_netgain(img: &Image, part: &Partition, pixel: usize, cfg: &SegConfig) -> f64 {
    let mut moved = part.clone();
    moved.flip(pixel);
    brute_distance(img, &moved, cfg) - brute_distance(img, part, cfg)
}

/// Random small instance: 2..=12 pixels, both sides nonempty. Some
/// instances use a coarse value grid so ties occur.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Image, Partition) {
    let n = rng.gen_range(2..=12);
    let coarse = rng.gen_bool(0.3);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if coarse {
                rng.gen_range(0..=4) as f64 * 0.25
            } else {
                rng.gen_range(-0.5..1.5)
            }
        })
        .collect();
    let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let k = rng.gen_range(0..n);
    labels[k] = true;
    labels[(k + 1) % n] = false;
    let width = if n % 3 == 0 { 3 } else { n };
    let img = Image::new(width, n / width, values).unwrap();
    (img, Partition::from_bools(&labels))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
