//! Per-side order statistics for fast kernel row sums.
//!
//! Every pixel value is placed once into a global ascending order. Each side
//! keeps a Fenwick tree of member counts and value sums indexed by that
//! order, so `sum_i |a_i - t|` over a side costs one binary search plus two
//! prefix queries. The cached pair sums `A_k = sum_i sum_j f_ij^k` are
//! updated on every transfer and recomputed from scratch every
//! [`REBUILD_INTERVAL`] mutations to contain floating-point drift.

use crate::distance::{f_pair, pair_sum};
use crate::image::{PixelId, Side};

/// Mutations between two full rebuilds of the sums.
pub const REBUILD_INTERVAL: usize = 4096;

#[derive(Debug, Clone)]
struct Fenwick<T> {
    tree: Vec<T>,
}

impl<T> Fenwick<T>
where
    T: Copy + Default + std::ops::AddAssign + std::ops::SubAssign,
{
    /// Linear-time construction from point values.
    fn from_points(points: &[T]) -> Self {
        let n = points.len();
        let mut tree = vec![T::default(); n + 1];
        tree[1..].copy_from_slice(points);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = tree[i];
                tree[parent] += v;
            }
        }
        Self { tree }
    }

    fn add(&mut self, pos: usize, delta: T) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn sub(&mut self, pos: usize, delta: T) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `[0, end)`.
    fn prefix(&self, end: usize) -> T {
        let mut acc = T::default();
        let mut i = end;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }
}

#[derive(Debug, Clone)]
struct SideSums {
    counts: Fenwick<i64>,
    sums: Fenwick<f64>,
    len: usize,
    total: f64,
    pair_sum: f64,
}

#[derive(Debug, Clone)]
pub struct SumIndex {
    /// All pixel values, ascending; ties ordered by pixel id.
    sorted: Vec<f64>,
    /// Pixel id -> position in `sorted`.
    rank: Vec<usize>,
    /// Position in `sorted` -> owning side.
    owner: Vec<Side>,
    sides: [SideSums; 2],
    targets: [f64; 2],
    mutations: usize,
}

impl SumIndex {
    /// `labels[i]` is the side of pixel `i`; `targets` are `[p1, p2]`.
    pub fn new(values: &[f64], labels: &[Side], targets: [f64; 2]) -> Self {
        assert_eq!(values.len(), labels.len());
        let mut order: Vec<PixelId> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut rank = vec![0; values.len()];
        for (pos, &pixel) in order.iter().enumerate() {
            rank[pixel] = pos;
        }
        let sorted = order.iter().map(|&p| values[p]).collect();
        let owner = order.iter().map(|&p| labels[p]).collect();
        let empty = SideSums {
            counts: Fenwick { tree: Vec::new() },
            sums: Fenwick { tree: Vec::new() },
            len: 0,
            total: 0.0,
            pair_sum: 0.0,
        };
        let mut index = Self {
            sorted,
            rank,
            owner,
            sides: [empty.clone(), empty],
            targets,
            mutations: 0,
        };
        index.rebuild();
        index
    }

    /// Recomputes every tree and cached sum from the membership alone.
    pub fn rebuild(&mut self) {
        for side in Side::BOTH {
            let mut counts = vec![0i64; self.sorted.len()];
            let mut sums = vec![0.0f64; self.sorted.len()];
            let mut members = Vec::new();
            for (pos, (&v, &owner)) in self.sorted.iter().zip(&self.owner).enumerate() {
                if owner == side {
                    counts[pos] = 1;
                    sums[pos] = v;
                    members.push(v);
                }
            }
            let s = &mut self.sides[side.index()];
            s.counts = Fenwick::from_points(&counts);
            s.sums = Fenwick::from_points(&sums);
            s.len = members.len();
            s.total = members.iter().sum();
            s.pair_sum = pair_sum(members, self.targets[side.index()]);
        }
        self.mutations = 0;
    }

    #[inline]
    pub fn value(&self, pixel: PixelId) -> f64 {
        self.sorted[self.rank[pixel]]
    }

    #[inline]
    pub fn len(&self, side: Side) -> usize {
        self.sides[side.index()].len
    }

    /// Cached `sum_{i,j in side} f(a_i, a_j, p_side)`.
    #[inline]
    pub fn pair_sum(&self, side: Side) -> f64 {
        self.sides[side.index()].pair_sum
    }

    pub fn targets(&self) -> [f64; 2] {
        self.targets
    }

    /// `sum_{i in side} |a_i - t|`.
    pub fn abs_dev_sum(&self, side: Side, t: f64) -> f64 {
        let s = &self.sides[side.index()];
        let end = self.sorted.partition_point(|&v| v <= t);
        let below = s.counts.prefix(end) as f64;
        let below_sum = s.sums.prefix(end);
        let above = s.len as f64 - below;
        (t * below - below_sum) + ((s.total - below_sum) - t * above)
    }

    /// `sum_{i in side} f(x, a_i, p)` in logarithmic time.
    #[inline]
    pub fn row_sum(&self, side: Side, x: f64, p: f64) -> f64 {
        self.abs_dev_sum(side, 2.0 * p - x) - self.abs_dev_sum(side, x)
    }

    /// Moves `pixel` off `from`, updating the cached pair sums first.
    pub(crate) fn transfer(&mut self, pixel: PixelId, from: Side) {
        let pos = self.rank[pixel];
        debug_assert_eq!(self.owner[pos], from);
        let to = from.other();
        let a = self.sorted[pos];
        let p_from = self.targets[from.index()];
        let p_to = self.targets[to.index()];

        let r_from = self.row_sum(from, a, p_from);
        let r_to = self.row_sum(to, a, p_to);
        self.sides[from.index()].pair_sum += f_pair(a, a, p_from) - 2.0 * r_from;
        self.sides[to.index()].pair_sum += 2.0 * r_to + f_pair(a, a, p_to);

        let s = &mut self.sides[from.index()];
        s.counts.sub(pos, 1);
        s.sums.sub(pos, a);
        s.len -= 1;
        s.total -= a;
        let s = &mut self.sides[to.index()];
        s.counts.add(pos, 1);
        s.sums.add(pos, a);
        s.len += 1;
        s.total += a;
        self.owner[pos] = to;

        self.mutations += 1;
        if self.mutations >= REBUILD_INTERVAL {
            self.rebuild();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_row_sum(values: &[f64], labels: &[Side], side: Side, x: f64, p: f64) -> f64 {
        values
            .iter()
            .zip(labels)
            .filter(|(_, &s)| s == side)
            .map(|(&a, _)| f_pair(x, a, p))
            .sum()
    }

    fn brute_pair_sum(values: &[f64], labels: &[Side], side: Side, p: f64) -> f64 {
        let members: Vec<f64> = values
            .iter()
            .zip(labels)
            .filter(|(_, &s)| s == side)
            .map(|(&a, _)| a)
            .collect();
        let mut total = 0.0;
        for &a in &members {
            for &b in &members {
                total += f_pair(a, b, p);
            }
        }
        total
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn row_sum_examples() {
        let values = [0.2, 0.0];
        let labels = [Side::Two, Side::Two];
        let idx = SumIndex::new(&values, &labels, [1.0, 0.0]);
        assert!((idx.row_sum(Side::Two, 0.2, 0.0) - 0.4).abs() < 1e-12);

        let idx = SumIndex::new(&[0.7], &[Side::One], [1.0, 0.0]);
        assert!((idx.row_sum(Side::One, 0.7, 0.3) - f_pair(0.7, 0.7, 0.3)).abs() < 1e-12);
        assert!((idx.row_sum(Side::One, 0.7, 0.3) - 0.8).abs() < 1e-12);

        let idx = SumIndex::new(&[1.0], &[Side::One], [1.0, 0.0]);
        assert!(idx.row_sum(Side::One, 0.2, 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_sum_matches_brute_force_on_random_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 300;
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let labels: Vec<Side> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.4) {
                    Side::One
                } else {
                    Side::Two
                }
            })
            .collect();
        let idx = SumIndex::new(&values, &labels, [1.0, 0.0]);
        for _ in 0..1000 {
            let side = if rng.gen_bool(0.5) {
                Side::One
            } else {
                Side::Two
            };
            let x = rng.gen_range(-1.5..2.5);
            let p = rng.gen_range(-0.5..1.5);
            let fast = idx.row_sum(side, x, p);
            let slow = brute_row_sum(&values, &labels, side, x, p);
            assert!(rel_close(fast, slow), "{fast} vs {slow}");
        }
    }

    #[test]
    fn cached_pair_sums_track_transfers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 80;
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let mut labels: Vec<Side> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Side::One
                } else {
                    Side::Two
                }
            })
            .collect();
        let targets = [1.0, 0.0];
        let mut idx = SumIndex::new(&values, &labels, targets);
        for _ in 0..500 {
            let k = rng.gen_range(0..n);
            let from = labels[k];
            if idx.len(from) == 1 {
                continue;
            }
            idx.transfer(k, from);
            labels[k] = from.other();
            for side in Side::BOTH {
                let slow = brute_pair_sum(&values, &labels, side, targets[side.index()]);
                assert!(rel_close(idx.pair_sum(side), slow));
            }
        }
    }

    #[test]
    fn periodic_rebuild_resets_counter() {
        let values: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let labels = vec![Side::One; 10];
        let mut idx = SumIndex::new(&values, &labels, [1.0, 0.0]);
        let mut from = Side::One;
        for _ in 0..REBUILD_INTERVAL {
            idx.transfer(3, from);
            from = from.other();
        }
        assert_eq!(idx.mutations, 0);
        assert_eq!(idx.len(Side::One), 10);
    }
}
