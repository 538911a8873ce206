//! Metric on subsets of the pixel universe.

use std::collections::BTreeSet;

use crate::image::PixelId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PixelSet {
    members: BTreeSet<PixelId>,
}

impl PixelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: PixelId) -> bool {
        self.members.contains(&p)
    }

    pub fn insert(&mut self, p: PixelId) -> bool {
        self.members.insert(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = PixelId> + '_ {
        self.members.iter().copied()
    }

    pub fn intersection_len(&self, other: &PixelSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .members
            .iter()
            .filter(|p| large.members.contains(p))
            .count()
    }
}

impl FromIterator<PixelId> for PixelSet {
    fn from_iter<I: IntoIterator<Item = PixelId>>(iter: I) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

/// `(|A| - |A∩B|) ∨ (|B| - |A∩B|)`.
///
/// Reduces to `||A| - |B||` for nested sets and `|A| ∨ |B|` for disjoint ones.
pub fn delta(a: &PixelSet, b: &PixelSet) -> usize {
    let common = a.intersection_len(b);
    (a.len() - common).max(b.len() - common)
}

pub fn in_neighborhood(a: &PixelSet, b: &PixelSet, xi: usize) -> bool {
    delta(a, b) <= xi
}
