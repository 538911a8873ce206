use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Side;

/// How the change in distance for a single-pixel transfer is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetgainMode {
    /// Exact difference of the two distances, with updated side sizes.
    Exact,
    /// Closed form that keeps the current side sizes in every denominator.
    Asymptotic,
}

/// Construction rule for the ordered transfer set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TsetMode {
    /// Repeated argmin over the remaining candidates against the shrinking side.
    Strict,
    /// One sort of the initial netgains, then in-order acceptance with a
    /// fresh recheck of every candidate.
    SortedHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Every pixel joins side one with probability 1/2.
    RandomBalanced,
    /// Every pixel joins the side whose target is nearer.
    Threshold,
}

/// Row-sum evaluation strategy used by the netgain queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Sorted-rank prefix sums, logarithmic per query.
    Indexed,
    /// Direct scan over the side, linear per query.
    Naive,
}

/// All segmentation tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegConfig {
    pub p1: f64,
    pub p2: f64,
    pub netgain_mode: NetgainMode,
    pub tset_mode: TsetMode,
    pub init: InitMode,
    pub init_seed: u64,
    pub max_sweeps: usize,
    pub patch_len: usize,
    pub stride: usize,
    pub vote_threshold: f64,
    pub median_window: usize,
    pub backend: Backend,
}

impl Default for SegConfig {
    fn default() -> Self {
        Self {
            p1: 1.0,
            p2: 0.0,
            netgain_mode: NetgainMode::Exact,
            tset_mode: TsetMode::SortedHeuristic,
            init: InitMode::RandomBalanced,
            init_seed: 0,
            // sorted transfer sets can end in a long tail of one-pixel
            // exchanges; 48-pixel noisy windows occasionally pass 100 sweeps
            max_sweeps: 1000,
            patch_len: 16,
            stride: 2,
            vote_threshold: 0.5,
            median_window: 3,
            backend: Backend::Indexed,
        }
    }
}

impl SegConfig {
    #[inline]
    pub fn target(&self, side: Side) -> f64 {
        match side {
            Side::One => self.p1,
            Side::Two => self.p2,
        }
    }

    pub fn targets(&self) -> [f64; 2] {
        [self.p1, self.p2]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.p1.is_finite() || !self.p2.is_finite() {
            return bad("targets must be finite".into());
        }
        if self.p1 == self.p2 {
            return bad(format!("p1 and p2 must differ, both are {}", self.p1));
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be positive".into());
        }
        if self.patch_len == 0 {
            return bad("patch_len must be positive".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(self.vote_threshold > 0.0 && self.vote_threshold <= 1.0) {
            return bad(format!(
                "vote_threshold must lie in (0, 1], got {}",
                self.vote_threshold
            ));
        }
        if self.median_window == 0 || self.median_window.is_multiple_of(2) {
            return bad(format!(
                "median_window must be odd and positive, got {}",
                self.median_window
            ));
        }
        Ok(())
    }

    /// Side whose target is nearer to `value`; exact ties go to side two.
    pub fn nearest_side(&self, value: f64) -> Side {
        if (value - self.p1).abs() < (value - self.p2).abs() {
            Side::One
        } else {
            Side::Two
        }
    }
}
