//! Greedy transfer-set descent on the distance.
//!
//! Each sweep builds the ordered transfer set of side one against the
//! shrinking side, moves it, then does the same for the pixels that were on
//! side two when the sweep began. Pixels that just arrived on side two are
//! not candidates for moving back within the same sweep. The loop ends when
//! both transfer sets come back empty.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{InitMode, NetgainMode, SegConfig, TsetMode};
use crate::error::{Error, Result};
use crate::image::{Image, Partition, PixelId, Side};
use crate::state::SegState;

/// Pixels accepted for transfer off `side`, in selection order, with the
/// netgain each had at the moment it was accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSet {
    pub side: Side,
    pub pixels: Vec<PixelId>,
    pub netgains: Vec<f64>,
}

impl TransferSet {
    fn empty(side: Side) -> Self {
        Self {
            side,
            pixels: Vec::new(),
            netgains: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn netgain_sum(&self) -> f64 {
        self.netgains.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub sweep_index: usize,
    pub l_before: f64,
    pub l_after: f64,
    pub moved_1to2: usize,
    pub moved_2to1: usize,
    /// Sum of the accepted netgains of both transfer sets.
    pub netgain_sum: f64,
    pub elapsed: f64,
}

impl SweepStats {
    pub fn moved(&self) -> usize {
        self.moved_1to2 + self.moved_2to1
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub partition: Partition,
    pub sweeps: Vec<SweepStats>,
    /// Set when asymptotic netgains started cycling and the remaining
    /// sweeps ran with exact netgains.
    pub fell_back_to_exact: bool,
}

impl RunOutcome {
    pub fn initial_distance(&self) -> Option<f64> {
        self.sweeps.first().map(|s| s.l_before)
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.sweeps.last().map(|s| s.l_after)
    }
}

/// Netgains within this relative margin of zero count as zero; they are
/// rounding noise from the accumulated pair sums.
pub const ZERO_TOLERANCE: f64 = 1e-12;

fn zero_band(state: &SegState<'_>) -> f64 {
    ZERO_TOLERANCE * (1.0 + state.distance().abs())
}

/// Pixels of `side` whose single transfer has negative netgain, ascending.
pub fn negative_set(state: &SegState<'_>, side: Side, mode: NetgainMode) -> Vec<PixelId> {
    let members: Vec<PixelId> = state.partition().members(side).collect();
    screen(state, &members, mode)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

fn screen(state: &SegState<'_>, candidates: &[PixelId], mode: NetgainMode) -> Vec<(PixelId, f64)> {
    let band = zero_band(state);
    candidates
        .iter()
        .filter_map(|&p| match state.netgain(p, mode) {
            Ok(ng) if ng < -band => Some((p, ng)),
            _ => None,
        })
        .collect()
}

/// Builds the transfer set of `side` without touching `state`.
pub fn build_transfer_set(state: &SegState<'_>, side: Side, cfg: &SegConfig) -> TransferSet {
    let mut scratch = state.clone();
    let members: Vec<PixelId> = state.partition().members(side).collect();
    collect_transfers(
        &mut scratch,
        side,
        &members,
        cfg.netgain_mode,
        cfg.tset_mode,
    )
}

/// Builds the transfer set from `candidates` (all on `side`), applying each
/// accepted pixel to `state` as it goes.
fn collect_transfers(
    state: &mut SegState<'_>,
    side: Side,
    candidates: &[PixelId],
    mode: NetgainMode,
    tset: TsetMode,
) -> TransferSet {
    let mut out = TransferSet::empty(side);
    let band = zero_band(state);
    let mut screened = screen(state, candidates, mode);
    match tset {
        TsetMode::Strict => {
            let mut remaining: Vec<PixelId> = screened.into_iter().map(|(p, _)| p).collect();
            loop {
                // candidates stay in ascending id order, so `<` keeps the lowest id on ties
                let mut best: Option<(usize, f64)> = None;
                for (slot, &p) in remaining.iter().enumerate() {
                    if let Ok(ng) = state.netgain(p, mode) {
                        if best.is_none_or(|(_, b)| ng < b) {
                            best = Some((slot, ng));
                        }
                    }
                }
                match best {
                    Some((slot, ng)) if ng < -band => {
                        let p = remaining.remove(slot);
                        state.move_pixel(p);
                        out.pixels.push(p);
                        out.netgains.push(ng);
                    }
                    _ => break,
                }
            }
        }
        TsetMode::SortedHeuristic => {
            screened.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            for (p, _) in screened {
                match state.netgain(p, mode) {
                    Ok(ng) if ng < -band => {
                        state.move_pixel(p);
                        out.pixels.push(p);
                        out.netgains.push(ng);
                    }
                    _ => break,
                }
            }
        }
    }
    out
}

/// One alternating sweep. Returns the two applied transfer sets as well.
pub fn sweep_with_sets(
    state: &mut SegState<'_>,
    cfg: &SegConfig,
    sweep_index: usize,
) -> (SweepStats, TransferSet, TransferSet) {
    sweep_mode(state, cfg, cfg.netgain_mode, sweep_index)
}

fn sweep_mode(
    state: &mut SegState<'_>,
    cfg: &SegConfig,
    mode: NetgainMode,
    sweep_index: usize,
) -> (SweepStats, TransferSet, TransferSet) {
    let start = Instant::now();
    let l_before = state.distance();
    let side_one: Vec<PixelId> = state.partition().members(Side::One).collect();
    let side_two: Vec<PixelId> = state.partition().members(Side::Two).collect();

    let t1 = collect_transfers(state, Side::One, &side_one, mode, cfg.tset_mode);
    let t2 = collect_transfers(state, Side::Two, &side_two, mode, cfg.tset_mode);

    let stats = SweepStats {
        sweep_index,
        l_before,
        l_after: state.distance(),
        moved_1to2: t1.len(),
        moved_2to1: t2.len(),
        netgain_sum: t1.netgain_sum() + t2.netgain_sum(),
        elapsed: start.elapsed().as_secs_f64(),
    };
    (stats, t1, t2)
}

pub fn sweep(state: &mut SegState<'_>, cfg: &SegConfig, sweep_index: usize) -> SweepStats {
    sweep_with_sets(state, cfg, sweep_index).0
}

/// Starting partition for `run`. Both sides are always nonempty.
pub fn initial_partition(img: &Image, cfg: &SegConfig) -> Result<Partition> {
    if img.len() < 2 {
        return Err(Error::InvalidImage(
            "at least two pixels are needed for a two-sided partition".into(),
        ));
    }
    let mut labels: Vec<Side> = match cfg.init {
        InitMode::RandomBalanced => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.init_seed);
            (0..img.len())
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Side::One
                    } else {
                        Side::Two
                    }
                })
                .collect()
        }
        InitMode::Threshold => img.values().iter().map(|&v| cfg.nearest_side(v)).collect(),
    };
    for side in Side::BOTH {
        if !labels.contains(&side) {
            // seed the empty side with the pixel nearest its target
            let target = cfg.target(side);
            let pick = (0..img.len())
                .min_by(|&a, &b| {
                    (img.value(a) - target)
                        .abs()
                        .total_cmp(&(img.value(b) - target).abs())
                        .then(a.cmp(&b))
                })
                .unwrap();
            labels[pick] = side;
        }
    }
    Ok(Partition::from_labels(labels))
}

/// Side-one count plus a hash of the labels. The cached distance is not
/// usable here: rounding in the pair sums differs between visits.
fn state_key(state: &SegState<'_>) -> (usize, u64) {
    let mut h = DefaultHasher::new();
    state.partition().labels().hash(&mut h);
    (state.len(Side::One), h.finish())
}

/// Runs sweeps from `initial` until both transfer sets are empty.
pub fn run_from(img: &Image, initial: Partition, cfg: &SegConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut state = SegState::new(img, initial, cfg)?;
    let mut mode = cfg.netgain_mode;
    let mut fell_back = false;
    let mut seen: HashSet<(usize, u64)> = HashSet::new();
    seen.insert(state_key(&state));

    let mut sweeps = Vec::new();
    for i in 0..cfg.max_sweeps {
        let (stats, _, _) = sweep_mode(&mut state, cfg, mode, i);
        let moved = stats.moved();
        sweeps.push(stats);
        if moved == 0 {
            return Ok(RunOutcome {
                partition: state.into_partition(),
                sweeps,
                fell_back_to_exact: fell_back,
            });
        }
        let key = state_key(&state);
        if !seen.insert(key) {
            match mode {
                NetgainMode::Asymptotic => {
                    mode = NetgainMode::Exact;
                    fell_back = true;
                    seen.clear();
                    seen.insert(key);
                }
                // exact descent cannot revisit a state; a repeat means the
                // remaining netgains are rounding noise around zero
                NetgainMode::Exact => {
                    return Ok(RunOutcome {
                        partition: state.into_partition(),
                        sweeps,
                        fell_back_to_exact: fell_back,
                    });
                }
            }
        }
    }
    Err(Error::NonConvergence {
        sweeps: cfg.max_sweeps,
    })
}

/// Initializes per `cfg.init` and runs to convergence.
pub fn run(img: &Image, cfg: &SegConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let initial = initial_partition(img, cfg)?;
    run_from(img, initial, cfg)
}

/// True iff no transferable pixel on either side has negative exact netgain
/// beyond rounding.
pub fn verify_local_min(state: &SegState<'_>) -> bool {
    let band = zero_band(state);
    (0..state.partition().len()).all(|p| match state.netgain_exact(p) {
        Ok(ng) => ng >= -band,
        Err(_) => true,
    })
}
