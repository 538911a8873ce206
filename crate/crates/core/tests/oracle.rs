mod common;

use common::*;
use mdseg::optimizer::{
    build_transfer_set, negative_set, run_from, sweep_with_sets, verify_local_min,
};
use mdseg::{distance, Image, NetgainMode, Partition, SegConfig, SegState, Side, TsetMode};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Image, Partition)> {
    (2usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(
                prop_oneof![(-0.5f64..1.5), (0u8..=4).prop_map(|k| k as f64 * 0.25)],
                n,
            ),
            prop::collection::vec(any::<bool>(), n),
            0..n,
        )
            .prop_map(move |(values, mut labels, k)| {
                labels[k] = true;
                labels[(k + 1) % n] = false;
                (
                    Image::new(n, 1, values).unwrap(),
                    Partition::from_bools(&labels),
                )
            })
    })
}

fn cfg_for(strict: bool, exact: bool) -> SegConfig {
    SegConfig {
        tset_mode: if strict {
            TsetMode::Strict
        } else {
            TsetMode::SortedHeuristic
        },
        netgain_mode: if exact {
            NetgainMode::Exact
        } else {
            NetgainMode::Asymptotic
        },
        ..SegConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn distance_matches_brute_force((img, part) in instance(), p1 in -0.5f64..1.5, gap in 0.1f64..1.0) {
        let cfg = SegConfig { p1, p2: p1 - gap, ..SegConfig::default() };
        let fast = distance(&img, &part, &cfg).unwrap();
        let slow = brute_distance(&img, &part, &cfg);
        prop_assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1.0), "{fast} vs {slow}");
        let state = SegState::new(&img, part, &cfg).unwrap();
        prop_assert!((state.distance() - slow).abs() <= 1e-9 * slow.abs().max(1.0));
    }

    #[test]
    fn exact_netgain_is_a_distance_difference((img, part) in instance()) {
        let cfg = SegConfig::default();
        let state = SegState::new(&img, part.clone(), &cfg).unwrap();
        for k in 0..img.len() {
            match state.netgain_exact(k) {
                Ok(ng) => {
                    let oracle = brute_netgain(&img, &part, k, &cfg);
                    prop_assert!((ng - oracle).abs() < 1e-12, "pixel {k}: {ng} vs {oracle}");
                }
                Err(_) => prop_assert_eq!(part.count(part.side(k)), 1),
            }
        }
    }

    #[test]
    fn negative_set_is_the_brute_filter((img, part) in instance()) {
        let cfg = SegConfig::default();
        let state = SegState::new(&img, part.clone(), &cfg).unwrap();
        for side in Side::BOTH {
            let expected: Vec<usize> = part
                .members(side)
                .filter(|&k| part.count(side) > 1 && brute_netgain(&img, &part, k, &cfg) < 0.0)
                .collect();
            let got = negative_set(&state, side, NetgainMode::Exact);
            // borderline values within rounding of zero may go either way
            for k in got.iter().chain(&expected) {
                if got.contains(k) != expected.contains(k) {
                    prop_assert!(brute_netgain(&img, &part, *k, &cfg).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_runs_end_at_local_minimum((img, part) in instance(), strict in any::<bool>()) {
        let cfg = cfg_for(strict, true);
        let out = run_from(&img, part, &cfg).unwrap();
        let l_final = brute_distance(&img, &out.partition, &cfg);
        for k in 0..img.len() {
            if out.partition.count(out.partition.side(k)) > 1 {
                let mut moved = out.partition.clone();
                moved.flip(k);
                prop_assert!(brute_distance(&img, &moved, &cfg) >= l_final - 1e-12);
            }
        }
        let state = SegState::new(&img, out.partition.clone(), &cfg).unwrap();
        prop_assert!(verify_local_min(&state));
    }

    #[test]
    fn accepted_netgains_telescope((img, part) in instance(), strict in any::<bool>()) {
        let cfg = cfg_for(strict, true);
        let l0 = brute_distance(&img, &part, &cfg);
        let out = run_from(&img, part, &cfg).unwrap();
        let total: f64 = out.sweeps.iter().map(|s| s.netgain_sum).sum();
        let l1 = brute_distance(&img, &out.partition, &cfg);
        prop_assert!((total - (l1 - l0)).abs() < 1e-10, "{total} vs {}", l1 - l0);
    }

    #[test]
    fn exact_sweeps_descend_and_move_each_pixel_once((img, part) in instance(), strict in any::<bool>()) {
        let cfg = cfg_for(strict, true);
        let mut state = SegState::new(&img, part, &cfg).unwrap();
        for i in 0..20 {
            let (stats, t1, t2) = sweep_with_sets(&mut state, &cfg, i);
            if stats.moved() == 0 {
                prop_assert_eq!(stats.l_after, stats.l_before);
                break;
            }
            prop_assert!(stats.l_after < stats.l_before);
            prop_assert!(t1.netgains.iter().chain(&t2.netgains).all(|&g| g < 0.0));
            for p in &t2.pixels {
                prop_assert!(!t1.pixels.contains(p));
            }
        }
    }

    #[test]
    fn strict_transfer_set_telescopes((img, part) in instance()) {
        let cfg = cfg_for(true, true);
        let state = SegState::new(&img, part.clone(), &cfg).unwrap();
        let t = build_transfer_set(&state, Side::One, &cfg);
        prop_assert_eq!(state.partition(), &part);
        let mut after = part.clone();
        for &p in &t.pixels {
            after.flip(p);
        }
        let drop = brute_distance(&img, &after, &cfg) - brute_distance(&img, &part, &cfg);
        prop_assert!((t.netgain_sum() - drop).abs() < 1e-10);
    }

    #[test]
    fn asymptotic_runs_terminate((img, part) in instance(), strict in any::<bool>()) {
        let cfg = cfg_for(strict, false);
        let out = run_from(&img, part, &cfg).unwrap();
        prop_assert!(!out.partition.has_empty_side());
    }
}

#[test]
fn seeded_instances_agree_with_oracles() {
    let mut r = rng(99);
    for _ in 0..200 {
        let (img, part) = random_instance(&mut r);
        let cfg = SegConfig::default();
        let fast = distance(&img, &part, &cfg).unwrap();
        assert!((fast - brute_distance(&img, &part, &cfg)).abs() < 1e-9);
    }
}
