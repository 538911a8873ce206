//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line on
//! stderr (uncaptured, so it shows without `--nocapture`), and the test fails
//! if any criterion does.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use mdseg::bench::{bench_harness, bench_image, BenchOptions};
use mdseg::eval::argmin_offset;
use mdseg::io::{decode_image, encode_image, ImageFormat};
use mdseg::optimizer::{build_transfer_set, ZERO_TOLERANCE};
use mdseg::pipeline::{restore, sort_transform};
use mdseg::report::{Seeds, Timings};
use mdseg::synth::{add_noise, make_pseudo_qr, make_shape, NoiseSpec, ShapeKind, ShapeSpec};
use mdseg::{
    delta, dsc_masks, landscape_chain, run, segment, Backend, Exec, Image, Mask, Mode, Partition,
    PixelSet, RunReport, SegConfig, SegState, Side, TsetMode,
};
use rand::seq::SliceRandom;
use rand::Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn truth_mask(img: &Image, truth: &Partition) -> Mask {
    Mask::from_partition(img.width(), img.height(), truth).unwrap()
}

fn dice(img: &Image, truth: &Partition, cfg: &SegConfig, mode: Mode) -> f64 {
    let seg = segment(img, cfg, mode, Exec::Parallel).unwrap();
    dsc_masks(&seg.mask, &truth_mask(img, truth)).unwrap()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn noisy_circle(sigma: f64, seed: u64) -> (Image, Partition) {
    let (clean, truth) =
        make_shape(&ShapeSpec::default_for(ShapeKind::Circle, 200, 200, 0)).unwrap();
    (add_noise(&clean, NoiseSpec { sigma, seed }).unwrap(), truth)
}

fn noiseless_shapes() -> Outcome {
    let cfg = SegConfig {
        median_window: 1,
        ..SegConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [
        ShapeKind::Circle,
        ShapeKind::Square,
        ShapeKind::Triangle,
        ShapeKind::Star,
    ] {
        let (img, truth) = make_shape(&ShapeSpec::default_for(kind, 200, 200, 0)).unwrap();
        for mode in [Mode::Full, Mode::Patch] {
            let start = Instant::now();
            let d = dice(&img, &truth, &cfg, mode);
            let secs = start.elapsed().as_secs_f64();
            pass &= d == 1.0 && secs < 60.0;
            parts.push(format!("{kind}/{mode}={d} ({secs:.1}s)"));
        }
    }
    outcome(pass, parts.join(", "))
}

fn mild_noise() -> Outcome {
    let mut scores = Vec::new();
    for s in SEEDS {
        let (img, truth) = noisy_circle(0.1, s);
        let cfg = SegConfig {
            init_seed: s,
            median_window: 3,
            ..SegConfig::default()
        };
        scores.push(dice(&img, &truth, &cfg, Mode::Patch));
    }
    let pass = scores.iter().all(|&d| d >= 0.99);
    outcome(pass, format!("DSC per seed {scores:.4?}"))
}

fn landscape() -> Outcome {
    let start = Instant::now();
    let mut argmins = Vec::new();
    for s in SEEDS {
        let (img, truth) = noisy_circle(0.1, s);
        let chain = landscape_chain(&img, &truth, &SegConfig::default(), s, 50).unwrap();
        argmins.push(argmin_offset(&chain).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = argmins.iter().all(|&a| a == 0) && secs < 120.0;
    outcome(pass, format!("argmin offsets {argmins:?} ({secs:.1}s)"))
}

fn qr_noiseless() -> Outcome {
    let cfg = SegConfig::default();
    let mut patch = Vec::new();
    let mut together = Vec::new();
    for s in SEEDS {
        let (img, truth) = make_pseudo_qr(100, 100, 5000, s).unwrap();
        patch.push(dice(&img, &truth, &cfg, Mode::Patch));
        together.push(dice(&img, &truth, &cfg, Mode::Together));
    }
    let pass =
        patch.iter().all(|d| (0.50..=0.75).contains(d)) && together.iter().all(|&d| d >= 0.90);
    outcome(pass, format!("patch {patch:.4?}, together {together:.4?}"))
}

fn qr_noisy() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sigma, floor) in [(0.1, 0.88), (0.5, 0.73), (0.8, 0.63)] {
        let scores: Vec<f64> = SEEDS
            .iter()
            .map(|&s| {
                let (clean, truth) = make_pseudo_qr(100, 100, 5000, s).unwrap();
                let img = add_noise(&clean, NoiseSpec { sigma, seed: s }).unwrap();
                let cfg = SegConfig {
                    init_seed: s,
                    ..SegConfig::default()
                };
                dice(&img, &truth, &cfg, Mode::Together)
            })
            .collect();
        let m = median(scores);
        pass &= m >= floor;
        parts.push(format!("sigma {sigma}: median {m:.4} (floor {floor})"));
    }
    outcome(pass, parts.join(", "))
}

fn bench_table() -> Outcome {
    let img = bench_image(200, 0.5, 0).unwrap();
    let base = SegConfig::default();
    let counts = bench_harness(
        &img,
        &base,
        &BenchOptions {
            lengths: vec![4, 8, 16, 32, 36, 40, 44, 48],
            reps: 1,
            sample: Some(1),
            backends: vec![Backend::Indexed],
        },
    )
    .unwrap();
    let n: Vec<usize> = counts.iter().map(|r| r.n).collect();
    let n_ok = n == [9801, 9409, 8649, 7225, 6889, 6561, 6241, 5929];

    let naive = bench_harness(
        &img,
        &base,
        &BenchOptions {
            lengths: vec![32, 36, 40, 44, 48],
            reps: 1,
            sample: Some(128),
            backends: vec![Backend::Naive],
        },
    )
    .unwrap();
    let per_l4: Vec<f64> = naive.iter().map(|r| r.ratios()[3]).collect();
    let hi = per_l4.iter().copied().fold(f64::MIN, f64::max);
    let lo = per_l4.iter().copied().fold(f64::MAX, f64::min);
    let spread = hi / lo;
    outcome(
        n_ok && spread <= 2.0,
        format!(
            "N {n:?}; naive T1/L^4 {}, max/min {spread:.2}",
            sci(&per_l4)
        ),
    )
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let mut r = rng(7);
    let mut fails = [0usize; 4];
    for i in 0..1000u64 {
        let (img, part) = random_instance(&mut r);
        let cfg = SegConfig {
            init_seed: i,
            tset_mode: if i % 2 == 0 {
                TsetMode::SortedHeuristic
            } else {
                TsetMode::Strict
            },
            ..SegConfig::default()
        };

        let state = SegState::new(&img, part.clone(), &cfg).unwrap();
        for k in 0..img.len() {
            if let Ok(ng) = state.netgain_exact(k) {
                let mut moved = part.clone();
                moved.flip(k);
                let diff = mdseg::distance(&img, &moved, &cfg).unwrap()
                    - mdseg::distance(&img, &part, &cfg).unwrap();
                if (ng - diff).abs() > 1e-12 {
                    fails[0] += 1;
                }
            }
        }

        let slow = brute_distance(&img, &part, &cfg);
        if (mdseg::distance(&img, &part, &cfg).unwrap() - slow).abs()
            > 1e-9 * slow.abs().max(f64::MIN_POSITIVE)
        {
            fails[1] += 1;
        }

        let out = run(&img, &cfg).unwrap();
        let l_final = brute_distance(&img, &out.partition, &cfg);
        let band = ZERO_TOLERANCE * (1.0 + l_final.abs());
        let local_min = (0..img.len()).all(|k| {
            out.partition.count(out.partition.side(k)) == 1
                || brute_netgain(&img, &out.partition, k, &cfg) >= -band
        });
        if !local_min {
            fails[2] += 1;
        }

        if let (Some(l0), Some(l1)) = (out.initial_distance(), out.final_distance()) {
            let total: f64 = out.sweeps.iter().map(|s| s.netgain_sum).sum();
            if (total - (l1 - l0)).abs() > 1e-10 {
                fails[3] += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        fails == [0; 4] && secs < 60.0,
        format!("violations (a,b,c,d) = {fails:?} ({secs:.1}s)"),
    )
}

fn random_subset(r: &mut rand_chacha::ChaCha8Rng) -> PixelSet {
    (0..16).filter(|_| r.gen_bool(0.5)).collect()
}

fn metric_suite() -> Outcome {
    let mut r = rng(8);
    let mut fails = 0;
    for _ in 0..10_000 {
        let (a, b, c) = (
            random_subset(&mut r),
            random_subset(&mut r),
            random_subset(&mut r),
        );
        let ab = delta(&a, &b);
        let ok = delta(&a, &a) == 0
            && (ab == 0) == (a == b)
            && ab == delta(&b, &a)
            && delta(&a, &c) <= ab + delta(&b, &c)
            && a.len().abs_diff(b.len()) <= ab
            && ab <= a.len().max(b.len());
        if !ok {
            fails += 1;
        }
    }
    outcome(
        fails == 0,
        format!("{fails} of 10000 triples violate an axiom or bound"),
    )
}

fn lemma_checks() -> Outcome {
    let mut r = rng(9);
    let cfg = SegConfig {
        tset_mode: TsetMode::Strict,
        ..SegConfig::default()
    };
    let mut bad_returns = 0;
    let mut moved_total = 0;
    for _ in 0..1000 {
        let (img, part) = random_instance(&mut r);
        let mut state = SegState::new(&img, part, &cfg).unwrap();
        let t = build_transfer_set(&state, Side::One, &cfg);
        state.apply_transfer(&t.pixels).unwrap();
        let band = ZERO_TOLERANCE * (1.0 + state.distance().abs());
        for &p in &t.pixels {
            moved_total += 1;
            if state.netgain_exact(p).unwrap() < -band {
                bad_returns += 1;
            }
        }
    }

    let mut gaps = Vec::new();
    for n in [10usize, 100, 1000] {
        let mut g = Vec::new();
        for _ in 0..20 {
            let values: Vec<f64> = (0..n)
                .map(|_| if r.gen_bool(0.5) { 1.0 } else { 0.0 } + r.gen_range(-0.3..0.3))
                .collect();
            let mut labels: Vec<bool> = values.iter().map(|&v| v > 0.5).collect();
            labels[0] = true;
            labels[1] = false;
            let img = Image::new(n, 1, values).unwrap();
            let state = SegState::new(&img, Partition::from_bools(&labels), &cfg).unwrap();
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut r);
            for &k in ids.iter().take(10) {
                if let (Ok(e), Ok(a)) = (state.netgain_exact(k), state.netgain_asymptotic(k)) {
                    g.push((e - a).abs());
                }
            }
        }
        gaps.push(median(g));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(
        bad_returns == 0 && decreasing,
        format!("{bad_returns} of {moved_total} return netgains negative; median gap at n=10,100,1000: {}", sci(&gaps)),
    )
}

fn round_trips() -> Outcome {
    let mut r = rng(10);
    let values: Vec<f64> = (0..37 * 23)
        .map(|_| r.gen_range(-2.0..3.0) * 1e3f64.powi(r.gen_range(-3..3)))
        .collect();
    let img = Image::new(37, 23, values).unwrap();
    let bytes = encode_image(&img, ImageFormat::Float);
    let back = decode_image(&bytes, "x.f64".as_ref()).unwrap();
    let image_ok = back == img && encode_image(&back, ImageFormat::Float) == bytes;

    let (clean, truth) = make_shape(&ShapeSpec::default_for(ShapeKind::Star, 24, 24, 0)).unwrap();
    let noisy = add_noise(
        &clean,
        NoiseSpec {
            sigma: 0.3,
            seed: 1,
        },
    )
    .unwrap();
    let cfg = SegConfig::default();
    let out = run(&noisy, &cfg).unwrap();
    let mask = truth_mask(&noisy, &out.partition);
    let report = RunReport {
        mode: Mode::Full,
        config: cfg.clone(),
        width: 24,
        height: 24,
        sweeps: out.sweeps.clone(),
        final_distance: out.final_distance(),
        foreground_pixels: mask.count_ones(),
        dsc: Some(dsc_masks(&mask, &truth_mask(&noisy, &truth)).unwrap()),
        timings: Timings {
            read_seconds: 0.1 / 3.0,
            segment_seconds: 1.0 / 7.0,
            total_seconds: 0.1 / 3.0 + 1.0 / 7.0,
        },
        seeds: Seeds { init_seed: 0 },
    };
    let json = report.to_json().unwrap();
    let parsed = RunReport::from_json(&json).unwrap();
    let report_ok = parsed == report && parsed.to_json().unwrap() == json;

    let mut restore_fails = 0;
    for _ in 0..100 {
        let (w, h) = (r.gen_range(1..20), r.gen_range(1..20));
        let vals: Vec<f64> = (0..w * h)
            .map(|_| (r.gen_range(0..6) as f64) / 5.0)
            .collect();
        let img = Image::new(w, h, vals).unwrap();
        let bits: Vec<bool> = (0..w * h).map(|_| r.gen_bool(0.5)).collect();
        let mask = Mask::new(w, h, bits.clone()).unwrap();
        let (sorted, map) = sort_transform(&img);
        let ordered = sorted.values().windows(2).all(|v| v[0] <= v[1]);
        let moved = Mask::new(w, h, map.forward.iter().map(|&p| bits[p]).collect()).unwrap();
        if !ordered || restore(&moved, &map).unwrap() != mask {
            restore_fails += 1;
        }
    }
    outcome(
        image_ok && report_ok && restore_fails == 0,
        format!("float image {image_ok}, report {report_ok}, restore failures {restore_fails}/100"),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("noiseless shapes", noiseless_shapes),
        ("mild noise", mild_noise),
        ("landscape minimum", landscape),
        ("pseudo-QR noiseless", qr_noiseless),
        ("pseudo-QR noisy", qr_noisy),
        ("bench table", bench_table),
        ("oracle equivalence", oracle_suite),
        ("set metric", metric_suite),
        ("finite-sample checks", lemma_checks),
        ("round trips", round_trips),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        writeln!(
            std::io::stderr(),
            "[{verdict}] {:>2} {name}: {} [{:.1}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        )
        .unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
