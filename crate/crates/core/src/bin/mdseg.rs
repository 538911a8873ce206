use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mdseg::bench::{bench_harness, bench_image, BenchOptions};
use mdseg::eval::landscape_chain;
use mdseg::report::{write_bench_csv, RunReport, Seeds, Timings};
use mdseg::synth::{add_noise, make_shape, NoiseSpec, ShapeKind, ShapeSpec};
use mdseg::{
    distance, dsc_masks, read_image, read_mask, segment, write_image, write_mask, Backend, Exec,
    InitMode, Mask, Mode, NetgainMode, SegConfig, TsetMode,
};

#[derive(Parser)]
#[command(
    name = "mdseg",
    version,
    about = "Minimum-distance two-region image segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic image and its ground truth.
    Synth(SynthArgs),
    /// Segment an image.
    Segment(SegmentArgs),
    /// Sample the distance along a chain through the true partition.
    Landscape(LandscapeArgs),
    /// Time patch-wise segmentation across patch lengths.
    Bench(BenchArgs),
    /// Print the Dice coefficient of two masks.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Circle,
    Square,
    Triangle,
    Star,
    Qr,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Patch,
    Together,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetgainArg {
    Exact,
    Asymptotic,
}

#[derive(Clone, Copy, ValueEnum)]
enum TsetArg {
    Strict,
    Sorted,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Threshold,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Naive,
    Indexed,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "patch")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    p1: f64,
    #[arg(long, default_value_t = 0.0)]
    p2: f64,
    #[arg(long)]
    patch_len: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    vote_threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    netgain: NetgainArg,
    #[arg(long, value_enum, default_value = "sorted")]
    tset: TsetArg,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    median_window: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 50)]
    step: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    p1: f64,
    #[arg(long, default_value_t = 0.0)]
    p2: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,36,40,44,48")]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 200)]
    size: usize,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time only this many evenly spaced windows per length.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "naive,indexed"
    )]
    modes: Vec<BackendArg>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("bad dimension `{v}` in `{s}`"))
    };
    Ok((parse(w)?, parse(h)?))
}

fn synth(args: SynthArgs) -> Result<()> {
    let (w, h) = args.size;
    let kind = match args.kind {
        KindArg::Circle => ShapeKind::Circle,
        KindArg::Square => ShapeKind::Square,
        KindArg::Triangle => ShapeKind::Triangle,
        KindArg::Star => ShapeKind::Star,
        KindArg::Qr => ShapeKind::PseudoQr,
    };
    let (clean, truth) = make_shape(&ShapeSpec::default_for(kind, w, h, args.seed))?;
    let noisy = add_noise(
        &clean,
        NoiseSpec {
            sigma: args.sigma,
            seed: args.seed,
        },
    )?;
    write_image(&args.out, &noisy)?;
    if let Some(path) = &args.truth {
        write_mask(path, &Mask::from_partition(w, h, &truth)?)?;
    }
    Ok(())
}

fn segment_cmd(args: SegmentArgs) -> Result<()> {
    let mode = match args.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Patch => Mode::Patch,
        ModeArg::Together => Mode::Together,
    };
    if mode == Mode::Full {
        for (given, flag) in [
            (args.patch_len.is_some(), "--patch-len"),
            (args.stride.is_some(), "--stride"),
            (args.vote_threshold.is_some(), "--vote-threshold"),
        ] {
            if given {
                return Err(mdseg::Error::InvalidConfig(format!(
                    "{flag} has no effect with --mode full"
                ))
                .into());
            }
        }
    }
    let defaults = SegConfig::default();
    let cfg = SegConfig {
        p1: args.p1,
        p2: args.p2,
        netgain_mode: match args.netgain {
            NetgainArg::Exact => NetgainMode::Exact,
            NetgainArg::Asymptotic => NetgainMode::Asymptotic,
        },
        tset_mode: match args.tset {
            TsetArg::Strict => TsetMode::Strict,
            TsetArg::Sorted => TsetMode::SortedHeuristic,
        },
        init: match args.init {
            InitArg::Random => InitMode::RandomBalanced,
            InitArg::Threshold => InitMode::Threshold,
        },
        init_seed: args.seed,
        max_sweeps: args.max_sweeps.unwrap_or(defaults.max_sweeps),
        patch_len: args.patch_len.unwrap_or(defaults.patch_len),
        stride: args.stride.unwrap_or(defaults.stride),
        vote_threshold: args.vote_threshold.unwrap_or(defaults.vote_threshold),
        median_window: args.median_window.unwrap_or(defaults.median_window),
        backend: Backend::Indexed,
    };
    cfg.validate()?;

    let start = Instant::now();
    let img = read_image(&args.input)?;
    let truth = args.truth.as_ref().map(read_mask).transpose()?;
    if let Some(t) = &truth {
        if (t.width(), t.height()) != (img.width(), img.height()) {
            bail!(mdseg::Error::InvalidImage(format!(
                "truth is {}x{} but the image is {}x{}",
                t.width(),
                t.height(),
                img.width(),
                img.height()
            )));
        }
    }
    let read_seconds = start.elapsed().as_secs_f64();

    let seg_start = Instant::now();
    let result = segment(&img, &cfg, mode, Exec::Parallel)?;
    let segment_seconds = seg_start.elapsed().as_secs_f64();
    write_mask(&args.out, &result.mask)?;

    if let Some(path) = &args.report {
        let part = result.mask.to_partition();
        let final_distance = if part.has_empty_side() {
            None
        } else {
            Some(distance(&img, &part, &cfg)?)
        };
        let dsc = match &truth {
            Some(t) => Some(dsc_masks(&result.mask, t)?),
            None => None,
        };
        let report = RunReport {
            mode,
            config: cfg.clone(),
            width: img.width(),
            height: img.height(),
            sweeps: result.sweeps,
            final_distance,
            foreground_pixels: result.mask.count_ones(),
            dsc,
            timings: Timings {
                read_seconds,
                segment_seconds,
                total_seconds: start.elapsed().as_secs_f64(),
            },
            seeds: Seeds {
                init_seed: cfg.init_seed,
            },
        };
        report.write(path)?;
    }
    Ok(())
}

fn landscape(args: LandscapeArgs) -> Result<()> {
    let img = read_image(&args.input)?;
    let truth = read_mask(&args.truth)?;
    if (truth.width(), truth.height()) != (img.width(), img.height()) {
        bail!(mdseg::Error::InvalidImage(
            "truth and image sizes differ".into()
        ));
    }
    let cfg = SegConfig {
        p1: args.p1,
        p2: args.p2,
        ..SegConfig::default()
    };
    cfg.validate()?;
    let points = landscape_chain(&img, &truth.to_partition(), &cfg, args.seed, args.step)?;
    let mut w = csv::Writer::from_path(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    w.write_record(["offset", "l_value"])?;
    for p in points {
        w.write_record([p.offset.to_string(), format!("{:?}", p.l_value)])?;
    }
    w.flush()?;
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let img = bench_image(args.size, args.sigma, args.seed)?;
    let opts = BenchOptions {
        lengths: args.lengths,
        reps: args.reps,
        sample: args.sample,
        backends: args
            .modes
            .iter()
            .map(|m| match m {
                BackendArg::Naive => Backend::Naive,
                BackendArg::Indexed => Backend::Indexed,
            })
            .collect(),
    };
    let records = bench_harness(&img, &SegConfig::default(), &opts)?;
    let file =
        File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    write_bench_csv(BufWriter::new(file), &records)?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let pred = read_mask(&args.pred)?;
    let truth = read_mask(&args.truth)?;
    println!("{:?}", dsc_masks(&pred, &truth)?);
    Ok(())
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<mdseg::Error>())
        .map(|e| e.kind())
        .unwrap_or("runtime")
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(if kind == "usage" { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail("usage", e.to_string().trim()),
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Segment(a) => segment_cmd(a),
        Command::Landscape(a) => landscape(a),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // library errors already print their source
        Err(e) if e.is::<mdseg::Error>() => fail(error_kind(&e), &e.to_string()),
        Err(e) => fail(error_kind(&e), &format!("{e:#}")),
    }
}
