//! Command-line front end: filter a BMP with one core, compare both cores on
//! the same image, or sweep sink backpressure on a seeded random frame.
//!
//! Exit codes: 0 success, 1 usage/parse/config error, 2 simulation deadlock,
//! 3 the two cores (or two stall levels) disagree.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sobel_core::blocks::{DEFAULT_HLS_DEPTH, DEFAULT_LINE_BUFFER_DEPTH};
use sobel_core::image_io::{gray_to_rgb, read_bmp, write_bmp};
use sobel_core::metrics::{
    estimate_resources, serialize_bench, serialize_process_report, serialize_report, BenchRow,
    ProcessReport, ReportFormat, VariantReport,
};
use sobel_core::sim::{compare, report_config, run_edge_system, SimOptions};
use sobel_core::{Error, MagnitudeMode, Rgb, RgbImage, StallModel, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

/// Stall probabilities swept by `bench`.
pub const BENCH_STALL_LEVELS: [f64; 3] = [0.0, 0.25, 0.5];

#[derive(Debug, Parser)]
#[command(
    name = "sobel-sim",
    version,
    about = "Cycle-level Sobel core simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a BMP image with one core.
    Process(ProcessArgs),
    /// Run both cores on the same BMP image and report the differences.
    Compare(CompareArgs),
    /// Sweep sink stall probabilities over a seeded random frame.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Gradient magnitude: approx (|gh| + |gv|) or exact (rounded sqrt).
    #[arg(long, default_value = "approx")]
    pub magnitude: MagnitudeMode,
    /// Cells per line buffer; the image width must not exceed it.
    #[arg(long, default_value_t = DEFAULT_LINE_BUFFER_DEPTH)]
    pub line_buffer_depth: usize,
    /// Pipeline depth of the HLS core, accept to emit.
    #[arg(long, default_value_t = DEFAULT_HLS_DEPTH)]
    pub hls_depth: usize,
}

impl SimArgs {
    fn options(&self, stalls: StallModel) -> SimOptions {
        SimOptions {
            magnitude_mode: self.magnitude,
            line_buffer_depth: self.line_buffer_depth,
            hls_depth: self.hls_depth,
            stalls,
            ..SimOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct StallArgs {
    /// Probability that the sink refuses a beat in any given cycle.
    #[arg(long, default_value_t = 0.0)]
    pub stall_prob: f64,
    /// Seed of the sink's ready pattern.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl StallArgs {
    fn model(&self) -> Result<StallModel> {
        stall_model(self.stall_prob, self.seed)
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Where to write the metrics report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, default_value = "json")]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    #[arg(long)]
    pub arch: Variant,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub stalls: StallArgs,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Accepted for symmetry with `process`; both cores always run.
    #[arg(long)]
    pub arch: Option<Variant>,
    #[arg(long)]
    pub input: PathBuf,
    /// Base path: writes `<stem>_hdl.bmp` and `<stem>_hls.bmp` next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub stalls: StallArgs,
    /// Report path; defaults to `<stem>_report.<format>`.
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Accepted for symmetry with `process`; both cores always run.
    #[arg(long)]
    pub arch: Option<Variant>,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    /// Seeds both the random frame and the sink's ready pattern.
    #[arg(long)]
    pub seed: u64,
    /// CSV destination.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
}

pub fn stall_model(probability: f64, seed: u64) -> Result<StallModel> {
    if probability == 0.0 {
        Ok(StallModel::None)
    } else {
        Ok(StallModel::random(probability, seed)?)
    }
}

/// A frame of uniformly random RGB pixels.
pub fn random_image(width: usize, height: usize, seed: u64) -> Result<RgbImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..width * height)
        .map(|_| Rgb::new(rng.gen(), rng.gen(), rng.gen()))
        .collect();
    Ok(RgbImage::new(width, height, pixels)?)
}

/// `dir/stem_suffix.ext` for the base path `dir/stem.whatever`.
pub fn sibling(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn format_ext(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Json => "json",
        ReportFormat::Csv => "csv",
    }
}

fn load(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_bmp(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn save(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn cmd_process(args: &ProcessArgs) -> Result<i32> {
    let img = load(&args.input)?;
    let options = args.sim.options(args.stalls.model()?);
    let out = run_edge_system(&img, args.arch, &options)?;
    save(&args.output, &write_bmp(&gray_to_rgb(&out.edges)))?;
    if let Some(path) = &args.report.report {
        let (width, height) = (img.width(), img.height());
        let echo = report_config(&options, width, height);
        let report = ProcessReport {
            input: echo.input,
            config: echo.config,
            variant: args.arch,
            run: VariantReport::new(
                &out.run.stats,
                estimate_resources(args.arch, width, options.hls_depth),
            ),
        };
        save(
            path,
            &serialize_process_report(&report, args.report.format)?,
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    let img = load(&args.input)?;
    let options = args.sim.options(args.stalls.model()?);
    let result = compare(&img, &options)?;
    save(
        &sibling(&args.output, "hdl", "bmp"),
        &write_bmp(&gray_to_rgb(&result.hdl.edges)),
    )?;
    save(
        &sibling(&args.output, "hls", "bmp"),
        &write_bmp(&gray_to_rgb(&result.hls.edges)),
    )?;
    let format = args.report.format;
    let report_path = args
        .report
        .report
        .clone()
        .unwrap_or_else(|| sibling(&args.output, "report", format_ext(format)));
    save(&report_path, &serialize_report(&result.report, format)?)?;

    let bits = result.report.hamming_bits;
    if bits != 0 {
        eprintln!("outputs differ: hamming distance {bits} bits");
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let img = random_image(args.width, args.height, args.seed)?;
    let mut rows = Vec::new();
    let mut reference = None;
    let mut mismatch = false;
    for variant in Variant::ALL {
        for p in BENCH_STALL_LEVELS {
            let options = args.sim.options(stall_model(p, args.seed)?);
            let out = run_edge_system(&img, variant, &options)?;
            match &reference {
                None => reference = Some(out.edges.clone()),
                Some(r) if *r != out.edges => {
                    eprintln!("{variant} output at stall probability {p:.2} differs");
                    mismatch = true;
                }
                Some(_) => {}
            }
            rows.push(BenchRow::new(
                variant,
                (args.width, args.height),
                p,
                args.seed,
                &out.run.stats,
            ));
        }
    }
    save(&args.output, &serialize_bench(&rows)?)?;
    Ok(if mismatch { EXIT_MISMATCH } else { EXIT_OK })
}

fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Deadlock { .. }) => EXIT_DEADLOCK,
        _ => EXIT_USAGE,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Process(args) => cmd_process(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
