//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sobel_cli::{random_image, sibling};
use sobel_core::blocks::{magnitude, GradientPair, HDL_STAGES};
use sobel_core::image_io::{read_bmp, write_bmp};
use sobel_core::metrics::{estimate_resources, parse_report};
use sobel_core::oracle::sobel_frame_reference;
use sobel_core::sim::{gray_frame, run_edge_system, run_sobel, sobel_pipeline, SimOptions};
use sobel_core::stream::TraceEvent;
use sobel_core::sweep::{sweep_frames, SobelCore};
use sobel_core::{GrayImage, MagnitudeMode, Rgb, RgbImage, StallModel, Variant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn random_gray(width: usize, height: usize, rng: &mut ChaCha8Rng) -> GrayImage {
    GrayImage::new(
        width,
        height,
        (0..width * height).map(|_| rng.gen()).collect(),
    )
    .unwrap()
}

/// Both cores through the scheduler, compared with the frame oracle.
fn check_frame(img: &GrayImage, options: &SimOptions) -> Result<(), String> {
    let want = sobel_frame_reference(img, options.magnitude_mode).map_err(|e| e.to_string())?;
    for variant in Variant::ALL {
        let got = run_sobel(img, variant, options).map_err(|e| e.to_string())?;
        ensure!(
            got.edges == want,
            "{variant} differs from the oracle on {:?}",
            img.pixels()
        );
    }
    Ok(())
}

const ALPHABET: [u8; 3] = [0, 128, 255];

fn equivalence() -> Outcome {
    let start = Instant::now();

    // 3x3: every frame through the full scheduler.
    let options = SimOptions {
        line_buffer_depth: 3,
        ..SimOptions::default()
    };
    let mut small = 0;
    for code in 0..3u32.pow(9) {
        let mut x = code;
        let pixels = (0..9)
            .map(|_| {
                let v = ALPHABET[(x % 3) as usize];
                x /= 3;
                v
            })
            .collect();
        check_frame(&GrayImage::new(3, 3, pixels).unwrap(), &options)?;
        small += 1;
    }

    // 4x4: every frame, prefixes shared between frames; every 4099th frame
    // is also re-run through the scheduler.
    let options = SimOptions {
        line_buffer_depth: 4,
        ..SimOptions::default()
    };
    let cores = Variant::ALL
        .iter()
        .map(|&v| SobelCore::new(v, 4, 4, &options))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut mismatch = None;
    let mut visited = 0u64;
    let swept = sweep_frames(cores, 4, 4, &ALPHABET, |frame, outputs| {
        visited += 1;
        let want = sobel_frame_reference(frame, MagnitudeMode::Approx)?;
        if mismatch.is_none() && outputs.iter().any(|o| o[..] != want.pixels()[..]) {
            mismatch = Some(frame.pixels().to_vec());
        }
        if visited.is_multiple_of(4099) {
            if let Err(e) = check_frame(frame, &options) {
                mismatch.get_or_insert_with(|| e.into_bytes());
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    ensure!(mismatch.is_none(), "4x4 mismatch: {mismatch:?}");
    ensure!(swept == 3u64.pow(16), "swept {swept} 4x4 frames");

    // 16x16: seeded random frames.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let random = 100;
    for _ in 0..random {
        check_frame(&random_gray(16, 16, &mut rng), &SimOptions::default())?;
    }

    let elapsed = start.elapsed();
    ensure!(
        elapsed < Duration::from_secs(30),
        "all frames equal, but took {elapsed:.1?} (limit 30s)"
    );
    Ok(format!(
        "{small} 3x3 + {swept} 4x4 + {random} random 16x16 frames identical in {elapsed:.1?}"
    ))
}

fn full_image_compare() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("random512.bmp");
    let base = dir.path().join("edges.bmp");
    let img = random_image(512, 512, 2024).map_err(|e| e.to_string())?;
    fs::write(&input, write_bmp(&img)).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_sobel-sim"))
        .arg("compare")
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&base)
        .status()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    ensure!(status.code() == Some(0), "compare exited with {status}");
    let report =
        parse_report(&fs::read(sibling(&base, "report", "json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure!(
        report.hamming_bits == 0,
        "hamming_bits = {}",
        report.hamming_bits
    );
    ensure!(
        elapsed < Duration::from_secs(60),
        "took {elapsed:.1?} (limit 60s)"
    );
    Ok(format!("exit 0, hamming_bits 0 in {elapsed:.1?}"))
}

/// Frozen no-stall cycle counts: (width, height, variant, Sobel core alone,
/// full rgb2gray -> sobel -> packer system).
const GOLDEN_CYCLES: [(usize, usize, Variant, u64, u64); 6] = [
    (8, 8, Variant::Hdl, 77, 81),
    (8, 8, Variant::Hls, 79, 83),
    (64, 64, Variant::Hdl, 4165, 4169),
    (64, 64, Variant::Hls, 4167, 4171),
    (512, 512, Variant::Hdl, 262_661, 262_665),
    (512, 512, Variant::Hls, 262_663, 262_667),
];

fn throughput() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let options = SimOptions::default();
    for (w, h, variant, sobel_golden, system_golden) in GOLDEN_CYCLES {
        let bound = (w * h + w + 16) as u64;
        let gray = random_gray(w, h, &mut rng);
        let sobel = run_sobel(&gray, variant, &options)
            .map_err(|e| e.to_string())?
            .run
            .stats;
        let rgb = random_image(w, h, 17).map_err(|e| e.to_string())?;
        let system = run_edge_system(&rgb, variant, &options)
            .map_err(|e| e.to_string())?
            .run
            .stats;
        for (what, got, golden) in [
            ("core", sobel.total_cycles, sobel_golden),
            ("system", system.total_cycles, system_golden),
        ] {
            ensure!(
                got <= bound,
                "{variant} {w}x{h} {what}: {got} cycles > bound {bound}"
            );
            ensure!(
                got == golden,
                "{variant} {w}x{h} {what}: {got} cycles, golden {golden}"
            );
        }
    }
    Ok("all totals within W*H + W + 16 and equal to the golden counts".into())
}

fn traced(variant: Variant, width: usize, height: usize) -> Result<Vec<TraceEvent>, String> {
    let options = SimOptions {
        trace: true,
        ..SimOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let img = random_gray(width, height, &mut rng);
    let mut pipeline =
        sobel_pipeline(variant, width, height, &options).map_err(|e| e.to_string())?;
    pipeline
        .run_frame(&gray_frame(&img), &StallModel::None)
        .map_err(|e| e.to_string())?;
    Ok(pipeline.elements()[0]
        .trace()
        .ok_or("no trace recorded")?
        .to_vec())
}

/// Interior input indices and the first count at which the upper two rows
/// are complete with at least three pixels in the current row, found by
/// walking the raster pixel by pixel.
fn brute_force_fill(width: usize, height: usize) -> (Vec<usize>, usize) {
    let mut interior = Vec::new();
    let mut first_fill = None;
    let (mut row, mut col) = (0, 0);
    for count in 1..=width * height {
        if row >= 2 && col >= 2 {
            interior.push(count - 1);
        }
        let (full_rows_above, in_current) = (row, col + 1);
        if first_fill.is_none() && full_rows_above >= 2 && in_current >= 3 {
            first_fill = Some(count);
        }
        col += 1;
        if col == width {
            col = 0;
            row += 1;
        }
    }
    (interior, first_fill.unwrap_or(0))
}

/// Accept-to-emit cycle span (inclusive) of every convolved pixel.
fn stage_spans(trace: &[TraceEvent]) -> Vec<u64> {
    let accepted = |index: usize| {
        trace.iter().find_map(|e| match *e {
            TraceEvent::Accept { cycle, input_index } if input_index == index => Some(cycle),
            _ => None,
        })
    };
    let emitted = |out: usize| {
        trace.iter().find_map(|e| match *e {
            TraceEvent::Emit { cycle, out_index } if out_index == out => Some(cycle),
            _ => None,
        })
    };
    trace
        .iter()
        .filter_map(|e| match *e {
            TraceEvent::Convolve {
                input_index,
                out_index,
                ..
            } => Some(emitted(out_index)? - accepted(input_index)? + 1),
            _ => None,
        })
        .collect()
}

fn fill_latency() -> Outcome {
    let (w, h) = (8, 8);
    let (interior, first_fill) = brute_force_fill(w, h);
    ensure!(
        interior[0] == 2 * w + 2,
        "brute force: first window at {}",
        interior[0]
    );
    ensure!(first_fill == 2 * w + 3, "brute force: fill at {first_fill}");

    let hdl = traced(Variant::Hdl, w, h)?;
    let convolved: Vec<usize> = hdl
        .iter()
        .filter_map(|e| match *e {
            TraceEvent::Convolve { input_index, .. } => Some(input_index),
            _ => None,
        })
        .collect();
    ensure!(convolved == interior, "HDL convolved {convolved:?}");
    let spans = stage_spans(&hdl);
    ensure!(
        HDL_STAGES == 4 && spans.len() == interior.len() && spans.iter().all(|&s| s == 4),
        "HDL stage spans {spans:?}"
    );

    let hls = traced(Variant::Hls, w, h)?;
    let fills: Vec<usize> = hls
        .iter()
        .filter_map(|e| match *e {
            TraceEvent::FillSatisfied { input_count, .. } => Some(input_count),
            _ => None,
        })
        .collect();
    ensure!(fills == [first_fill], "HLS fill events {fills:?}");
    let windows: Vec<usize> = hls
        .iter()
        .filter_map(|e| match *e {
            TraceEvent::WindowComplete { input_index, .. } => Some(input_index),
            _ => None,
        })
        .collect();
    ensure!(windows == interior, "HLS windows {windows:?}");

    Ok(format!(
        "HDL first convolution at input {}, depth 4; HLS fill at count {first_fill}",
        convolved[0]
    ))
}

fn resources() -> Outcome {
    for width in [3, 8, 512, 1920] {
        let hdl = estimate_resources(Variant::Hdl, width, 6);
        let hls = estimate_resources(Variant::Hls, width, 6);
        ensure!(
            (
                hdl.line_buffer_rams,
                hdl.window_registers,
                hdl.pipeline_registers
            ) == (2, 9, 4),
            "hdl {hdl:?}"
        );
        ensure!(
            (hls.line_buffer_rams, hls.window_registers) == (3, 9),
            "hls {hls:?}"
        );
    }
    Ok("hdl {rams 2, window 9, stages 4}, hls {rams 3, window 9}".into())
}

fn backpressure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let gray = random_gray(64, 64, &mut rng);
    let rgb = random_image(64, 64, 64).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for variant in Variant::ALL {
        let base = SimOptions::default();
        let core_ref = run_sobel(&gray, variant, &base).map_err(|e| e.to_string())?;
        let sys_ref = run_edge_system(&rgb, variant, &base).map_err(|e| e.to_string())?;
        for p in [0.25, 0.5] {
            for seed in 1..=5 {
                let options = SimOptions {
                    stalls: StallModel::random(p, seed).map_err(|e| e.to_string())?,
                    ..base
                };
                let core = run_sobel(&gray, variant, &options).map_err(|e| e.to_string())?;
                ensure!(
                    core.run.output == core_ref.run.output,
                    "{variant} core output changed at p={p} seed={seed}"
                );
                ensure!(
                    core.run.stats.sink_stall_cycles > 0
                        && core.run.stats.total_cycles > core_ref.run.stats.total_cycles,
                    "{variant} core p={p} seed={seed}: stalls had no effect"
                );
                let sys = run_edge_system(&rgb, variant, &options).map_err(|e| e.to_string())?;
                ensure!(
                    sys.run.output == sys_ref.run.output,
                    "{variant} system output changed at p={p} seed={seed}"
                );
                runs += 2;
            }
        }
    }
    Ok(format!(
        "{runs} stalled runs byte-identical to the stall-free output"
    ))
}

fn bmp_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let width = i % 17 + 1;
        let height = rng.gen_range(1..=9);
        let pixels = (0..width * height)
            .map(|_| Rgb::new(rng.gen(), rng.gen(), rng.gen()))
            .collect();
        let img = RgbImage::new(width, height, pixels).unwrap();
        let back = read_bmp(&write_bmp(&img)).map_err(|e| e.to_string())?;
        ensure!(back == img, "{width}x{height} image did not survive");
    }
    Ok("100 images, widths 1-17".into())
}

fn magnitudes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let bound = GradientPair::BOUND;
    for _ in 0..100_000 {
        let g = GradientPair {
            gh: rng.gen_range(-bound..=bound),
            gv: rng.gen_range(-bound..=bound),
        };
        let (exact, approx) = (
            magnitude(g, MagnitudeMode::Exact),
            magnitude(g, MagnitudeMode::Approx),
        );
        ensure!(exact <= approx, "{g:?}: exact {exact} > approx {approx}");
    }
    let three_four = magnitude(GradientPair { gh: 3, gv: 4 }, MagnitudeMode::Exact);
    ensure!(three_four == 5, "(3,4) exact = {three_four}");
    for mode in [MagnitudeMode::Exact, MagnitudeMode::Approx] {
        let sat = magnitude(GradientPair { gh: 1020, gv: 0 }, mode);
        ensure!(sat == 255, "(1020,0) {mode} = {sat}");
    }
    Ok("exact <= approx on 1e5 pairs; (3,4) -> 5; (1020,0) -> 255".into())
}

fn not_reproducible() -> Outcome {
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = fs::read_to_string(&readme).map_err(|e| format!("{}: {e}", readme.display()))?;
    ensure!(
        text.contains("## What is not reproduced"),
        "README has no \"What is not reproduced\" section"
    );
    Ok("hardware timings, device utilisation and programming-cost figures documented as out of reach".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 core/oracle equivalence", equivalence),
        ("2 512x512 compare", full_image_compare),
        ("3 throughput bound", throughput),
        ("4 fill and latency", fill_latency),
        ("5 resource model", resources),
        ("6 backpressure invariance", backpressure),
        ("7 BMP round trip", bmp_round_trip),
        ("8 magnitude properties", magnitudes),
        ("9 non-reproducible items", not_reproducible),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
