use proptest::prelude::*;
use sobel_core::blocks::{magnitude, GradientPair, MagnitudeMode, Window3x3, SOBEL};
use sobel_core::image_io::{hamming_distance, read_bmp, write_bmp};
use sobel_core::metrics::{estimate_resources, Variant};
use sobel_core::oracle::sobel_frame_reference;
use sobel_core::sim::{gray_frame, run_sobel, sobel_pipeline, SimOptions};
use sobel_core::stream::{build_pipeline, Beat, PayloadWidth, RegisterStage, StallModel};
use sobel_core::{GrayImage, Rgb, RgbImage};

fn gray_image(max_w: usize, max_h: usize) -> impl Strategy<Value = GrayImage> {
    (3..=max_w, 3..=max_h).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h)
            .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

fn rgb_image(max_w: usize, max_h: usize) -> impl Strategy<Value = RgbImage> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<(u8, u8, u8)>(), w * h).prop_map(move |px| {
            let px = px.into_iter().map(|(r, g, b)| Rgb::new(r, g, b)).collect();
            RgbImage::new(w, h, px).unwrap()
        })
    })
}

fn mode() -> impl Strategy<Value = MagnitudeMode> {
    prop_oneof![Just(MagnitudeMode::Approx), Just(MagnitudeMode::Exact)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bmp_round_trip(img in rgb_image(17, 9)) {
        prop_assert_eq!(read_bmp(&write_bmp(&img)).unwrap(), img);
    }

    #[test]
    fn hamming_is_a_metric(
        (a, b, c) in (1..6usize, 1..6usize).prop_flat_map(|(w, h)| {
            let img = move || proptest::collection::vec(any::<(u8, u8, u8)>(), w * h)
                .prop_map(move |px| RgbImage::new(
                    w, h, px.into_iter().map(|(r, g, b)| Rgb::new(r, g, b)).collect()).unwrap());
            (img(), img(), img())
        })
    ) {
        let d = |x: &RgbImage, y: &RgbImage| hamming_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn both_cores_match_oracle(img in gray_image(12, 8), mode in mode()) {
        let opts = SimOptions { magnitude_mode: mode, ..SimOptions::default() };
        let expected = sobel_frame_reference(&img, mode).unwrap();
        for variant in Variant::ALL {
            let out = run_sobel(&img, variant, &opts).unwrap();
            prop_assert_eq!(&out.edges, &expected);
            prop_assert_eq!(out.run.stats.output_beats, (img.width() * img.height()) as u64);
            let n = (img.width() * img.height()) as u64;
            prop_assert!(out.run.stats.total_cycles <= n + img.width() as u64 + 16);
        }
    }

    #[test]
    fn backpressure_changes_timing_only(
        img in gray_image(10, 6),
        p in 0.0..0.9f64,
        seed in any::<u64>(),
    ) {
        for variant in Variant::ALL {
            let calm = run_sobel(&img, variant, &SimOptions::default()).unwrap();
            let opts = SimOptions {
                stalls: StallModel::random(p, seed).unwrap(),
                ..SimOptions::default()
            };
            let busy = run_sobel(&img, variant, &opts).unwrap();
            prop_assert_eq!(&busy.run.output, &calm.run.output);
            prop_assert!(busy.run.stats.total_cycles >= calm.run.stats.total_cycles);
        }
    }

    #[test]
    fn channels_conserve_beats(img in gray_image(9, 6), seed in any::<u64>()) {
        let opts = SimOptions {
            stalls: StallModel::random(0.4, seed).unwrap(),
            ..SimOptions::default()
        };
        let mut p = sobel_pipeline(Variant::Hls, img.width(), img.height(), &opts).unwrap();
        p.run_frame(&gray_frame(&img), &opts.stalls).unwrap();
        for ch in p.channel_stats() {
            prop_assert_eq!(ch.pushed, ch.popped + ch.resident);
            prop_assert!(ch.max_occupancy <= 2);
        }
    }

    #[test]
    fn approx_dominates_exact(gh in -1020..=1020i32, gv in -1020..=1020i32) {
        let g = GradientPair::new(gh, gv);
        prop_assert!(magnitude(g, MagnitudeMode::Exact) <= magnitude(g, MagnitudeMode::Approx));
    }

    #[test]
    fn window_transpose_swaps_gradient(cells in any::<[[u8; 3]; 3]>()) {
        let w = Window3x3::from_image_order(cells);
        let g = w.gradient(&SOBEL);
        let t = w.transpose().gradient(&SOBEL);
        prop_assert_eq!((t.gh, t.gv), (g.gv, g.gh));
        prop_assert!(g.gh.abs() <= GradientPair::BOUND && g.gv.abs() <= GradientPair::BOUND);
    }

    #[test]
    fn oracle_ignores_constant_offset(img in gray_image(8, 8), c in 0u8..64, mode in mode()) {
        let headroom = 255 - *img.pixels().iter().max().unwrap();
        let c = c.min(headroom);
        let shifted = GrayImage::new(
            img.width(), img.height(), img.pixels().iter().map(|&v| v + c).collect()).unwrap();
        prop_assert_eq!(
            sobel_frame_reference(&shifted, mode).unwrap(),
            sobel_frame_reference(&img, mode).unwrap()
        );
    }

    #[test]
    fn oracle_transpose_covariance(img in gray_image(8, 8), mode in mode()) {
        prop_assert_eq!(
            sobel_frame_reference(&img.transpose(), mode).unwrap(),
            sobel_frame_reference(&img, mode).unwrap().transpose()
        );
    }

    #[test]
    fn oracle_exact_below_approx(img in gray_image(8, 8)) {
        let a = sobel_frame_reference(&img, MagnitudeMode::Approx).unwrap();
        let e = sobel_frame_reference(&img, MagnitudeMode::Exact).unwrap();
        prop_assert!(e.pixels().iter().zip(a.pixels()).all(|(e, a)| e <= a));
    }

    #[test]
    fn stall_determinism(len in 1..40u32, p in 0.0..1.0f64, seed in any::<u64>()) {
        let mut pipe = build_pipeline(
            vec![Box::new(RegisterStage::identity(PayloadWidth::Bits32))], 2).unwrap();
        let frame = Beat::frame((0..len).map(|x| x.wrapping_mul(2_654_435_761)));
        let stalls = StallModel::random(p.min(0.95), seed).unwrap();
        let a = pipe.run_frame(&frame, &stalls).unwrap();
        let b = pipe.run_frame(&frame, &stalls).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.output, frame);
    }
}

#[test]
fn zero_probability_never_stalls() {
    let img = GrayImage::new(6, 5, (0..30).map(|i| i * 7).collect()).unwrap();
    let opts = SimOptions {
        stalls: StallModel::random(0.0, 99).unwrap(),
        ..SimOptions::default()
    };
    let run = run_sobel(&img, Variant::Hdl, &opts).unwrap();
    assert_eq!(run.run.stats.sink_stall_cycles, 0);
    assert_eq!(
        run.run.stats,
        run_sobel(&img, Variant::Hdl, &SimOptions::default())
            .unwrap()
            .run
            .stats
    );
}

#[test]
fn more_stalls_never_finish_sooner() {
    let img = GrayImage::new(16, 12, (0..192).map(|i| (i * 37 % 256) as u8).collect()).unwrap();
    for variant in Variant::ALL {
        let mut points: Vec<(u64, u64)> = (0..10)
            .map(|k| {
                let opts = SimOptions {
                    stalls: StallModel::random(k as f64 / 10.0, 1234).unwrap(),
                    ..SimOptions::default()
                };
                let s = run_sobel(&img, variant, &opts).unwrap().run.stats;
                (s.sink_stall_cycles, s.total_cycles)
            })
            .collect();
        points.sort();
        assert!(
            points.windows(2).all(|w| w[0].1 <= w[1].1),
            "{variant}: {points:?}"
        );
    }
}

#[test]
fn hls_has_more_line_buffers() {
    for w in [3, 64, 512, 1920] {
        let hdl = estimate_resources(Variant::Hdl, w, 4);
        let hls = estimate_resources(Variant::Hls, w, 6);
        assert!(hls.line_buffer_rams > hdl.line_buffer_rams);
        assert_eq!(hls.line_buffer_words, 3 * w as u64);
    }
}

#[test]
fn exhaustive_binary_5x4_and_4x5() {
    use sobel_core::sweep::{sweep_frames, SobelCore};
    for (w, h) in [(5, 4), (4, 5)] {
        let opts = SimOptions {
            line_buffer_depth: w,
            ..SimOptions::default()
        };
        let cores = Variant::ALL
            .iter()
            .map(|&v| SobelCore::new(v, w, h, &opts).unwrap())
            .collect();
        let n = sweep_frames(cores, w, h, &[0, 255], |frame, outs| {
            let want = sobel_frame_reference(frame, MagnitudeMode::Approx)?;
            for out in outs {
                assert_eq!(&out[..], want.pixels(), "{:?}", frame.pixels());
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 1 << 20);
    }
}

#[test]
fn hdl_fill_latency_on_8x8() {
    // Input starts on cycle 0; the window completes at input 2W+2 and the
    // result leaves four stages later, with at most two cycles of stream slack.
    let img = GrayImage::new(8, 8, (0..64).map(|i| (i * 5) as u8).collect()).unwrap();
    let mut p = sobel_pipeline(Variant::Hdl, 8, 8, &SimOptions::default()).unwrap();
    let run = p.run_frame(&gray_frame(&img), &StallModel::None).unwrap();
    assert!(run.stats.first_output_cycle <= 2 * 8 + 3 + 4 + 2);
}
