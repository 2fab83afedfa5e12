//! The complete edge-detection system: `rgb2gray -> sobel -> u8to32`, driven
//! from an image and unpacked back into an image.

use crate::blocks::{
    rgb2gray_pe, u8_to_u32_pe, unpack_words, MagnitudeMode, SobelConfig, SobelHdl, SobelHls,
    DEFAULT_HLS_DEPTH, DEFAULT_LINE_BUFFER_DEPTH,
};
use crate::error::Result;
use crate::image_io::{gray_to_rgb, GrayImage, RgbImage};
use crate::metrics::{
    build_report, estimate_resources, ComparisonReport, ConfigEcho, InputEcho, ReportConfig,
    Variant,
};
use crate::stream::{
    build_pipeline, Beat, FrameRun, Pipeline, ProcessingElement, StallModel,
    DEFAULT_CHANNEL_CAPACITY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub magnitude_mode: MagnitudeMode,
    pub line_buffer_depth: usize,
    pub hls_depth: usize,
    pub channel_capacity: usize,
    pub stalls: StallModel,
    pub trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            magnitude_mode: MagnitudeMode::default(),
            line_buffer_depth: DEFAULT_LINE_BUFFER_DEPTH,
            hls_depth: DEFAULT_HLS_DEPTH,
            channel_capacity: DEFAULT_CHANNEL_CAPACITY,
            stalls: StallModel::None,
            trace: false,
        }
    }
}

impl SimOptions {
    pub fn sobel_config(&self, width: usize, height: usize) -> SobelConfig {
        SobelConfig::new(width, height)
            .with_mode(self.magnitude_mode)
            .with_line_buffer_depth(self.line_buffer_depth)
            .with_trace(self.trace)
    }

    fn echo(&self, width: usize, height: usize) -> ReportConfig {
        ReportConfig {
            input: InputEcho {
                width,
                height,
                magnitude_mode: self.magnitude_mode,
            },
            config: ConfigEcho {
                stall_model: self.stalls,
                line_buffer_depth: self.line_buffer_depth,
                hls_pipeline_depth: self.hls_depth,
            },
        }
    }
}

pub fn sobel_element(
    variant: Variant,
    width: usize,
    height: usize,
    options: &SimOptions,
) -> Result<Box<dyn ProcessingElement>> {
    let config = options.sobel_config(width, height);
    Ok(match variant {
        Variant::Hdl => Box::new(SobelHdl::new(config)?),
        Variant::Hls => Box::new(SobelHls::with_depth(config, options.hls_depth)?),
    })
}

/// A pipeline holding only the Sobel core (8-bit in, 8-bit out).
pub fn sobel_pipeline(
    variant: Variant,
    width: usize,
    height: usize,
    options: &SimOptions,
) -> Result<Pipeline> {
    build_pipeline(
        vec![sobel_element(variant, width, height, options)?],
        options.channel_capacity,
    )
}

/// The full core: 24-bit RGB in, packed 32-bit words out.
pub fn edge_pipeline(
    variant: Variant,
    width: usize,
    height: usize,
    options: &SimOptions,
) -> Result<Pipeline> {
    build_pipeline(
        vec![
            Box::new(rgb2gray_pe()),
            sobel_element(variant, width, height, options)?,
            Box::new(u8_to_u32_pe()),
        ],
        options.channel_capacity,
    )
}

pub fn rgb_frame(img: &RgbImage) -> Vec<Beat> {
    Beat::frame(img.pixels().iter().map(|p| p.to_word()))
}

pub fn gray_frame(img: &GrayImage) -> Vec<Beat> {
    Beat::frame(img.pixels().iter().map(|&v| u32::from(v)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRun {
    pub edges: GrayImage,
    pub run: FrameRun,
}

/// Runs `img` through the full core and decodes the packed output.
pub fn run_edge_system(img: &RgbImage, variant: Variant, options: &SimOptions) -> Result<EdgeRun> {
    let (width, height) = (img.width(), img.height());
    let mut pipeline = edge_pipeline(variant, width, height, options)?;
    let run = pipeline.run_frame(&rgb_frame(img), &options.stalls)?;
    let bytes = unpack_words(&run.output, width * height);
    let edges = GrayImage::new(width, height, bytes)?;
    Ok(EdgeRun { edges, run })
}

/// Runs a grayscale frame through the Sobel core alone.
pub fn run_sobel(img: &GrayImage, variant: Variant, options: &SimOptions) -> Result<EdgeRun> {
    let mut pipeline = sobel_pipeline(variant, img.width(), img.height(), options)?;
    let run = pipeline.run_frame(&gray_frame(img), &options.stalls)?;
    let bytes = run.output.iter().map(|b| b.data as u8).collect();
    let edges = GrayImage::new(img.width(), img.height(), bytes)?;
    Ok(EdgeRun { edges, run })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub hdl: EdgeRun,
    pub hls: EdgeRun,
    pub report: ComparisonReport,
}

/// Runs both cores on the same image (concurrently) and builds the report.
pub fn compare(img: &RgbImage, options: &SimOptions) -> Result<Comparison> {
    let (hdl, hls) = std::thread::scope(|s| {
        let hls = s.spawn(|| run_edge_system(img, Variant::Hls, options));
        let hdl = run_edge_system(img, Variant::Hdl, options);
        (hdl, hls.join().expect("HLS simulation thread panicked"))
    });
    let (hdl, hls) = (hdl?, hls?);
    let (width, height) = (img.width(), img.height());
    let report = build_report(
        &hdl.run,
        &hls.run,
        (
            estimate_resources(Variant::Hdl, width, options.hls_depth),
            estimate_resources(Variant::Hls, width, options.hls_depth),
        ),
        (&gray_to_rgb(&hdl.edges), &gray_to_rgb(&hls.edges)),
        options.echo(width, height),
    )?;
    Ok(Comparison { hdl, hls, report })
}

pub fn report_config(options: &SimOptions, width: usize, height: usize) -> ReportConfig {
    options.echo(width, height)
}
