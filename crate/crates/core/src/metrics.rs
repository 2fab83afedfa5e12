//! Architecture-level resource model and the HDL-vs-HLS comparison report.
//!
//! JSON layout (keys in this order):
//!
//! ```text
//! { "input":  { "width", "height", "magnitude_mode" },
//!   "config": { "stall_model", "line_buffer_depth", "hls_pipeline_depth" },
//!   "hdl":    { "total_cycles", "first_output_cycle", "output_beats", "stall_cycles",
//!               "resources": { "line_buffer_rams", "line_buffer_words",
//!                              "window_registers", "pipeline_registers" } },
//!   "hls":    { ...same as hdl... },
//!   "hamming_bits", "cycle_ratio" }
//! ```
//!
//! CSV layout: the header
//! `variant,total_cycles,first_output_cycle,stall_cycles,rams,ram_words,window_regs,stage_regs`
//! followed by one row per variant. The summary fields live in JSON only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::blocks::{MagnitudeMode, HDL_STAGES};
use crate::error::{Error, Result};
use crate::image_io::{hamming_distance, RgbImage};
use crate::stream::{CycleStats, FrameRun, StallModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hdl,
    Hls,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Hdl, Variant::Hls];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Hdl => "hdl",
            Variant::Hls => "hls",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hdl" => Ok(Variant::Hdl),
            "hls" => Ok(Variant::Hls),
            other => Err(Error::InvalidConfig(format!(
                "unknown architecture `{other}` (expected hdl or hls)"
            ))),
        }
    }
}

/// Storage and register counts in architecture units (row RAMs, 8-bit window
/// registers, pipeline stage registers), not device primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub line_buffer_rams: u32,
    /// Bytes of row storage actually used: `line_buffer_rams * width`.
    pub line_buffer_words: u64,
    pub window_registers: u32,
    pub pipeline_registers: u32,
}

/// Resource count for one core at a given image width. The HDL core's stage
/// count is fixed, so `pipeline_depth` only affects the HLS core.
pub fn estimate_resources(
    variant: Variant,
    width: usize,
    pipeline_depth: usize,
) -> ResourceEstimate {
    let (rams, stages) = match variant {
        Variant::Hdl => (2, HDL_STAGES as u32),
        Variant::Hls => (3, pipeline_depth as u32),
    };
    ResourceEstimate {
        line_buffer_rams: rams,
        line_buffer_words: u64::from(rams) * width as u64,
        window_registers: 9,
        pipeline_registers: stages,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    pub width: usize,
    pub height: usize,
    pub magnitude_mode: MagnitudeMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub stall_model: StallModel,
    pub line_buffer_depth: usize,
    pub hls_pipeline_depth: usize,
}

/// Everything about a run that the report echoes back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    pub input: InputEcho,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantReport {
    pub total_cycles: u64,
    pub first_output_cycle: u64,
    pub output_beats: u64,
    pub stall_cycles: u64,
    pub resources: ResourceEstimate,
}

impl VariantReport {
    pub fn new(stats: &CycleStats, resources: ResourceEstimate) -> Self {
        Self {
            total_cycles: stats.total_cycles,
            first_output_cycle: stats.first_output_cycle,
            output_beats: stats.output_beats,
            stall_cycles: stats.sink_stall_cycles,
            resources,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub input: InputEcho,
    pub config: ConfigEcho,
    pub hdl: VariantReport,
    pub hls: VariantReport,
    pub hamming_bits: u64,
    /// `hls.total_cycles / hdl.total_cycles`, rounded to 4 decimals.
    #[serde(serialize_with = "four_decimals")]
    pub cycle_ratio: f64,
}

/// Single-architecture report written by `process`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub input: InputEcho,
    pub config: ConfigEcho,
    pub variant: Variant,
    pub run: VariantReport,
}

fn four_decimals<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{value:.4}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(serializer)
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Assembles the comparison of both cores run on the same frame. `images`
/// are the decoded outputs of (hdl, hls).
pub fn build_report(
    hdl_run: &FrameRun,
    hls_run: &FrameRun,
    resources: (ResourceEstimate, ResourceEstimate),
    images: (&RgbImage, &RgbImage),
    config: ReportConfig,
) -> Result<ComparisonReport> {
    let hamming_bits = hamming_distance(images.0, images.1)?;
    let hdl = VariantReport::new(&hdl_run.stats, resources.0);
    let hls = VariantReport::new(&hls_run.stats, resources.1);
    if hdl.total_cycles == 0 {
        return Err(Error::InvalidConfig("HDL run reports zero cycles".into()));
    }
    Ok(ComparisonReport {
        input: config.input,
        config: config.config,
        hdl,
        hls,
        hamming_bits,
        cycle_ratio: round4(hls.total_cycles as f64 / hdl.total_cycles as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format `{other}` (expected json or csv)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    variant: &'static str,
    total_cycles: u64,
    first_output_cycle: u64,
    stall_cycles: u64,
    rams: u32,
    ram_words: u64,
    window_regs: u32,
    stage_regs: u32,
}

impl CsvRow {
    fn new(variant: Variant, r: &VariantReport) -> Self {
        Self {
            variant: variant.as_str(),
            total_cycles: r.total_cycles,
            first_output_cycle: r.first_output_cycle,
            stall_cycles: r.stall_cycles,
            rams: r.resources.line_buffer_rams,
            ram_words: r.resources.line_buffer_words,
            window_regs: r.resources.window_registers,
            stage_regs: r.resources.pipeline_registers,
        }
    }
}

fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Serialize(e.to_string()))
}

fn write_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn serialize_report(report: &ComparisonReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => write_json(report),
        ReportFormat::Csv => write_csv([
            CsvRow::new(Variant::Hdl, &report.hdl),
            CsvRow::new(Variant::Hls, &report.hls),
        ]),
    }
}

pub fn serialize_process_report(report: &ProcessReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => write_json(report),
        ReportFormat::Csv => write_csv([CsvRow::new(report.variant, &report.run)]),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<ComparisonReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// One line of a backpressure sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub variant: Variant,
    pub width: usize,
    pub height: usize,
    /// Formatted with two decimals.
    pub stall_prob: String,
    pub seed: u64,
    pub total_cycles: u64,
    pub first_output_cycle: u64,
    pub output_beats: u64,
    pub stall_cycles: u64,
}

impl BenchRow {
    pub fn new(
        variant: Variant,
        (width, height): (usize, usize),
        stall_prob: f64,
        seed: u64,
        stats: &CycleStats,
    ) -> Self {
        Self {
            variant,
            width,
            height,
            stall_prob: format!("{stall_prob:.2}"),
            seed,
            total_cycles: stats.total_cycles,
            first_output_cycle: stats.first_output_cycle,
            output_beats: stats.output_beats,
            stall_cycles: stats.sink_stall_cycles,
        }
    }
}

pub fn serialize_bench(rows: &[BenchRow]) -> Result<Vec<u8>> {
    write_csv(rows)
}
