//! Cycle-level simulation of two streaming Sobel edge-detection cores: a
//! two-line-buffer design with a hand-built four-stage pipeline and a
//! three-line-buffer design shaped like a pipelined HLS loop.
//!
//! The crate provides the stream substrate ([`stream`]), the processing
//! elements ([`blocks`]), a frame-level golden model ([`oracle`]), BMP I/O and
//! bitwise image comparison ([`image_io`]), and the resource/timing report
//! ([`metrics`]). [`sim`] wires them into the complete system, and [`sweep`]
//! drives the cores over every frame of a small alphabet.

pub mod blocks;
pub mod error;
pub mod image_io;
pub mod metrics;
pub mod oracle;
pub mod sim;
pub mod stream;
pub mod sweep;

pub use blocks::{MagnitudeMode, SobelConfig};
pub use error::{Error, Result};
pub use image_io::{GrayImage, Rgb, RgbImage};
pub use metrics::{ComparisonReport, ResourceEstimate, Variant};
pub use stream::{Beat, CycleStats, FrameRun, Pipeline, StallModel};
