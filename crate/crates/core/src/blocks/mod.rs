//! The processing elements of the edge-detection core: grayscale conversion,
//! the two Sobel filter architectures and the 8-to-32-bit packer.

mod kernel;
mod packer;
mod sobel_hdl;
mod sobel_hls;
mod window;

pub use kernel::{convolve3x3, magnitude, GradientPair, MagnitudeMode, SobelMasks, SOBEL};
pub use packer::{pack_bytes, u8_to_u32_pe, unpack_words, U8ToU32};
pub use sobel_hdl::{sobel_hdl_pe, SobelHdl, HDL_STAGES};
pub use sobel_hls::{sobel_hls_pe, SobelHls, DEFAULT_HLS_DEPTH};
pub use window::{LineBuffer, Window3x3, DEFAULT_LINE_BUFFER_DEPTH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{Beat, PayloadWidth, RegisterStage};

/// Arithmetic-mean grayscale of a packed `0xRRGGBB` word, truncating.
pub fn gray_of_word(rgb: u32) -> u32 {
    ((rgb >> 16 & 0xFF) + (rgb >> 8 & 0xFF) + (rgb & 0xFF)) / 3
}

/// 24-bit RGB in, 8-bit intensity out, one registered cycle of latency.
pub fn rgb2gray_pe() -> RegisterStage {
    RegisterStage::new(
        "rgb2gray",
        PayloadWidth::Bits24,
        PayloadWidth::Bits8,
        gray_of_word,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderPolicy {
    /// Output has the input's dimensions; pixels without a full neighbourhood are 0.
    #[default]
    Zero,
}

/// Geometry and options for one Sobel core, delivered out-of-band like a
/// register-mapped parameter port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SobelConfig {
    pub width: usize,
    pub height: usize,
    pub magnitude_mode: MagnitudeMode,
    pub border_policy: BorderPolicy,
    pub line_buffer_depth: usize,
    /// Record [`TraceEvent`](crate::stream::TraceEvent)s while running.
    pub trace: bool,
}

impl SobelConfig {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            magnitude_mode: MagnitudeMode::default(),
            border_policy: BorderPolicy::default(),
            line_buffer_depth: DEFAULT_LINE_BUFFER_DEPTH,
            trace: false,
        }
    }

    pub fn with_mode(mut self, mode: MagnitudeMode) -> Self {
        self.magnitude_mode = mode;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_line_buffer_depth(mut self, depth: usize) -> Self {
        self.line_buffer_depth = depth;
        self
    }

    pub fn frame_len(&self) -> usize {
        self.width * self.height
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 {
            return Err(Error::TooSmall {
                width: self.width,
                height: self.height,
            });
        }
        if self.width > self.line_buffer_depth {
            return Err(Error::WidthTooLarge {
                width: self.width,
                depth: self.line_buffer_depth,
            });
        }
        Ok(())
    }
}

/// A slot travelling down a Sobel pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    /// Input pixel number `index` (row-major) at `(row, col)`.
    Pixel {
        index: usize,
        row: usize,
        col: usize,
        value: u8,
    },
    /// Padding issued after the frame to drain the trailing border pixels.
    Flush { index: usize },
}

impl Slot {
    pub(crate) fn index(self) -> usize {
        match self {
            Slot::Pixel { index, .. } | Slot::Flush { index } => index,
        }
    }
}

/// Frame bookkeeping shared by both filter variants.
///
/// Output pixel `m` is produced by the slot whose window is centred on it,
/// i.e. slot `m + width + 1`. Slots past the end of the frame are flush
/// slots; their outputs are all border pixels.
#[derive(Debug, Clone)]
pub(crate) struct RasterCursor {
    width: usize,
    len: usize,
    accepted: usize,
    flushed: usize,
    row: usize,
    col: usize,
}

impl RasterCursor {
    pub(crate) fn new(config: &SobelConfig) -> Self {
        Self {
            width: config.width,
            len: config.frame_len(),
            accepted: 0,
            flushed: 0,
            row: 0,
            col: 0,
        }
    }

    pub(crate) fn reset(&mut self) {
        self.accepted = 0;
        self.flushed = 0;
        self.row = 0;
        self.col = 0;
    }

    /// Next slot to enter the pipeline, if any. `Ok(Some(_))` with a pixel
    /// slot means `input` was consumed.
    #[inline]
    pub(crate) fn advance(&mut self, input: Option<Beat>) -> Result<Option<Slot>> {
        if self.accepted < self.len {
            let Some(beat) = input else { return Ok(None) };
            let index = self.accepted;
            let is_tail = index + 1 == self.len;
            if beat.last != is_tail {
                return Err(Error::ConfigMismatch {
                    expected: self.len,
                    actual: if beat.last { index + 1 } else { self.len + 1 },
                });
            }
            let (row, col) = (self.row, self.col);
            self.accepted += 1;
            self.col += 1;
            if self.col == self.width {
                self.col = 0;
                self.row += 1;
            }
            return Ok(Some(Slot::Pixel {
                index,
                row,
                col,
                value: beat.data as u8,
            }));
        }
        if self.flushed <= self.width {
            let index = self.len + self.flushed;
            self.flushed += 1;
            return Ok(Some(Slot::Flush { index }));
        }
        Ok(None)
    }

    /// Output pixel produced by `slot`, if any.
    pub(crate) fn output_of(&self, slot: usize) -> Option<usize> {
        slot.checked_sub(self.width + 1)
    }

    pub(crate) fn is_last_output(&self, out_index: usize) -> bool {
        out_index + 1 == self.len
    }
}
