//! Two-line-buffer Sobel core with a hand-built four-stage pipeline.
//!
//! Stage 1 accepts a pixel and reads both line buffers at its column.
//! Stage 2 shifts that column into the window registers and writes the pixel
//! back over the older of the two rows. Stage 3 convolves and takes the
//! magnitude. Stage 4 drives the result onto the output stream. Each stage is
//! one cycle and all four overlap, so the core accepts one pixel per cycle.
//! The pipeline stalls as a whole when stage 4 cannot hand off its beat.

use super::kernel::{magnitude, SobelMasks, SOBEL};
use super::window::{LineBuffer, Window3x3};
use super::{RasterCursor, Slot, SobelConfig};
use crate::error::Result;
use crate::stream::{Beat, PayloadWidth, ProcessingElement, Step, TraceEvent};

/// Accept, window, convolve, emit.
pub const HDL_STAGES: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Fetched {
    slot: Slot,
    /// Line buffer contents at this pixel's column: rows r-2 and r-1.
    upper: [u8; 2],
}

#[derive(Debug, Clone, Copy)]
struct Windowed {
    slot: usize,
    out_index: Option<usize>,
    /// Present only when the window is centred on an interior pixel.
    window: Option<Window3x3>,
}

#[derive(Debug, Clone, Copy)]
struct Computed {
    out_index: usize,
    value: u8,
}

pub struct SobelHdl {
    config: SobelConfig,
    masks: SobelMasks,
    cursor: RasterCursor,
    lines: [LineBuffer; 2],
    window: Window3x3,
    stage1: Option<Fetched>,
    stage2: Option<Windowed>,
    stage3: Option<Computed>,
    trace: Vec<TraceEvent>,
}

impl Clone for SobelHdl {
    fn clone(&self) -> Self {
        Self {
            config: self.config,
            masks: self.masks,
            cursor: self.cursor.clone(),
            lines: self.lines.clone(),
            window: self.window,
            stage1: self.stage1,
            stage2: self.stage2,
            stage3: self.stage3,
            trace: self.trace.clone(),
        }
    }

    /// Reuses the line buffer allocations; used to checkpoint the core.
    fn clone_from(&mut self, source: &Self) {
        self.config = source.config;
        self.masks = source.masks;
        self.cursor.clone_from(&source.cursor);
        for (line, src) in self.lines.iter_mut().zip(&source.lines) {
            line.clone_from(src);
        }
        self.window = source.window;
        self.stage1 = source.stage1;
        self.stage2 = source.stage2;
        self.stage3 = source.stage3;
        self.trace.clone_from(&source.trace);
    }
}

pub fn sobel_hdl_pe(config: SobelConfig) -> Result<SobelHdl> {
    SobelHdl::new(config)
}

impl SobelHdl {
    pub fn new(config: SobelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            masks: SOBEL,
            cursor: RasterCursor::new(&config),
            lines: [
                LineBuffer::new(config.line_buffer_depth),
                LineBuffer::new(config.line_buffer_depth),
            ],
            window: Window3x3::default(),
            stage1: None,
            stage2: None,
            stage3: None,
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &SobelConfig {
        &self.config
    }

    fn record(&mut self, event: TraceEvent) {
        if self.config.trace {
            self.trace.push(event);
        }
    }

    /// Row `r` is written into buffer `r % 2`, over row `r - 2`.
    fn fetch(&mut self, slot: Slot, cycle: u64) -> Fetched {
        let upper = match slot {
            Slot::Pixel {
                index, row, col, ..
            } => {
                self.record(TraceEvent::Accept {
                    cycle,
                    input_index: index,
                });
                [
                    self.lines[row % 2].read(col),
                    self.lines[(row + 1) % 2].read(col),
                ]
            }
            Slot::Flush { .. } => [0, 0],
        };
        Fetched { slot, upper }
    }

    fn shift_window(&mut self, fetched: Fetched, cycle: u64) -> Windowed {
        let slot = fetched.slot.index();
        let out_index = self.cursor.output_of(slot);
        let window = match fetched.slot {
            Slot::Pixel {
                index,
                row,
                col,
                value,
            } => {
                self.window
                    .shift_in([fetched.upper[0], fetched.upper[1], value]);
                self.lines[row % 2].write(col, value);
                let interior = row >= 2 && col >= 2;
                if interior {
                    self.record(TraceEvent::WindowComplete {
                        cycle,
                        input_index: index,
                    });
                }
                interior.then_some(self.window)
            }
            Slot::Flush { .. } => None,
        };
        Windowed {
            slot,
            out_index,
            window,
        }
    }

    fn convolve(&mut self, windowed: Windowed, cycle: u64) -> Option<Computed> {
        let out_index = windowed.out_index?;
        let value = match windowed.window {
            Some(window) => {
                self.record(TraceEvent::Convolve {
                    cycle,
                    input_index: windowed.slot,
                    out_index,
                });
                magnitude(window.gradient(&self.masks), self.config.magnitude_mode)
            }
            None => 0,
        };
        Some(Computed { out_index, value })
    }
}

impl ProcessingElement for SobelHdl {
    fn name(&self) -> &str {
        "sobel_hdl"
    }

    fn input_width(&self) -> PayloadWidth {
        PayloadWidth::Bits8
    }

    fn output_width(&self) -> PayloadWidth {
        PayloadWidth::Bits8
    }

    fn reset(&mut self) {
        self.cursor.reset();
        for line in &mut self.lines {
            line.clear();
        }
        self.window = Window3x3::default();
        self.stage1 = None;
        self.stage2 = None;
        self.stage3 = None;
        self.trace.clear();
    }

    fn tick(&mut self, cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step> {
        let mut step = Step::IDLE;
        let occupied = self.stage1.is_some() || self.stage2.is_some() || self.stage3.is_some();

        // Stage 4: hand off, or hold the whole pipeline.
        if let Some(result) = self.stage3 {
            if !output_ready {
                return Ok(step);
            }
            step.emitted = Some(Beat::new(
                u32::from(result.value),
                self.cursor.is_last_output(result.out_index),
            ));
            self.record(TraceEvent::Emit {
                cycle,
                out_index: result.out_index,
            });
        }

        // Later stages first so each reads what the previous cycle latched.
        self.stage3 = match self.stage2.take() {
            Some(w) => self.convolve(w, cycle),
            None => None,
        };
        self.stage2 = self.stage1.take().map(|f| self.shift_window(f, cycle));
        let slot = self.cursor.advance(input)?;
        step.consumed = matches!(slot, Some(Slot::Pixel { .. }));
        self.stage1 = slot.map(|s| self.fetch(s, cycle));

        step.active = occupied || slot.is_some();
        Ok(step)
    }

    fn trace(&self) -> Option<&[TraceEvent]> {
        self.config.trace.then_some(self.trace.as_slice())
    }
}
