//! Three-line-buffer Sobel core modelled after a pipelined HLS loop.
//!
//! Every accepted pixel rotates its column of the line buffers upwards (the
//! top row is discarded, the new pixel lands in the lowest buffer), and the
//! rotated column is shifted into the window. The convolution is valid once
//! the two upper buffers hold complete rows and the lowest one holds at least
//! three pixels of the current row. The loop body is pipelined with an
//! initiation interval of one over a configurable number of stages.

use super::kernel::{magnitude, SobelMasks, SOBEL};
use super::window::{LineBuffer, Window3x3};
use super::{RasterCursor, Slot, SobelConfig};
use crate::error::{Error, Result};
use crate::stream::{Beat, PayloadWidth, ProcessingElement, Step, TraceEvent};

pub const DEFAULT_HLS_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy)]
struct InFlight {
    slot: usize,
    out_index: Option<usize>,
    /// Neighbourhood in image order; only set when the fill condition held.
    window: Option<[[u8; 3]; 3]>,
    value: u8,
}

pub struct SobelHls {
    config: SobelConfig,
    depth: usize,
    masks: SobelMasks,
    cursor: RasterCursor,
    /// `lines[0]` is the top (oldest) row.
    lines: [LineBuffer; 3],
    /// Image order; the newest column enters at index 2.
    window: [[u8; 3]; 3],
    upper_full: usize,
    lowest_count: usize,
    fill_seen: bool,
    /// Registers between loop-body stages, kept as a ring: `oldest` indexes
    /// the final register (the one that feeds the output) and the slot just
    /// before it in ring order holds the newest item.
    stages: Vec<Option<InFlight>>,
    oldest: usize,
    trace: Vec<TraceEvent>,
}

impl Clone for SobelHls {
    fn clone(&self) -> Self {
        Self {
            config: self.config,
            depth: self.depth,
            masks: self.masks,
            cursor: self.cursor.clone(),
            lines: self.lines.clone(),
            window: self.window,
            upper_full: self.upper_full,
            lowest_count: self.lowest_count,
            fill_seen: self.fill_seen,
            stages: self.stages.clone(),
            oldest: self.oldest,
            trace: self.trace.clone(),
        }
    }

    /// Reuses the line buffer and stage allocations.
    fn clone_from(&mut self, source: &Self) {
        self.config = source.config;
        self.depth = source.depth;
        self.masks = source.masks;
        self.cursor.clone_from(&source.cursor);
        for (line, src) in self.lines.iter_mut().zip(&source.lines) {
            line.clone_from(src);
        }
        self.window = source.window;
        self.upper_full = source.upper_full;
        self.lowest_count = source.lowest_count;
        self.fill_seen = source.fill_seen;
        self.stages.clone_from(&source.stages);
        self.oldest = source.oldest;
        self.trace.clone_from(&source.trace);
    }
}

pub fn sobel_hls_pe(config: SobelConfig) -> Result<SobelHls> {
    SobelHls::with_depth(config, DEFAULT_HLS_DEPTH)
}

impl SobelHls {
    pub fn new(config: SobelConfig) -> Result<Self> {
        Self::with_depth(config, DEFAULT_HLS_DEPTH)
    }

    /// `depth` counts every cycle from accepting a pixel to emitting its
    /// result; at least 3 (accept, compute, emit).
    pub fn with_depth(config: SobelConfig, depth: usize) -> Result<Self> {
        config.validate()?;
        if depth < 3 {
            return Err(Error::InvalidConfig(format!(
                "pipeline depth {depth} is below the minimum of 3"
            )));
        }
        let line = || LineBuffer::new(config.line_buffer_depth);
        Ok(Self {
            config,
            depth,
            masks: SOBEL,
            cursor: RasterCursor::new(&config),
            lines: [line(), line(), line()],
            window: [[0; 3]; 3],
            upper_full: 0,
            lowest_count: 0,
            fill_seen: false,
            stages: vec![None; depth - 1],
            oldest: 0,
            trace: Vec::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn config(&self) -> &SobelConfig {
        &self.config
    }

    fn record(&mut self, event: TraceEvent) {
        if self.config.trace {
            self.trace.push(event);
        }
    }

    /// First stage of the loop body: rotate, shift, test the fill condition.
    fn accept(&mut self, slot: Slot, cycle: u64) -> InFlight {
        let index = slot.index();
        let out_index = self.cursor.output_of(index);
        let Slot::Pixel { value, .. } = slot else {
            return InFlight {
                slot: index,
                out_index,
                window: None,
                value: 0,
            };
        };
        self.record(TraceEvent::Accept {
            cycle,
            input_index: index,
        });

        if self.lowest_count == self.config.width {
            self.upper_full = (self.upper_full + 1).min(2);
            self.lowest_count = 0;
        }
        let col = self.lowest_count;
        let moved_up = self.lines[1].read(col);
        self.lines[0].write(col, moved_up);
        let moved_up = self.lines[2].read(col);
        self.lines[1].write(col, moved_up);
        self.lines[2].write(col, value);
        self.lowest_count += 1;

        for (row, line) in self.window.iter_mut().zip(&self.lines) {
            row[0] = row[1];
            row[1] = row[2];
            row[2] = line.read(col);
        }

        let filled = self.upper_full == 2 && self.lowest_count >= 3;
        if filled {
            if !self.fill_seen {
                self.fill_seen = true;
                self.record(TraceEvent::FillSatisfied {
                    cycle,
                    input_count: index + 1,
                });
            }
            self.record(TraceEvent::WindowComplete {
                cycle,
                input_index: index,
            });
        }
        InFlight {
            slot: index,
            out_index,
            window: filled.then_some(self.window),
            value: 0,
        }
    }

    fn compute(&mut self, mut item: InFlight, cycle: u64) -> InFlight {
        if let (Some(window), Some(out_index)) = (item.window, item.out_index) {
            self.record(TraceEvent::Convolve {
                cycle,
                input_index: item.slot,
                out_index,
            });
            let gradient = Window3x3::from_image_order(window).gradient(&self.masks);
            item.value = magnitude(gradient, self.config.magnitude_mode);
        }
        item
    }
}

impl ProcessingElement for SobelHls {
    fn name(&self) -> &str {
        "sobel_hls"
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
        self.window = [[0; 3]; 3];
        self.upper_full = 0;
        self.lowest_count = 0;
        self.fill_seen = false;
        self.stages.fill(None);
        self.oldest = 0;
        self.trace.clear();
    }

    fn tick(&mut self, cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step> {
        let mut step = Step::IDLE;
        let occupied = self.stages.iter().any(Option::is_some);

        if let Some(InFlight {
            out_index: Some(out_index),
            value,
            ..
        }) = self.stages[self.oldest]
        {
            if !output_ready {
                return Ok(step);
            }
            step.emitted = Some(Beat::new(
                u32::from(value),
                self.cursor.is_last_output(out_index),
            ));
            self.record(TraceEvent::Emit { cycle, out_index });
        }

        // Advance every register by one stage: the vacated final register
        // becomes the entry register, and the item now reaching the final
        // register gets its convolution.
        let entry = self.oldest;
        self.oldest += 1;
        if self.oldest == self.stages.len() {
            self.oldest = 0;
        }
        if let Some(item) = self.stages[self.oldest] {
            self.stages[self.oldest] = Some(self.compute(item, cycle));
        }
        let slot = self.cursor.advance(input)?;
        step.consumed = matches!(slot, Some(Slot::Pixel { .. }));
        self.stages[entry] = slot.map(|s| self.accept(s, cycle));

        step.active = occupied || slot.is_some();
        Ok(step)
    }

    fn trace(&self) -> Option<&[TraceEvent]> {
        self.config.trace.then_some(self.trace.as_slice())
    }
}
