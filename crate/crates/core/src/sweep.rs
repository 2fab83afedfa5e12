//! Exhaustive sweeps over every frame whose pixels come from a small
//! alphabet.
//!
//! Enumerating `levels.len()^(w*h)` frames one by one spends almost all of its
//! time re-simulating shared prefixes. The sweep instead walks the frames as
//! a tree: each core is checkpointed after every accepted pixel and restored
//! before the next sibling is tried, so a prefix is ticked once no matter how
//! many frames extend it. Every frame is still driven cycle by cycle through
//! the unmodified core, drain included; only the redundant work is shared.
//! The output port is always ready, so this covers the stall-free schedule.

use crate::blocks::{SobelHdl, SobelHls};
use crate::error::{Error, Result};
use crate::image_io::GrayImage;
use crate::metrics::Variant;
use crate::sim::SimOptions;
use crate::stream::{Beat, PayloadWidth, ProcessingElement, Step, TraceEvent};

/// Either Sobel core behind one concrete, cloneable type.
pub enum SobelCore {
    Hdl(SobelHdl),
    Hls(SobelHls),
}

impl Clone for SobelCore {
    fn clone(&self) -> Self {
        match self {
            SobelCore::Hdl(c) => SobelCore::Hdl(c.clone()),
            SobelCore::Hls(c) => SobelCore::Hls(c.clone()),
        }
    }

    fn clone_from(&mut self, source: &Self) {
        match (self, source) {
            (SobelCore::Hdl(a), SobelCore::Hdl(b)) => a.clone_from(b),
            (SobelCore::Hls(a), SobelCore::Hls(b)) => a.clone_from(b),
            (this, source) => *this = source.clone(),
        }
    }
}

impl SobelCore {
    pub fn new(
        variant: Variant,
        width: usize,
        height: usize,
        options: &SimOptions,
    ) -> Result<Self> {
        let config = options.sobel_config(width, height);
        Ok(match variant {
            Variant::Hdl => SobelCore::Hdl(SobelHdl::new(config)?),
            Variant::Hls => SobelCore::Hls(SobelHls::with_depth(config, options.hls_depth)?),
        })
    }

    fn inner(&self) -> &dyn ProcessingElement {
        match self {
            SobelCore::Hdl(c) => c,
            SobelCore::Hls(c) => c,
        }
    }
}

impl ProcessingElement for SobelCore {
    fn name(&self) -> &str {
        self.inner().name()
    }

    fn input_width(&self) -> PayloadWidth {
        PayloadWidth::Bits8
    }

    fn output_width(&self) -> PayloadWidth {
        PayloadWidth::Bits8
    }

    fn reset(&mut self) {
        match self {
            SobelCore::Hdl(c) => c.reset(),
            SobelCore::Hls(c) => c.reset(),
        }
    }

    #[inline]
    fn tick(&mut self, cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step> {
        match self {
            SobelCore::Hdl(c) => c.tick(cycle, input, output_ready),
            SobelCore::Hls(c) => c.tick(cycle, input, output_ready),
        }
    }

    fn trace(&self) -> Option<&[TraceEvent]> {
        self.inner().trace()
    }
}

/// Checkpointed state of one core: the element itself, its cycle counter and
/// how many output beats it has produced.
#[derive(Clone)]
struct Checkpoint<P> {
    core: P,
    cycle: u64,
    emitted: usize,
}

impl<P: Clone> Checkpoint<P> {
    fn restore(&mut self, from: &Self) {
        self.core.clone_from(&from.core);
        self.cycle = from.cycle;
        self.emitted = from.emitted;
    }
}

struct Sweep<'a, P, F> {
    levels: &'a [u8],
    /// `stack[k][i]`: core `i` after accepting the first `k` pixels.
    stack: Vec<Vec<Checkpoint<P>>>,
    frame: GrayImage,
    outputs: Vec<Vec<u8>>,
    idle_limit: u64,
    visit: F,
    frames: u64,
}

impl<P, F> Sweep<'_, P, F>
where
    P: ProcessingElement + Clone,
    F: FnMut(&GrayImage, &[Vec<u8>]) -> Result<()>,
{
    fn record(&mut self, core: usize, at: usize, step: &Step) -> Result<()> {
        let Some(beat) = step.emitted else {
            return Ok(());
        };
        let len = self.outputs[0].len();
        if at >= len || beat.last != (at + 1 == len) {
            return Err(Error::InvalidFrame(format!(
                "core {core} emitted beat {at} (last = {}) for a {len}-pixel frame",
                beat.last
            )));
        }
        self.outputs[core][at] = beat.data as u8;
        Ok(())
    }

    /// Ticks core `i` of `stack[depth]` until it accepts `pixel`, which is
    /// pixel number `depth - 1`.
    fn feed(&mut self, depth: usize, core: usize, pixel: u8) -> Result<()> {
        let beat = Beat::new(u32::from(pixel), depth == self.outputs[0].len());
        let mut idle = 0;
        loop {
            let cp = &mut self.stack[depth][core];
            let step = cp.core.tick(cp.cycle, Some(beat), true)?;
            cp.cycle += 1;
            let at = cp.emitted;
            cp.emitted += usize::from(step.emitted.is_some());
            self.record(core, at, &step)?;
            if step.consumed {
                return Ok(());
            }
            idle += 1;
            if idle > self.idle_limit {
                return Err(Error::Deadlock {
                    cycle: self.stack[depth][core].cycle,
                    idle,
                });
            }
        }
    }

    /// Drains core `i` of `stack[depth]` with no further input.
    fn drain(&mut self, depth: usize, core: usize) -> Result<()> {
        let len = self.outputs[0].len();
        let mut idle = 0;
        while self.stack[depth][core].emitted < len {
            let cp = &mut self.stack[depth][core];
            let step = cp.core.tick(cp.cycle, None, true)?;
            cp.cycle += 1;
            let at = cp.emitted;
            cp.emitted += usize::from(step.emitted.is_some());
            self.record(core, at, &step)?;
            idle = if step.emitted.is_some() { 0 } else { idle + 1 };
            if idle > self.idle_limit {
                return Err(Error::Deadlock {
                    cycle: self.stack[depth][core].cycle,
                    idle,
                });
            }
        }
        Ok(())
    }

    fn descend(&mut self, depth: usize) -> Result<()> {
        let len = self.outputs[0].len();
        if depth == len {
            for core in 0..self.outputs.len() {
                self.drain(depth, core)?;
            }
            self.frames += 1;
            return (self.visit)(&self.frame, &self.outputs);
        }
        for li in 0..self.levels.len() {
            let pixel = self.levels[li];
            self.frame.pixels_mut()[depth] = pixel;
            let (done, rest) = self.stack.split_at_mut(depth + 1);
            for (next, cur) in rest[0].iter_mut().zip(&done[depth]) {
                next.restore(cur);
            }
            for core in 0..self.outputs.len() {
                self.feed(depth + 1, core, pixel)?;
            }
            self.descend(depth + 1)?;
        }
        Ok(())
    }
}

/// Runs every `width x height` frame over `levels` through each of `cores`
/// and hands the frame plus one output per core (same order as `cores`) to
/// `visit`. Returns the number of frames visited.
///
/// The cores must be freshly reset. Stops at the first error from a core or
/// from `visit`.
pub fn sweep_frames<P, F>(
    cores: Vec<P>,
    width: usize,
    height: usize,
    levels: &[u8],
    visit: F,
) -> Result<u64>
where
    P: ProcessingElement + Clone,
    F: FnMut(&GrayImage, &[Vec<u8>]) -> Result<()>,
{
    let len = width * height;
    if cores.is_empty() {
        return Err(Error::EmptyPipeline);
    }
    if levels.is_empty() || len == 0 {
        return Err(Error::InvalidConfig(
            "sweep needs a non-empty frame and alphabet".into(),
        ));
    }
    let root: Vec<_> = cores
        .into_iter()
        .map(|core| Checkpoint {
            core,
            cycle: 0,
            emitted: 0,
        })
        .collect();
    let mut sweep = Sweep {
        levels,
        outputs: vec![vec![0; len]; root.len()],
        stack: vec![root; len + 1],
        frame: GrayImage::new(width, height, vec![0; len])?,
        idle_limit: (10 * len as u64).max(256),
        visit,
        frames: 0,
    };
    sweep.descend(0)?;
    Ok(sweep.frames)
}
