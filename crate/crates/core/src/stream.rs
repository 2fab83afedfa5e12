//! Cycle-driven model of handshaked streams.
//!
//! A [`Pipeline`] is a linear chain `source -> PE -> ... -> PE -> sink` joined by
//! bounded FIFO [`Channel`]s. Every cycle has two-phase semantics: each element
//! decides what to consume and emit by looking only at the channel state
//! latched at the start of the cycle, and all pushes and pops take effect
//! together at the end of it. A beat pushed in cycle `c` is therefore
//! visible downstream no earlier than cycle `c + 1`, and the result never
//! depends on the order in which elements are visited.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default FIFO depth between elements (a two-entry skid buffer).
pub const DEFAULT_CHANNEL_CAPACITY: usize = 2;

/// Watchdog floor, so that tiny frames under heavy random backpressure do not
/// trip the deadlock detector on an ordinary run of stalled cycles.
const MIN_WATCHDOG_CYCLES: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PayloadWidth {
    Bits8,
    Bits24,
    Bits32,
}

impl PayloadWidth {
    pub const fn bits(self) -> u32 {
        match self {
            PayloadWidth::Bits8 => 8,
            PayloadWidth::Bits24 => 24,
            PayloadWidth::Bits32 => 32,
        }
    }

    pub const fn max_value(self) -> u32 {
        match self {
            PayloadWidth::Bits32 => u32::MAX,
            w => (1 << w.bits()) - 1,
        }
    }

    pub const fn fits(self, data: u32) -> bool {
        data <= self.max_value()
    }
}

/// One accepted transfer: payload plus end-of-frame marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Beat {
    pub data: u32,
    pub last: bool,
}

impl Beat {
    pub const fn new(data: u32, last: bool) -> Self {
        Self { data, last }
    }

    /// Wraps payload words into a frame, flagging only the final beat.
    pub fn frame<I>(words: I) -> Vec<Beat>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut beats: Vec<Beat> = words.into_iter().map(|w| Beat::new(w, false)).collect();
        if let Some(tail) = beats.last_mut() {
            tail.last = true;
        }
        beats
    }
}

/// Fixed-size circular store behind a [`Channel`].
#[derive(Debug, Clone)]
struct BeatRing {
    slots: Box<[Beat]>,
    head: usize,
    len: usize,
}

impl BeatRing {
    fn new(capacity: usize) -> Self {
        Self {
            slots: vec![Beat::default(); capacity].into_boxed_slice(),
            head: 0,
            len: 0,
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn front(&self) -> Option<Beat> {
        (self.len > 0).then(|| self.slots[self.head])
    }

    fn push_back(&mut self, beat: Beat) {
        let mut tail = self.head + self.len;
        if tail >= self.slots.len() {
            tail -= self.slots.len();
        }
        self.slots[tail] = beat;
        self.len += 1;
    }

    fn pop_front(&mut self) -> Option<Beat> {
        let beat = self.front()?;
        self.head += 1;
        if self.head == self.slots.len() {
            self.head = 0;
        }
        self.len -= 1;
        Some(beat)
    }

    fn clear(&mut self) {
        self.head = 0;
        self.len = 0;
    }
}

/// Bounded FIFO between two ports.
#[derive(Debug, Clone)]
pub struct Channel {
    width: PayloadWidth,
    capacity: usize,
    queue: BeatRing,
    stats: ChannelStats,
}

/// Per-channel traffic counters for the most recent frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub pushed: u64,
    pub popped: u64,
    pub resident: u64,
    pub max_occupancy: u64,
    /// Cycles in which a beat was valid at the head but not accepted.
    pub blocked_cycles: u64,
}

impl Channel {
    pub fn new(width: PayloadWidth, capacity: usize) -> Self {
        Self {
            width,
            capacity,
            queue: BeatRing::new(capacity),
            stats: ChannelStats::default(),
        }
    }

    pub fn width(&self) -> PayloadWidth {
        self.width
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// `valid` as seen by the consumer.
    pub fn head(&self) -> Option<Beat> {
        self.queue.front()
    }

    /// `ready` as seen by the producer.
    pub fn has_room(&self) -> bool {
        self.queue.len() < self.capacity
    }

    pub fn stats(&self) -> ChannelStats {
        ChannelStats {
            resident: self.queue.len() as u64,
            ..self.stats
        }
    }

    /// `ready` as latched at the start of the current cycle, given whether the
    /// consumer has already popped a beat in this cycle.
    fn had_room(&self, popped_this_cycle: bool) -> bool {
        self.queue.len() + usize::from(popped_this_cycle) < self.capacity
    }

    fn clear(&mut self) {
        self.queue.clear();
        self.stats = ChannelStats::default();
    }

    fn push(&mut self, beat: Beat) {
        debug_assert!(self.queue.len() < self.capacity);
        self.queue.push_back(beat);
        self.stats.pushed += 1;
        self.stats.max_occupancy = self.stats.max_occupancy.max(self.queue.len() as u64);
    }

    fn pop(&mut self) -> Option<Beat> {
        let beat = self.queue.pop_front();
        if beat.is_some() {
            self.stats.popped += 1;
        }
        beat
    }
}

/// Decision of one element for one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Step {
    /// Pop the head of the input channel.
    pub consumed: bool,
    /// Push this beat into the output channel.
    pub emitted: Option<Beat>,
    /// Internal state advanced even if no beat moved (e.g. a pipeline drained
    /// one stage). Used only for deadlock detection.
    pub active: bool,
}

impl Step {
    pub const IDLE: Step = Step {
        consumed: false,
        emitted: None,
        active: false,
    };
}

/// Observable micro-events recorded by elements that support tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// Input pixel `input_index` was accepted.
    Accept { cycle: u64, input_index: usize },
    /// The window now holds a full 3x3 neighbourhood ending at `input_index`.
    WindowComplete { cycle: u64, input_index: usize },
    /// The line-buffer fill condition held for the first time.
    FillSatisfied { cycle: u64, input_count: usize },
    /// An interior output pixel was convolved.
    Convolve {
        cycle: u64,
        input_index: usize,
        out_index: usize,
    },
    /// Output pixel `out_index` left the element.
    Emit { cycle: u64, out_index: usize },
}

/// A clocked stream processor.
///
/// `tick` sees the head of its input channel (`None` when not valid) and
/// whether its output channel can take a beat, both as latched at the start
/// of the cycle. It must not report `consumed` without an input beat, nor
/// emit when `output_ready` is false; the scheduler rejects either as a
/// [`Error::HandshakeViolation`].
pub trait ProcessingElement: Send {
    fn name(&self) -> &str;
    fn input_width(&self) -> PayloadWidth;
    fn output_width(&self) -> PayloadWidth;

    /// Returns the element to its power-on state before a new frame.
    fn reset(&mut self);

    fn tick(&mut self, cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step>;

    fn trace(&self) -> Option<&[TraceEvent]> {
        None
    }
}

/// Single register stage applying a combinational function to every beat.
/// One cycle of latency, one beat per cycle throughput.
pub struct RegisterStage {
    name: String,
    input_width: PayloadWidth,
    output_width: PayloadWidth,
    map: fn(u32) -> u32,
    held: Option<Beat>,
}

impl RegisterStage {
    pub fn new(
        name: impl Into<String>,
        input_width: PayloadWidth,
        output_width: PayloadWidth,
        map: fn(u32) -> u32,
    ) -> Self {
        Self {
            name: name.into(),
            input_width,
            output_width,
            map,
            held: None,
        }
    }

    pub fn identity(width: PayloadWidth) -> Self {
        Self::new("identity", width, width, |x| x)
    }
}

impl ProcessingElement for RegisterStage {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_width(&self) -> PayloadWidth {
        self.input_width
    }

    fn output_width(&self) -> PayloadWidth {
        self.output_width
    }

    fn reset(&mut self) {
        self.held = None;
    }

    fn tick(&mut self, _cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step> {
        let mut step = Step::IDLE;
        if let Some(beat) = self.held {
            if !output_ready {
                return Ok(step);
            }
            step.emitted = Some(beat);
            self.held = None;
        }
        if let Some(beat) = input {
            step.consumed = true;
            self.held = Some(Beat::new((self.map)(beat.data), beat.last));
        }
        step.active = step.consumed || step.emitted.is_some();
        Ok(step)
    }
}

/// Backpressure applied to the sink's `ready` signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StallModel {
    #[default]
    None,
    /// Each cycle the sink deasserts ready with the given probability.
    Random { probability: f64, seed: u64 },
}

impl StallModel {
    pub fn random(probability: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidConfig(format!(
                "stall probability {probability} outside [0, 1]"
            )));
        }
        Ok(StallModel::Random { probability, seed })
    }

    pub fn probability(&self) -> f64 {
        match *self {
            StallModel::None => 0.0,
            StallModel::Random { probability, .. } => probability,
        }
    }

    fn sampler(&self) -> Result<ReadySampler> {
        Ok(match *self {
            StallModel::None => ReadySampler(None),
            StallModel::Random { probability, seed } => {
                let stall = Bernoulli::new(probability)
                    .map_err(|e| Error::InvalidConfig(format!("stall probability: {e}")))?;
                ReadySampler(Some((ChaCha8Rng::seed_from_u64(seed), stall)))
            }
        })
    }
}

struct ReadySampler(Option<(ChaCha8Rng, Bernoulli)>);

impl ReadySampler {
    /// Draws exactly once per cycle so that the stall pattern depends only on
    /// the seed and cycle index, never on pipeline state.
    fn ready(&mut self) -> bool {
        match &mut self.0 {
            None => true,
            Some((rng, stall)) => !stall.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleStats {
    pub total_cycles: u64,
    /// Cycle in which the sink accepted its first beat.
    pub first_output_cycle: u64,
    pub output_beats: u64,
    /// Cycles in which the sink held ready low while a beat was waiting.
    pub sink_stall_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRun {
    pub output: Vec<Beat>,
    pub stats: CycleStats,
}

pub struct Pipeline {
    elements: Vec<Box<dyn ProcessingElement>>,
    channels: Vec<Channel>,
    watchdog: Option<u64>,
}

/// Connects `elements` into a linear pipeline with a frame source in front
/// and a collecting sink behind. Adjacent ports must agree on payload width.
pub fn build_pipeline(
    elements: Vec<Box<dyn ProcessingElement>>,
    channel_capacity: usize,
) -> Result<Pipeline> {
    let first = elements.first().ok_or(Error::EmptyPipeline)?;
    if channel_capacity == 0 {
        return Err(Error::InvalidConfig(
            "channel capacity must be at least 1".into(),
        ));
    }
    for pair in elements.windows(2) {
        let (up, down) = (&pair[0], &pair[1]);
        if up.output_width() != down.input_width() {
            return Err(Error::WidthMismatch {
                upstream: up.name().to_owned(),
                downstream: down.name().to_owned(),
                produced: up.output_width(),
                expected: down.input_width(),
            });
        }
    }
    let mut channels = Vec::with_capacity(elements.len() + 1);
    channels.push(Channel::new(first.input_width(), channel_capacity));
    channels.extend(
        elements
            .iter()
            .map(|e| Channel::new(e.output_width(), channel_capacity)),
    );
    Ok(Pipeline {
        elements,
        channels,
        watchdog: None,
    })
}

impl Pipeline {
    /// Overrides the number of consecutive no-progress cycles tolerated before
    /// a run is declared deadlocked.
    pub fn with_watchdog(mut self, cycles: u64) -> Self {
        self.watchdog = Some(cycles);
        self
    }

    pub fn input_width(&self) -> PayloadWidth {
        self.channels[0].width()
    }

    pub fn output_width(&self) -> PayloadWidth {
        self.channels[self.channels.len() - 1].width()
    }

    pub fn elements(&self) -> &[Box<dyn ProcessingElement>] {
        &self.elements
    }

    /// Channel counters from the last run, source side first.
    pub fn channel_stats(&self) -> Vec<ChannelStats> {
        self.channels.iter().map(Channel::stats).collect()
    }

    fn validate_frame(&self, frame: &[Beat]) -> Result<()> {
        let width = self.input_width();
        let (tail, body) = frame
            .split_last()
            .ok_or_else(|| Error::InvalidFrame("frame is empty".into()))?;
        if !tail.last {
            return Err(Error::InvalidFrame("final beat lacks the last flag".into()));
        }
        if let Some(i) = body.iter().position(|b| b.last) {
            return Err(Error::InvalidFrame(format!(
                "beat {i} carries the last flag before the end of the frame"
            )));
        }
        if let Some(i) = frame.iter().position(|b| !width.fits(b.data)) {
            return Err(Error::InvalidFrame(format!(
                "beat {i} payload {:#x} exceeds {} bits",
                frame[i].data,
                width.bits()
            )));
        }
        Ok(())
    }

    /// Streams one frame through the pipeline until the sink sees a beat with
    /// the last flag.
    pub fn run_frame(&mut self, frame: &[Beat], stalls: &StallModel) -> Result<FrameRun> {
        self.validate_frame(frame)?;
        let mut ready = stalls.sampler()?;
        let watchdog = self
            .watchdog
            .unwrap_or_else(|| (10 * frame.len() as u64).max(MIN_WATCHDOG_CYCLES));

        for element in &mut self.elements {
            element.reset();
        }
        for channel in &mut self.channels {
            channel.clear();
        }

        let n = self.elements.len();
        let mut output = Vec::with_capacity(frame.len());
        let mut stats = CycleStats::default();

        // The source presents its first beat out of reset.
        self.channels[0].push(frame[0]);
        let mut next_source = 1;

        let mut cycle: u64 = 0;
        let mut idle: u64 = 0;
        loop {
            // Visit the sink first and the source last. Each channel is then
            // popped by its consumer before its producer runs, so the producer
            // derives `ready` from the occupancy at the start of the cycle
            // (current length plus the beat just popped), and its head is
            // still the one latched at the start of the cycle. This is the same
            // result as evaluating everything first and committing afterwards.
            let mut progress = false;
            let mut done = false;

            let sink_ready = ready.ready();
            let tail = &mut self.channels[n];
            let mut popped_downstream = false;
            if let Some(beat) = tail.head() {
                if sink_ready {
                    tail.pop();
                    popped_downstream = true;
                    progress = true;
                    if output.is_empty() {
                        stats.first_output_cycle = cycle;
                    }
                    output.push(beat);
                    done = beat.last;
                } else {
                    tail.stats.blocked_cycles += 1;
                    stats.sink_stall_cycles += 1;
                }
            }

            for i in (0..n).rev() {
                let element = &mut self.elements[i];
                let (upstream, downstream) = self.channels.split_at_mut(i + 1);
                let (input_ch, output_ch) = (&mut upstream[i], &mut downstream[0]);
                let input = input_ch.head();
                let output_ready = output_ch.had_room(popped_downstream);
                let step = element.tick(cycle, input, output_ready)?;
                match (step.consumed, input) {
                    (true, None) => {
                        return Err(Error::HandshakeViolation {
                            element: element.name().to_owned(),
                            detail: format!("consumed from an empty channel in cycle {cycle}"),
                        })
                    }
                    (true, Some(_)) => {
                        input_ch.pop();
                    }
                    (false, Some(_)) => input_ch.stats.blocked_cycles += 1,
                    (false, None) => {}
                }
                if let Some(beat) = step.emitted {
                    if !output_ready {
                        return Err(Error::HandshakeViolation {
                            element: element.name().to_owned(),
                            detail: format!("emitted into a full channel in cycle {cycle}"),
                        });
                    }
                    if !element.output_width().fits(beat.data) {
                        return Err(Error::HandshakeViolation {
                            element: element.name().to_owned(),
                            detail: format!("payload {:#x} wider than its port", beat.data),
                        });
                    }
                    output_ch.push(beat);
                }
                progress |= step.active || step.consumed || step.emitted.is_some();
                popped_downstream = step.consumed;
            }

            if next_source < frame.len() && self.channels[0].had_room(popped_downstream) {
                self.channels[0].push(frame[next_source]);
                next_source += 1;
                progress = true;
            }

            if done {
                stats.total_cycles = cycle + 1;
                stats.output_beats = output.len() as u64;
                return Ok(FrameRun { output, stats });
            }

            idle = if progress { 0 } else { idle + 1 };
            if idle > watchdog {
                return Err(Error::Deadlock { cycle, idle });
            }
            cycle += 1;
        }
    }
}
