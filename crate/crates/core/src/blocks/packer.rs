use crate::error::Result;
use crate::stream::{Beat, PayloadWidth, ProcessingElement, Step};

/// Packs four consecutive bytes into one little-endian word: the first byte
/// lands in bits 0..8. A short final group is zero-padded in its high bytes.
#[derive(Debug, Clone, Default)]
pub struct U8ToU32 {
    acc: u32,
    count: u32,
    held: Option<Beat>,
}

pub fn u8_to_u32_pe() -> U8ToU32 {
    U8ToU32::default()
}

impl ProcessingElement for U8ToU32 {
    fn name(&self) -> &str {
        "u8to32"
    }

    fn input_width(&self) -> PayloadWidth {
        PayloadWidth::Bits8
    }

    fn output_width(&self) -> PayloadWidth {
        PayloadWidth::Bits32
    }

    fn reset(&mut self) {
        *self = Self::default();
    }

    fn tick(&mut self, _cycle: u64, input: Option<Beat>, output_ready: bool) -> Result<Step> {
        let mut step = Step::IDLE;
        if let Some(word) = self.held {
            if !output_ready {
                return Ok(step);
            }
            step.emitted = Some(word);
            self.held = None;
        }
        if let Some(beat) = input {
            step.consumed = true;
            self.acc |= (beat.data & 0xFF) << (8 * self.count);
            self.count += 1;
            if self.count == 4 || beat.last {
                self.held = Some(Beat::new(self.acc, beat.last));
                self.acc = 0;
                self.count = 0;
            }
        }
        step.active = step.consumed || step.emitted.is_some();
        Ok(step)
    }
}

/// Frame-level reference for the packer.
pub fn pack_bytes(bytes: &[u8]) -> Vec<u32> {
    bytes
        .chunks(4)
        .map(|chunk| {
            let mut word = [0u8; 4];
            word[..chunk.len()].copy_from_slice(chunk);
            u32::from_le_bytes(word)
        })
        .collect()
}

/// Inverse of the packer: the first `byte_count` bytes carried by `words`.
pub fn unpack_words(words: &[Beat], byte_count: usize) -> Vec<u8> {
    words
        .iter()
        .flat_map(|w| w.data.to_le_bytes())
        .take(byte_count)
        .collect()
}
