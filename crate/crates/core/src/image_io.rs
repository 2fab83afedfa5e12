//! Frame rasters, 24-bit BMP encoding and the bitwise image comparison used to
//! check that two filter outputs agree.

use crate::error::{Error, Result};

const FILE_HEADER_LEN: usize = 14;
const INFO_HEADER_LEN: usize = 40;
/// Offset of the pixel array in files produced by [`write_bmp`].
pub const BMP_HEADER_LEN: usize = FILE_HEADER_LEN + INFO_HEADER_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Self { r: v, g: v, b: v }
    }

    /// Packs the pixel into a 24-bit stream word, red in the high byte.
    pub const fn to_word(self) -> u32 {
        (self.r as u32) << 16 | (self.g as u32) << 8 | self.b as u32
    }

    pub const fn from_word(word: u32) -> Self {
        Self {
            r: (word >> 16) as u8,
            g: (word >> 8) as u8,
            b: word as u8,
        }
    }
}

/// Row-major, top-to-bottom RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        check_geometry(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: Rgb) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    /// Channel bytes in (r, g, b) order, row-major.
    pub fn channel_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.pixels.iter().flat_map(|p| [p.r, p.g, p.b])
    }
}

/// Row-major, top-to-bottom 8-bit intensity raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_geometry(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn transpose(&self) -> GrayImage {
        let mut out = Vec::with_capacity(self.pixels.len());
        for col in 0..self.width {
            for row in 0..self.height {
                out.push(self.pixel(row, col));
            }
        }
        GrayImage {
            width: self.height,
            height: self.width,
            pixels: out,
        }
    }
}

fn check_geometry(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be non-zero, got {width}x{height}"
        )));
    }
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::InvalidImage(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width.saturating_mul(height)
        ))),
    }
}

/// Bytes per stored BMP row for a 24-bpp image of `width` pixels.
pub fn bmp_row_stride(width: usize) -> usize {
    (3 * width).div_ceil(4) * 4
}

fn le_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn le_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes an uncompressed 24-bpp BMP.
///
/// Bottom-up (positive height) and top-down (negative height) files are both
/// accepted. Info headers larger than `BITMAPINFOHEADER` (V4/V5) are tolerated
/// as long as the pixel format itself is plain 24-bit `BI_RGB`.
pub fn read_bmp(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.len() < 2 || &bytes[..2] != b"BM" {
        return Err(Error::BadMagic);
    }
    if bytes.len() < BMP_HEADER_LEN {
        return Err(Error::Truncated {
            needed: BMP_HEADER_LEN,
            available: bytes.len(),
        });
    }
    let pixel_offset = le_u32(bytes, 10) as usize;
    let info_len = le_u32(bytes, 14) as usize;
    if info_len < INFO_HEADER_LEN {
        return Err(Error::UnsupportedFormat(format!(
            "info header of {info_len} bytes"
        )));
    }
    let raw_width = le_u32(bytes, 18) as i32;
    let raw_height = le_u32(bytes, 22) as i32;
    let bpp = le_u16(bytes, 28);
    let compression = le_u32(bytes, 30);
    if bpp != 24 {
        return Err(Error::UnsupportedFormat(format!("{bpp} bits per pixel")));
    }
    if compression != 0 {
        return Err(Error::UnsupportedFormat(format!(
            "compression method {compression}"
        )));
    }
    if raw_width <= 0 || raw_height == 0 || raw_height == i32::MIN {
        return Err(Error::UnsupportedFormat(format!(
            "dimensions {raw_width}x{raw_height}"
        )));
    }
    let width = raw_width as usize;
    let height = raw_height.unsigned_abs() as usize;
    let top_down = raw_height < 0;

    let stride = bmp_row_stride(width);
    let needed = stride
        .checked_mul(height)
        .and_then(|n| n.checked_add(pixel_offset))
        .ok_or_else(|| Error::UnsupportedFormat("pixel array size overflows".into()))?;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            available: bytes.len(),
        });
    }

    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        let stored_row = if top_down { row } else { height - 1 - row };
        let start = pixel_offset + stored_row * stride;
        pixels.extend(
            bytes[start..start + 3 * width]
                .chunks_exact(3)
                .map(|bgr| Rgb::new(bgr[2], bgr[1], bgr[0])),
        );
    }
    RgbImage::new(width, height, pixels)
}

/// Encodes a bottom-up 24-bpp `BI_RGB` BMP with a 54-byte header and no palette.
pub fn write_bmp(image: &RgbImage) -> Vec<u8> {
    let stride = bmp_row_stride(image.width);
    let pixel_bytes = stride * image.height;
    let file_len = BMP_HEADER_LEN + pixel_bytes;

    let mut out = Vec::with_capacity(file_len);
    out.extend_from_slice(b"BM");
    out.extend_from_slice(&(file_len as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(BMP_HEADER_LEN as u32).to_le_bytes());

    out.extend_from_slice(&(INFO_HEADER_LEN as u32).to_le_bytes());
    out.extend_from_slice(&(image.width as i32).to_le_bytes());
    out.extend_from_slice(&(image.height as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // planes
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes()); // BI_RGB
    out.extend_from_slice(&(pixel_bytes as u32).to_le_bytes());
    out.extend_from_slice(&2835u32.to_le_bytes()); // 72 dpi
    out.extend_from_slice(&2835u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes()); // palette colors
    out.extend_from_slice(&0u32.to_le_bytes()); // important colors

    let pad = stride - 3 * image.width;
    for row in image.pixels.chunks_exact(image.width).rev() {
        for p in row {
            out.extend_from_slice(&[p.b, p.g, p.r]);
        }
        out.extend(std::iter::repeat_n(0u8, pad));
    }
    debug_assert_eq!(out.len(), file_len);
    out
}

pub fn gray_to_rgb(gray: &GrayImage) -> RgbImage {
    RgbImage {
        width: gray.width,
        height: gray.height,
        pixels: gray.pixels.iter().map(|&v| Rgb::gray(v)).collect(),
    }
}

/// Number of differing bits between the channel bytes of two same-size images.
pub fn hamming_distance(a: &RgbImage, b: &RgbImage) -> Result<u64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch {
            left: (a.width, a.height),
            right: (b.width, b.height),
        });
    }
    Ok(a.channel_bytes()
        .zip(b.channel_bytes())
        .map(|(x, y)| u64::from((x ^ y).count_ones()))
        .sum())
}
