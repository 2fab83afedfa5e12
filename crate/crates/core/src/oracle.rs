//! Frame-at-a-time golden model. Plain nested loops over whole images, with no
//! streaming, buffering or cycles; the streaming cores are checked against it.

use crate::blocks::{MagnitudeMode, SOBEL};
use crate::error::{Error, Result};
use crate::image_io::{GrayImage, RgbImage};

pub fn rgb2gray_frame_reference(img: &RgbImage) -> GrayImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|p| ((u16::from(p.r) + u16::from(p.g) + u16::from(p.b)) / 3) as u8)
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same geometry as a valid image")
}

/// Sobel edge magnitude for every pixel; pixels on the image border are 0.
pub fn sobel_frame_reference(img: &GrayImage, mode: MagnitudeMode) -> Result<GrayImage> {
    let (width, height) = (img.width(), img.height());
    if width < 3 || height < 3 {
        return Err(Error::TooSmall { width, height });
    }
    let mut out = vec![0u8; width * height];
    for row in 1..height - 1 {
        for col in 1..width - 1 {
            let mut gh = 0i64;
            let mut gv = 0i64;
            for di in 0..3 {
                for dj in 0..3 {
                    let px = i64::from(img.pixel(row + di - 1, col + dj - 1));
                    gh += i64::from(SOBEL.mh[di][dj]) * px;
                    gv += i64::from(SOBEL.mv[di][dj]) * px;
                }
            }
            let m = match mode {
                MagnitudeMode::Approx => (gh.abs() + gv.abs()) as f64,
                MagnitudeMode::Exact => ((gh * gh + gv * gv) as f64).sqrt().round(),
            };
            out[row * width + col] = m.min(255.0) as u8;
        }
    }
    GrayImage::new(width, height, out)
}
