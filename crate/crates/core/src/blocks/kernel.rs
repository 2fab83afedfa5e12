use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The pair of 3x3 gradient kernels, indexed `[row][col]` in image order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SobelMasks {
    pub mh: [[i32; 3]; 3],
    pub mv: [[i32; 3]; 3],
}

pub const SOBEL: SobelMasks = SobelMasks {
    mh: [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]],
    mv: [[-1, -2, -1], [0, 0, 0], [1, 2, 1]],
};

impl Default for SobelMasks {
    fn default() -> Self {
        SOBEL
    }
}

/// Horizontal and vertical derivative of one 3x3 neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GradientPair {
    pub gh: i32,
    pub gv: i32,
}

impl GradientPair {
    /// Largest |component| reachable from 8-bit pixels.
    pub const BOUND: i32 = 4 * 255;

    pub const fn new(gh: i32, gv: i32) -> Self {
        Self { gh, gv }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeMode {
    /// `|gh| + |gv|`
    #[default]
    Approx,
    /// `sqrt(gh^2 + gv^2)`, rounded half away from zero
    Exact,
}

impl fmt::Display for MagnitudeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MagnitudeMode::Approx => "approx",
            MagnitudeMode::Exact => "exact",
        })
    }
}

impl FromStr for MagnitudeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approx" => Ok(MagnitudeMode::Approx),
            "exact" => Ok(MagnitudeMode::Exact),
            other => Err(Error::InvalidConfig(format!(
                "unknown magnitude mode `{other}` (expected approx or exact)"
            ))),
        }
    }
}

/// Correlates a window (given in image order) with both masks.
#[inline]
pub fn convolve3x3(window: &[[u8; 3]; 3], masks: &SobelMasks) -> GradientPair {
    let mut g = GradientPair::default();
    for (row, (mh, mv)) in window.iter().zip(masks.mh.iter().zip(&masks.mv)) {
        for (&px, (&h, &v)) in row.iter().zip(mh.iter().zip(mv)) {
            g.gh += h * i32::from(px);
            g.gv += v * i32::from(px);
        }
    }
    g
}

/// Gradient magnitude saturated to 8 bits.
pub fn magnitude(g: GradientPair, mode: MagnitudeMode) -> u8 {
    let (h, v) = (g.gh.unsigned_abs(), g.gv.unsigned_abs());
    let m = match mode {
        MagnitudeMode::Approx => h + v,
        MagnitudeMode::Exact => rounded_sqrt(h * h + v * v),
    };
    m.min(255) as u8
}

/// `round(sqrt(n))` in integers: sqrt(n) >= k + 1/2 exactly when n > k^2 + k.
fn rounded_sqrt(n: u32) -> u32 {
    let k = n.isqrt();
    if n - k * k > k {
        k + 1
    } else {
        k
    }
}
