//! Color-space conversions.
//!
//! Lab uses the sRGB companding curve and the D65 reference white.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{FloatRaster, Image};

// sRGB (linear) -> XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];
const WHITE_D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];
const EPSILON: f64 = 216.0 / 24_389.0;
const KAPPA: f64 = 24_389.0 / 27.0;

/// Working color space for algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Rgb,
    Lab,
    Gray,
}

impl std::str::FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Ok(ColorSpace::Rgb),
            "lab" => Ok(ColorSpace::Lab),
            "gray" | "grey" => Ok(ColorSpace::Gray),
            other => Err(Error::param("color_space", format!("unknown color space `{other}`"))),
        }
    }
}

impl std::fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ColorSpace::Rgb => "rgb",
            ColorSpace::Lab => "lab",
            ColorSpace::Gray => "gray",
        })
    }
}

#[inline]
fn srgb_to_linear(v: u8) -> f64 {
    let c = f64::from(v) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// Converts a single sRGB triple to CIE Lab.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut f = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        let xyz = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        f[i] = lab_f(xyz / WHITE_D65[i]);
    }
    [
        116.0 * f[1] - 16.0,
        500.0 * (f[0] - f[1]),
        200.0 * (f[1] - f[2]),
    ]
}

fn require_rgb(image: &Image) -> Result<()> {
    if image.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: image.channels(),
        });
    }
    Ok(())
}

/// Per-pixel sRGB -> Lab. L lies in [0, 100].
pub fn rgb_to_lab(image: &Image) -> Result<FloatRaster> {
    require_rgb(image)?;
    let data = image
        .data()
        .chunks_exact(3)
        .flat_map(|px| srgb_pixel_to_lab([px[0], px[1], px[2]]))
        .collect();
    FloatRaster::new(image.width(), image.height(), 3, data)
}

/// Luma with weights (0.299, 0.587, 0.114), rounded and clamped.
pub fn rgb_to_gray(image: &Image) -> Result<Image> {
    require_rgb(image)?;
    let data = image
        .data()
        .chunks_exact(3)
        .map(|px| {
            let y = 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::new(image.width(), image.height(), 1, data)
}

/// Working copy of `image` in `space`. Single-channel input is used as-is
/// for every space since it carries no chroma.
pub fn to_color_space(image: &Image, space: ColorSpace) -> Result<FloatRaster> {
    if image.channels() == 1 {
        return Ok(image.to_float());
    }
    match space {
        ColorSpace::Rgb => Ok(image.to_float()),
        ColorSpace::Lab => rgb_to_lab(image),
        ColorSpace::Gray => Ok(rgb_to_gray(image)?.to_float()),
    }
}
