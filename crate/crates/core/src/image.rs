//! Core image types.
//!
//! Pixel values are stored as normalized `f64`. Display-referred (sRGB)
//! images live in [0, 1]; linear and raw Bayer data may extend up to an HDR
//! ceiling derived from the container bit depth. Quantization only ever
//! happens at file boundaries.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Which of the four 2x2 arrangements the mosaic starts with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BayerPhase {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

/// Color of a single mosaic photosite. The two greens are distinguished by
/// which row they share: `Gr` sits in a red row, `Gb` in a blue row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CfaColor {
    R,
    Gr,
    Gb,
    B,
}

impl CfaColor {
    /// RGB channel index (greens collapse onto channel 1).
    #[inline]
    pub fn rgb_channel(self) -> usize {
        match self {
            CfaColor::R => 0,
            CfaColor::Gr | CfaColor::Gb => 1,
            CfaColor::B => 2,
        }
    }

    /// Fixed packing order R, Gr, Gb, B.
    #[inline]
    pub fn plane_index(self) -> usize {
        match self {
            CfaColor::R => 0,
            CfaColor::Gr => 1,
            CfaColor::Gb => 2,
            CfaColor::B => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CfaColor::R => "R",
            CfaColor::Gr => "Gr",
            CfaColor::Gb => "Gb",
            CfaColor::B => "B",
        }
    }
}

impl BayerPhase {
    pub const ALL: [BayerPhase; 4] = [
        BayerPhase::Rggb,
        BayerPhase::Bggr,
        BayerPhase::Grbg,
        BayerPhase::Gbrg,
    ];

    /// The 2x2 quad layout as [top-left, top-right, bottom-left, bottom-right].
    #[inline]
    pub fn quad(self) -> [CfaColor; 4] {
        use CfaColor::*;
        match self {
            BayerPhase::Rggb => [R, Gr, Gb, B],
            BayerPhase::Bggr => [B, Gb, Gr, R],
            BayerPhase::Grbg => [Gr, R, B, Gb],
            BayerPhase::Gbrg => [Gb, B, R, Gr],
        }
    }

    /// Photosite color at pixel coordinates (x, y).
    #[inline]
    pub fn color_at(self, x: usize, y: usize) -> CfaColor {
        self.quad()[(y & 1) * 2 + (x & 1)]
    }

    #[inline]
    pub fn is_green(self, x: usize, y: usize) -> bool {
        matches!(self.color_at(x, y), CfaColor::Gr | CfaColor::Gb)
    }
}

impl fmt::Display for BayerPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BayerPhase::Rggb => "RGGB",
            BayerPhase::Bggr => "BGGR",
            BayerPhase::Grbg => "GRBG",
            BayerPhase::Gbrg => "GBRG",
        };
        f.write_str(s)
    }
}

impl FromStr for BayerPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RGGB" => Ok(BayerPhase::Rggb),
            "BGGR" => Ok(BayerPhase::Bggr),
            "GRBG" => Ok(BayerPhase::Grbg),
            "GBRG" => Ok(BayerPhase::Gbrg),
            other => Err(Error::InvalidImage(format!(
                "unknown Bayer phase {other:?}"
            ))),
        }
    }
}

/// Sensor/file metadata carried alongside a raw frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageMeta {
    /// Pedestal present in the stored values, normalized, in [0, 1).
    pub black_level: f64,
    /// Container bit depth, 8..=20. Depths above 16 encode HDR headroom; see
    /// [`ImageMeta::hdr_ceiling`].
    pub bit_depth: u32,
    pub sensor_id: String,
    /// Exposure ratio of this frame relative to the base exposure (>= 1).
    /// For merged HDR frames this records the largest ratio in the stack.
    pub exposure_ratio: f64,
    pub rng_seed: u64,
}

impl Default for ImageMeta {
    fn default() -> Self {
        Self {
            black_level: 0.0,
            bit_depth: 16,
            sensor_id: "unknown".to_string(),
            exposure_ratio: 1.0,
            rng_seed: 0,
        }
    }
}

impl ImageMeta {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.black_level) {
            return Err(Error::InvalidImage(format!(
                "black_level {} outside [0, 1)",
                self.black_level
            )));
        }
        if !(8..=20).contains(&self.bit_depth) {
            return Err(Error::InvalidImage(format!(
                "bit_depth {} outside 8..=20",
                self.bit_depth
            )));
        }
        if !self.exposure_ratio.is_finite() || self.exposure_ratio < 1.0 {
            return Err(Error::InvalidImage(format!(
                "exposure_ratio {} < 1",
                self.exposure_ratio
            )));
        }
        Ok(())
    }

    /// Largest representable normalized value for this bit depth.
    ///
    /// Depths up to 16 address [0, 1]; each bit beyond 16 doubles the
    /// ceiling, so the default 20-bit merged HDR container spans [0, 16].
    pub fn hdr_ceiling(&self) -> f64 {
        if self.bit_depth > 16 {
            (1u64 << (self.bit_depth - 16)) as f64
        } else {
            1.0
        }
    }
}

/// Single-plane mosaic frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BayerImage {
    width: usize,
    height: usize,
    phase: BayerPhase,
    data: Vec<f64>,
    pub meta: ImageMeta,
}

impl BayerImage {
    pub fn new(
        width: usize,
        height: usize,
        phase: BayerPhase,
        data: Vec<f64>,
        meta: ImageMeta,
    ) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::InvalidImage(format!(
                "Bayer dimensions must be even and nonzero, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "data length {} != {width}x{height}",
                data.len()
            )));
        }
        meta.validate()?;
        let ceiling = meta.hdr_ceiling();
        for &v in &data {
            if !v.is_finite() || v < 0.0 || v > ceiling {
                return Err(Error::InvalidImage(format!(
                    "pixel value {v} outside [0, {ceiling}]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            phase,
            data,
            meta,
        })
    }

    /// Constant-valued frame, mostly for tests and synthetic inputs.
    pub fn constant(
        width: usize,
        height: usize,
        phase: BayerPhase,
        value: f64,
        meta: ImageMeta,
    ) -> Result<Self> {
        Self::new(width, height, phase, vec![value; width * height], meta)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn phase(&self) -> BayerPhase {
        self.phase
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn color_at(&self, x: usize, y: usize) -> CfaColor {
        self.phase.color_at(x, y)
    }

    pub fn hdr_ceiling(&self) -> f64 {
        self.meta.hdr_ceiling()
    }

    /// Rebuild with the same geometry and new samples. `meta` is inherited.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.width, self.height, self.phase, data, self.meta.clone())
    }
}

/// Display or linear 3-plane image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RgbEncoding {
    Linear,
    Srgb,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    encoding: RgbEncoding,
    planes: [Vec<f64>; 3],
}

impl RgbImage {
    pub fn new(
        width: usize,
        height: usize,
        encoding: RgbEncoding,
        planes: [Vec<f64>; 3],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("empty RGB image".into()));
        }
        for plane in &planes {
            if plane.len() != width * height {
                return Err(Error::InvalidImage(format!(
                    "plane length {} != {width}x{height}",
                    plane.len()
                )));
            }
            for &v in plane {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidImage(format!("pixel value {v} invalid")));
                }
                if encoding == RgbEncoding::Srgb && v > 1.0 {
                    return Err(Error::InvalidImage(format!(
                        "sRGB pixel value {v} exceeds 1"
                    )));
                }
            }
        }
        Ok(Self {
            width,
            height,
            encoding,
            planes,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn encoding(&self) -> RgbEncoding {
        self.encoding
    }

    #[inline]
    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.planes[c][y * self.width + x]
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = y * self.width + x;
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }

    pub fn with_planes(&self, encoding: RgbEncoding, planes: [Vec<f64>; 3]) -> Result<Self> {
        Self::new(self.width, self.height, encoding, planes)
    }

    /// Peak signal-to-noise ratio against a reference of equal geometry,
    /// with peak = 1.0.
    pub fn psnr(&self, reference: &RgbImage) -> f64 {
        assert_eq!(self.width, reference.width);
        assert_eq!(self.height, reference.height);
        let mut se = 0.0;
        let n = (self.width * self.height * 3) as f64;
        for c in 0..3 {
            for (a, b) in self.planes[c].iter().zip(&reference.planes[c]) {
                let d = a - b;
                se += d * d;
            }
        }
        let mse = se / n;
        if mse == 0.0 {
            f64::INFINITY
        } else {
            -10.0 * mse.log10()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_quads() {
        use CfaColor::*;
        assert_eq!(BayerPhase::Rggb.color_at(0, 0), R);
        assert_eq!(BayerPhase::Rggb.color_at(1, 0), Gr);
        assert_eq!(BayerPhase::Rggb.color_at(0, 1), Gb);
        assert_eq!(BayerPhase::Rggb.color_at(1, 1), B);
        assert_eq!(BayerPhase::Bggr.color_at(0, 0), B);
        assert_eq!(BayerPhase::Bggr.color_at(1, 1), R);
        assert_eq!(BayerPhase::Grbg.color_at(1, 0), R);
        assert_eq!(BayerPhase::Gbrg.color_at(0, 1), R);
        // Pattern repeats with period 2.
        assert_eq!(BayerPhase::Rggb.color_at(4, 6), R);
    }

    #[test]
    fn every_phase_has_one_of_each_color_per_quad() {
        for phase in BayerPhase::ALL {
            let mut seen = [false; 4];
            for c in phase.quad() {
                seen[c.plane_index()] = true;
            }
            assert_eq!(seen, [true; 4], "{phase}");
        }
    }

    #[test]
    fn odd_dimensions_rejected() {
        let meta = ImageMeta::default();
        assert!(BayerImage::new(3, 4, BayerPhase::Rggb, vec![0.0; 12], meta).is_err());
    }

    #[test]
    fn hdr_ceiling_from_bit_depth() {
        let mut meta = ImageMeta::default();
        assert_eq!(meta.hdr_ceiling(), 1.0);
        meta.bit_depth = 12;
        assert_eq!(meta.hdr_ceiling(), 1.0);
        meta.bit_depth = 20;
        assert_eq!(meta.hdr_ceiling(), 16.0);
    }

    #[test]
    fn value_range_enforced() {
        let meta = ImageMeta::default();
        assert!(BayerImage::new(2, 2, BayerPhase::Rggb, vec![0.0, 0.5, 1.0, 1.5], meta).is_err());
        let hdr = ImageMeta {
            bit_depth: 20,
            ..ImageMeta::default()
        };
        assert!(BayerImage::new(2, 2, BayerPhase::Rggb, vec![0.0, 0.5, 1.0, 1.5], hdr).is_ok());
    }

    #[test]
    fn srgb_range_enforced() {
        let plane = vec![0.5; 4];
        let over = vec![1.5, 0.0, 0.0, 0.0];
        assert!(RgbImage::new(
            2,
            2,
            RgbEncoding::Srgb,
            [plane.clone(), plane.clone(), over.clone()]
        )
        .is_err());
        assert!(RgbImage::new(2, 2, RgbEncoding::Linear, [plane.clone(), plane, over]).is_ok());
    }

    #[test]
    fn phase_roundtrip_strings() {
        for phase in BayerPhase::ALL {
            let s = phase.to_string();
            assert_eq!(s.parse::<BayerPhase>().unwrap(), phase);
        }
    }
}
