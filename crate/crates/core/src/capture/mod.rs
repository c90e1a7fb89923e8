//! Capture model: synthesize raw HDR Bayer frames from RGB images.
//!
//! A reverse ISP. Each stage approximately inverts one forward stage:
//! linearize undoes gamma, color confusion undoes the correction matrix,
//! white imbalance undoes the gains, remosaic discards two thirds of the
//! color data, then pedestal, quantization and sensor noise are applied.
//! Multiple exposures of the simulated HDR scene are merged back into one
//! radiance-aligned raw frame, the way a real HDR sensor stack would be.

mod hdr;
mod noise;

pub use hdr::{simulate_hdr, smooth_gain_field};
pub use noise::{add_noise, add_noise_frame};

use crate::error::{Error, Result};
use crate::image::{BayerImage, BayerPhase, ImageMeta, RgbEncoding, RgbImage};
use crate::profile::{mat3_mul_vec, Mat3, SensorProfile};
use crate::srgb;

/// Frames at or above this value count as saturated during merging.
pub const SATURATION_THRESHOLD: f64 = 0.99;

/// Exact inverse of the ISP gamma stage.
pub fn linearize(img: &RgbImage) -> Result<RgbImage> {
    if img.encoding() != RgbEncoding::Srgb {
        return Err(Error::InvalidImage(
            "linearize expects an sRGB-encoded image".into(),
        ));
    }
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        *plane = img.plane(c).iter().map(|&v| srgb::decode(v)).collect();
    }
    img.with_planes(RgbEncoding::Linear, planes)
}

/// Per-pixel multiplication by the color-confusion matrix (the inverse of
/// the correction matrix), reintroducing sensor channel crosstalk.
///
/// No clipping is applied. Production correction matrices are diagonally
/// dominant with nonpositive off-diagonal entries, so their inverses are
/// entrywise nonnegative and the product stays in the valid linear range.
pub fn color_confuse(img: &RgbImage, ccm_inverse: &Mat3) -> Result<RgbImage> {
    assert_eq!(img.encoding(), RgbEncoding::Linear, "expects linear RGB");
    let n = img.width() * img.height();
    let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let out = mat3_mul_vec(ccm_inverse, img.pixel(i % img.width(), i / img.width()));
        for (c, plane) in planes.iter_mut().enumerate() {
            plane[i] = out[c];
        }
    }
    img.with_planes(RgbEncoding::Linear, planes)
}

/// Divide each channel by its white balance gain (inverse of the ISP stage).
pub fn white_imbalance(img: &RgbImage, wb_gains: [f64; 3]) -> Result<RgbImage> {
    assert_eq!(img.encoding(), RgbEncoding::Linear, "expects linear RGB");
    assert!(wb_gains.iter().all(|&g| g > 0.0));
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        let inv = 1.0 / wb_gains[c];
        *plane = img.plane(c).iter().map(|&v| v * inv).collect();
    }
    img.with_planes(RgbEncoding::Linear, planes)
}

/// Apply a Bayer mask and collapse to a single plane.
pub fn remosaic(img: &RgbImage, phase: BayerPhase, meta: ImageMeta) -> Result<BayerImage> {
    let (w, h) = (img.width(), img.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::InvalidImage(format!(
            "remosaic needs even dimensions, got {w}x{h}"
        )));
    }
    let mut data = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let c = phase.color_at(x, y).rgb_channel();
            data[y * w + x] = img.plane(c)[y * w + x];
        }
    }
    BayerImage::new(w, h, phase, data, meta)
}

/// Re-apply the sensor pedestal: `out = in * (1 - black_level) + black_level`,
/// the exact inverse of the ISP's subtract-and-rescale.
pub fn add_black_level(img: &BayerImage, black_level: f64) -> Result<BayerImage> {
    assert!(
        (0.0..1.0).contains(&black_level),
        "black_level {black_level} outside [0, 1)"
    );
    let data: Vec<f64> = img
        .data()
        .iter()
        .map(|&v| v * (1.0 - black_level) + black_level)
        .collect();
    let mut out = img.with_data(data)?;
    out.meta.black_level = black_level;
    Ok(out)
}

/// Round to the uniform code grid of the given container depth.
pub fn quantize(img: &BayerImage, bit_depth: u32) -> Result<BayerImage> {
    assert!(
        (8..=16).contains(&bit_depth),
        "quantize handles depths 8..=16"
    );
    let steps = ((1u32 << bit_depth) - 1) as f64;
    let data: Vec<f64> = img
        .data()
        .iter()
        .map(|&v| (v * steps).round() / steps)
        .collect();
    let mut out = img.with_data(data)?;
    out.meta.bit_depth = bit_depth;
    Ok(out)
}

/// One simulated exposure of an HDR scene.
///
/// Confusion, imbalance, exposure scaling with sensor saturation, remosaic,
/// pedestal, quantization and (optionally) noise, in that order.
pub fn capture_exposure(
    scene: &RgbImage,
    ratio: f64,
    profile: &SensorProfile,
    seed: u64,
    frame_index: u64,
    noise: bool,
) -> Result<BayerImage> {
    assert!(ratio >= 1.0, "exposure ratio must be >= 1");
    let confused = color_confuse(scene, profile.ccm_inverse())?;
    let imbalanced = white_imbalance(&confused, profile.wb_gains)?;
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        *plane = imbalanced
            .plane(c)
            .iter()
            .map(|&v| (v * ratio).clamp(0.0, 1.0))
            .collect();
    }
    let exposed = imbalanced.with_planes(RgbEncoding::Linear, planes)?;
    let meta = ImageMeta {
        black_level: 0.0,
        bit_depth: profile.bit_depth,
        sensor_id: profile.id.clone(),
        exposure_ratio: ratio,
        rng_seed: seed,
    };
    let mosaic = remosaic(&exposed, profile.phase, meta)?;
    let pedestal = add_black_level(&mosaic, profile.black_level)?;
    let quantized = quantize(&pedestal, profile.bit_depth)?;
    if noise {
        add_noise_frame(
            &quantized,
            profile.shot_noise_gain,
            profile.read_noise_sigma,
            seed,
            frame_index,
        )
    } else {
        Ok(quantized)
    }
}

/// A bracketed set of frames of one scene, ordered by exposure ratio.
#[derive(Clone, Debug)]
pub struct ExposureStack {
    frames: Vec<BayerImage>,
    ratios: Vec<f64>,
}

impl ExposureStack {
    pub fn new(frames: Vec<BayerImage>, ratios: Vec<f64>) -> Result<Self> {
        if frames.len() != ratios.len() || frames.len() < 2 {
            return Err(Error::InvalidImage(format!(
                "exposure stack needs >= 2 frames with matching ratios, got {} frames / {} ratios",
                frames.len(),
                ratios.len()
            )));
        }
        if ratios.iter().any(|r| !r.is_finite()) || ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidImage(
                "exposure ratios must be finite and strictly increasing".into(),
            ));
        }
        let (w, h, phase) = (frames[0].width(), frames[0].height(), frames[0].phase());
        for f in &frames[1..] {
            if f.width() != w || f.height() != h || f.phase() != phase {
                return Err(Error::InvalidImage(
                    "exposure stack frames disagree in geometry or phase".into(),
                ));
            }
        }
        Ok(Self { frames, ratios })
    }

    pub fn frames(&self) -> &[BayerImage] {
        &self.frames
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// Container depth for a merged stack: 16 bits of base range plus one bit
/// per doubling of the largest exposure ratio.
fn merged_bit_depth(max_ratio: f64) -> Result<u32> {
    if max_ratio <= 1.0 {
        return Ok(16);
    }
    let extra = max_ratio.log2().ceil() as u32;
    let depth = 16 + extra;
    if depth > 20 {
        return Err(Error::InvalidConfig(format!(
            "exposure ratio {max_ratio} exceeds the 20-bit merged container (max 16)"
        )));
    }
    Ok(depth)
}

/// Merge a bracketed stack into one radiance-aligned HDR raw frame.
///
/// Per site, each frame contributes a radiance estimate
/// `r = (frame - bl) / ((1 - bl) * ratio)`; saturated frames get zero
/// weight, the rest a triangle weight peaking at mid-range. The weighted
/// mean is aligned to the longest exposure (multiplied by the largest
/// ratio) and re-pedestaled. Sites unusable in every frame fall back to the
/// longest unsaturated exposure, or to the shortest one if all saturate.
pub fn merge_exposures(stack: &ExposureStack, profile: &SensorProfile) -> Result<BayerImage> {
    let bl = profile.black_level;
    let inv_span = 1.0 / (1.0 - bl);
    let max_ratio = *stack.ratios.last().expect("validated stack");
    let bit_depth = merged_bit_depth(max_ratio)?;
    let first = &stack.frames[0];
    let n = first.data().len();

    let mut merged = vec![0.0; n];
    for (i, site) in merged.iter_mut().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut longest_unsaturated = None;
        for (frame, &ratio) in stack.frames.iter().zip(&stack.ratios) {
            let f = frame.data()[i];
            let radiance = ((f - bl) * inv_span / ratio).max(0.0);
            if f >= SATURATION_THRESHOLD {
                continue;
            }
            longest_unsaturated = Some(radiance);
            let w = (1.0 - 2.0 * (f - 0.5).abs()).max(0.0);
            num += w * radiance;
            den += w;
        }
        let radiance = if den > 0.0 {
            num / den
        } else if let Some(r) = longest_unsaturated {
            r
        } else {
            // Everything saturated: trust the shortest exposure.
            let f = stack.frames[0].data()[i];
            ((f - bl) * inv_span / stack.ratios[0]).max(0.0)
        };
        *site = (radiance * max_ratio) * (1.0 - bl) + bl;
    }

    let meta = ImageMeta {
        black_level: bl,
        bit_depth,
        sensor_id: profile.id.clone(),
        exposure_ratio: max_ratio,
        rng_seed: first.meta.rng_seed,
    };
    BayerImage::new(first.width(), first.height(), first.phase(), merged, meta)
}

/// Capture model configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CaptureConfig {
    pub profile: SensorProfile,
    /// Spatial modulation amplitude of the HDR field.
    pub hdr_strength: f64,
    /// Global expansion exponent, >= 1.
    pub hdr_curve_power: f64,
    pub hdr_grid: (usize, usize),
    pub seed: u64,
    pub noise: bool,
    pub hdr: bool,
}

impl CaptureConfig {
    pub fn new(profile: SensorProfile) -> Self {
        Self {
            profile,
            hdr_strength: 1.5,
            hdr_curve_power: 2.0,
            hdr_grid: (4, 4),
            seed: 0,
            noise: true,
            hdr: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.hdr_strength.is_finite() || self.hdr_strength < 0.0 {
            return Err(Error::InvalidConfig("hdr_strength must be >= 0".into()));
        }
        if !self.hdr_curve_power.is_finite() || self.hdr_curve_power < 1.0 {
            return Err(Error::InvalidConfig("hdr_curve_power must be >= 1".into()));
        }
        if self.hdr_grid.0 < 2 || self.hdr_grid.1 < 2 {
            return Err(Error::InvalidConfig(
                "hdr_grid needs at least 2 nodes per axis".into(),
            ));
        }
        merged_bit_depth(self.profile.max_ratio()).map(|_| ())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Full capture path: linearize, HDR expansion, bracketed exposures, merge.
///
/// With the HDR flag off this is a single exposure at ratio 1. Fully
/// deterministic for a given configuration.
pub fn run_capture(img: &RgbImage, config: &CaptureConfig) -> Result<BayerImage> {
    config.validate()?;
    let profile = &config.profile;
    let linear = linearize(img)?;
    if !config.hdr {
        let mut out = capture_exposure(&linear, 1.0, profile, config.seed, 0, config.noise)?;
        out.meta.rng_seed = config.seed;
        return Ok(out);
    }
    let scene = simulate_hdr(
        &linear,
        config.hdr_strength,
        config.hdr_curve_power,
        config.hdr_grid,
        config.seed,
    )?;
    let ratios = profile.exposure_ratios.clone();
    let frames: Vec<BayerImage> = ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| capture_exposure(&scene, r, profile, config.seed, i as u64, config.noise))
        .collect::<Result<_>>()?;
    if frames.len() == 1 {
        return Ok(frames.into_iter().next().expect("one frame"));
    }
    let stack = ExposureStack::new(frames, ratios)?;
    let mut merged = merge_exposures(&stack, profile)?;
    merged.meta.rng_seed = config.seed;
    Ok(merged)
}
