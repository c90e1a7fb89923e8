//! Color correction and gamma encoding (the post-demosaic stages).

use crate::error::{Error, Result};
use crate::image::{RgbEncoding, RgbImage};
use crate::profile::{mat3_mul_vec, Mat3};
use crate::srgb;

/// Per-pixel multiplication by the color-correction matrix, clipped to
/// [0, ceiling]. The matrix is validated at profile construction.
///
/// The ceiling is 1 for display-bound input (everything already in [0, 1],
/// the normal case after tone mapping); HDR input keeps its own peak so the
/// radiance scale survives.
pub fn color_correct(img: &RgbImage, ccm: &Mat3) -> Result<RgbImage> {
    assert_eq!(img.encoding(), RgbEncoding::Linear, "expects linear RGB");
    let n = img.width() * img.height();
    let in_max = (0..3)
        .flat_map(|c| img.plane(c).iter().cloned())
        .fold(0.0f64, f64::max);
    let ceiling = in_max.max(1.0);
    let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let px = [img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]];
        let out = mat3_mul_vec(ccm, px);
        for (c, plane) in planes.iter_mut().enumerate() {
            plane[i] = out[c].clamp(0.0, ceiling);
        }
    }
    img.with_planes(RgbEncoding::Linear, planes)
}

/// Standard piecewise sRGB transfer. Inputs must be in [0, 1].
pub fn gamma_encode(img: &RgbImage) -> Result<RgbImage> {
    assert_eq!(img.encoding(), RgbEncoding::Linear, "expects linear RGB");
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, out_plane) in planes.iter_mut().enumerate() {
        let mut plane = Vec::with_capacity(img.plane(c).len());
        for &v in img.plane(c) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "gamma_encode input {v} outside [0, 1]; tone map or clip first"
                )));
            }
            plane.push(srgb::encode(v).clamp(0.0, 1.0));
        }
        *out_plane = plane;
    }
    img.with_planes(RgbEncoding::Srgb, planes)
}
