//! Black level subtraction.

use crate::error::Result;
use crate::image::BayerImage;

/// Remove the sensor pedestal and rescale so full scale stays at 1.
///
/// `out = max(in - black_level, 0) / (1 - black_level)`, capped at the HDR
/// ceiling (file quantization can leave values a hair above full scale).
/// The rescale keeps downstream stage parameters independent of the
/// pedestal; the output metadata records a zero black level.
pub fn subtract_black_level(img: &BayerImage, black_level: f64) -> Result<BayerImage> {
    assert!(
        (0.0..1.0).contains(&black_level),
        "black_level {black_level} outside [0, 1)"
    );
    let ceiling = img.hdr_ceiling();
    let scale = 1.0 / (1.0 - black_level);
    let data: Vec<f64> = img
        .data()
        .iter()
        .map(|&v| ((v - black_level).max(0.0) * scale).min(ceiling))
        .collect();
    let mut out = img.with_data(data)?;
    out.meta.black_level = 0.0;
    Ok(out)
}
