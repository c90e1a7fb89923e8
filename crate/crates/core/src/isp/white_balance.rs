//! White balance on the mosaic plane.

use crate::error::Result;
use crate::image::BayerImage;

/// Scale every photosite by the gain of its color; both green sites use the
/// G gain. The result is clipped to the image's HDR ceiling.
pub fn white_balance(img: &BayerImage, wb_gains: [f64; 3]) -> Result<BayerImage> {
    assert!(wb_gains.iter().all(|&g| g > 0.0), "gains must be positive");
    let ceiling = img.hdr_ceiling();
    let width = img.width();
    let data: Vec<f64> = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (x, y) = (i % width, i / width);
            let gain = wb_gains[img.color_at(x, y).rgb_channel()];
            (v * gain).min(ceiling)
        })
        .collect();
    img.with_data(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{BayerPhase, ImageMeta};

    #[test]
    fn unit_gains_are_identity() {
        let img = BayerImage::new(
            2,
            2,
            BayerPhase::Rggb,
            vec![0.1, 0.2, 0.3, 0.4],
            ImageMeta::default(),
        )
        .unwrap();
        let out = white_balance(&img, [1.0; 3]).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn red_gain_touches_only_red_sites() {
        let img = BayerImage::new(
            2,
            2,
            BayerPhase::Rggb,
            vec![0.3, 0.2, 0.2, 0.2],
            ImageMeta::default(),
        )
        .unwrap();
        let out = white_balance(&img, [2.0, 1.0, 1.0]).unwrap();
        assert!((out.get(0, 0) - 0.6).abs() < 1e-12);
        assert_eq!(out.get(1, 0), 0.2);
        assert_eq!(out.get(0, 1), 0.2);
        assert_eq!(out.get(1, 1), 0.2);
    }

    #[test]
    fn gray_mosaic_scales_uniformly() {
        let img = BayerImage::constant(4, 4, BayerPhase::Bggr, 0.25, ImageMeta::default()).unwrap();
        let out = white_balance(&img, [1.5, 1.5, 1.5]).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.375).abs() < 1e-12));
    }

    #[test]
    fn clips_at_ceiling() {
        let img = BayerImage::constant(2, 2, BayerPhase::Rggb, 0.9, ImageMeta::default()).unwrap();
        let out = white_balance(&img, [4.0, 4.0, 4.0]).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }
}
