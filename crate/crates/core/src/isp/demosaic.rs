//! Gradient-directed demosaic.
//!
//! Green is reconstructed at red/blue sites by picking the interpolation
//! direction with the smaller absolute green gradient (ties average both
//! estimates). Red and blue are then filled in by bilinear interpolation of
//! the color differences R-G and B-G. Sampled values pass through exactly at
//! their native sites, so remosaicing the output reproduces the input
//! bit for bit.

use crate::error::Result;
use crate::image::{BayerImage, CfaColor, RgbEncoding, RgbImage};

/// Reflect-101 coordinate clamp.
#[inline]
fn mirror(idx: isize, len: usize) -> usize {
    let len = len as isize;
    if len == 1 {
        return 0;
    }
    let period = 2 * len - 2;
    let mut r = idx.rem_euclid(period);
    if r >= len {
        r = period - r;
    }
    r as usize
}

pub fn demosaic(img: &BayerImage) -> Result<RgbImage> {
    let (w, h) = (img.width(), img.height());
    let m = img.data();
    let at = |x: isize, y: isize| -> f64 { m[mirror(y, h) * w + mirror(x, w)] };

    let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    // Pass 1: full green plane.
    let mut green = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if img.phase().is_green(x, y) {
                green[i] = m[i];
            } else {
                let (xi, yi) = (x as isize, y as isize);
                let left = at(xi - 1, yi);
                let right = at(xi + 1, yi);
                let up = at(xi, yi - 1);
                let down = at(xi, yi + 1);
                let dh = (left - right).abs();
                let dv = (up - down).abs();
                let gh = 0.5 * (left + right);
                let gv = 0.5 * (up + down);
                green[i] = if dh < dv {
                    gh
                } else if dv < dh {
                    gv
                } else {
                    0.5 * (gh + gv)
                };
            }
        }
    }

    // Pass 2: chroma from bilinear color differences.
    let diff_at = |x: isize, y: isize| -> f64 {
        let (xm, ym) = (mirror(x, w), mirror(y, h));
        m[ym * w + xm] - green[ym * w + xm]
    };
    let mut red = vec![0.0; w * h];
    let mut blue = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (xi, yi) = (x as isize, y as isize);
            let g = green[i];
            match img.color_at(x, y) {
                CfaColor::R => {
                    red[i] = m[i];
                    // Blue sits on the diagonals of a red site.
                    let d = 0.25
                        * (diff_at(xi - 1, yi - 1)
                            + diff_at(xi + 1, yi - 1)
                            + diff_at(xi - 1, yi + 1)
                            + diff_at(xi + 1, yi + 1));
                    blue[i] = (g + d).clamp(lo, hi);
                }
                CfaColor::B => {
                    blue[i] = m[i];
                    let d = 0.25
                        * (diff_at(xi - 1, yi - 1)
                            + diff_at(xi + 1, yi - 1)
                            + diff_at(xi - 1, yi + 1)
                            + diff_at(xi + 1, yi + 1));
                    red[i] = (g + d).clamp(lo, hi);
                }
                color @ (CfaColor::Gr | CfaColor::Gb) => {
                    // Gr shares its row with red sites, Gb with blue sites.
                    let horiz = 0.5 * (diff_at(xi - 1, yi) + diff_at(xi + 1, yi));
                    let vert = 0.5 * (diff_at(xi, yi - 1) + diff_at(xi, yi + 1));
                    let (r_d, b_d) = if color == CfaColor::Gr {
                        (horiz, vert)
                    } else {
                        (vert, horiz)
                    };
                    red[i] = (g + r_d).clamp(lo, hi);
                    blue[i] = (g + b_d).clamp(lo, hi);
                }
            }
        }
    }

    RgbImage::new(w, h, RgbEncoding::Linear, [red, green, blue])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::remosaic;
    use crate::image::{BayerPhase, ImageMeta};
    use crate::rng::PixelRng;

    #[test]
    fn constant_mosaic_gives_constant_rgb() {
        for phase in BayerPhase::ALL {
            let img = BayerImage::constant(8, 8, phase, 0.3, ImageMeta::default()).unwrap();
            let rgb = demosaic(&img).unwrap();
            for c in 0..3 {
                for &v in rgb.plane(c) {
                    assert!((v - 0.3).abs() < 1e-12, "{phase} channel {c}");
                }
            }
        }
    }

    #[test]
    fn remosaic_of_demosaic_is_identity() {
        let mut rng = PixelRng::new(13, 0, 0);
        for phase in BayerPhase::ALL {
            let data: Vec<f64> = (0..24 * 16).map(|_| rng.next_f64()).collect();
            let img = BayerImage::new(24, 16, phase, data, ImageMeta::default()).unwrap();
            let rgb = demosaic(&img).unwrap();
            let back = remosaic(&rgb, phase, img.meta.clone()).unwrap();
            assert_eq!(back.data(), img.data(), "{phase}");
        }
    }

    /// On a horizontal luminance ramp the vertical gradient is zero, so
    /// green at red/blue sites interpolates vertically and lands exactly on
    /// the ramp value.
    #[test]
    fn horizontal_ramp_recovers_exact_green() {
        let (w, h) = (16, 8);
        let data: Vec<f64> = (0..w * h)
            .map(|i| (i % w) as f64 / (w - 1) as f64)
            .collect();
        let img = BayerImage::new(w, h, BayerPhase::Rggb, data, ImageMeta::default()).unwrap();
        let rgb = demosaic(&img).unwrap();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let expect = x as f64 / (w - 1) as f64;
                assert!(
                    (rgb.get(1, x, y) - expect).abs() < 1e-12,
                    "green at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn output_clipped_to_input_range() {
        let mut rng = PixelRng::new(99, 0, 0);
        let data: Vec<f64> = (0..32 * 32).map(|_| 0.25 + 0.5 * rng.next_f64()).collect();
        let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let img = BayerImage::new(32, 32, BayerPhase::Gbrg, data, ImageMeta::default()).unwrap();
        let rgb = demosaic(&img).unwrap();
        for c in 0..3 {
            for &v in rgb.plane(c) {
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
