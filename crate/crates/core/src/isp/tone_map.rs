//! Local histogram-equalization tone mapping on the mosaic plane.
//!
//! Works on 2x2 quad luma so the Bayer structure survives: each quad gets a
//! single multiplicative gain, preserving chromaticity. Tile mappings are
//! clipped-histogram equalizers composed with the sRGB linearization curve,
//! so the distribution is uniform *after* the gamma stage that follows later
//! in the pipeline. This is the dynamic-range compressor: output is in
//! [0, 1] for any non-negative input.

use crate::error::{Error, Result};
use crate::image::BayerImage;
use crate::srgb;

/// Gain denominator guard for black quads.
const LUMA_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToneMapParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Histogram clip as a multiple of the mean bin height; `inf` disables
    /// clipping.
    pub clip_limit: f64,
    pub bins: usize,
}

impl Default for ToneMapParams {
    fn default() -> Self {
        Self {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 4.0,
            bins: 256,
        }
    }
}

pub fn tone_map(
    img: &BayerImage,
    tiles_x: usize,
    tiles_y: usize,
    clip_limit: f64,
    bins: usize,
) -> Result<BayerImage> {
    assert!(tiles_x >= 1 && tiles_y >= 1, "need at least one tile");
    assert!(bins >= 64, "need at least 64 histogram bins");
    assert!(clip_limit >= 1.0, "clip_limit must be >= 1");
    let (w, h) = (img.width(), img.height());
    let (qw, qh) = (w / 2, h / 2);
    if tiles_x > qw || tiles_y > qh {
        return Err(Error::InvalidConfig(format!(
            "tile grid {tiles_x}x{tiles_y} exceeds quad grid {qw}x{qh}"
        )));
    }

    let ceiling = img.hdr_ceiling();
    let inv_ceiling = 1.0 / ceiling;
    let m = img.data();

    // Per-quad luma and histogram bin.
    let mut luma = vec![0.0; qw * qh];
    let mut bin_of = vec![0usize; qw * qh];
    for qy in 0..qh {
        for qx in 0..qw {
            let (x, y) = (2 * qx, 2 * qy);
            let sum = m[y * w + x] + m[y * w + x + 1] + m[(y + 1) * w + x] + m[(y + 1) * w + x + 1];
            let yv = 0.25 * sum;
            luma[qy * qw + qx] = yv;
            bin_of[qy * qw + qx] = (((yv * inv_ceiling) * bins as f64) as usize).min(bins - 1);
        }
    }

    // Per-tile clipped histograms, row-major accumulation for determinism.
    let tile_count = tiles_x * tiles_y;
    let mut hist = vec![0u64; tile_count * bins];
    let mut tile_sizes = vec![0u64; tile_count];
    let tile_of = |qx: usize, qy: usize| -> usize {
        let tx = (qx * tiles_x / qw).min(tiles_x - 1);
        let ty = (qy * tiles_y / qh).min(tiles_y - 1);
        ty * tiles_x + tx
    };
    for qy in 0..qh {
        for qx in 0..qw {
            let t = tile_of(qx, qy);
            hist[t * bins + bin_of[qy * qw + qx]] += 1;
            tile_sizes[t] += 1;
        }
    }

    // Equalization LUT per tile: clipped CDF composed with sRGB
    // linearization so the post-gamma result is equalized.
    let mut luts = vec![0.0f64; tile_count * bins];
    for t in 0..tile_count {
        let hist = &mut hist[t * bins..(t + 1) * bins];
        let total = tile_sizes[t];
        if clip_limit.is_finite() {
            clip_histogram(hist, total, clip_limit);
        }
        let mut cum = 0u64;
        for (i, &count) in hist.iter().enumerate() {
            cum += count;
            luts[t * bins + i] = srgb::decode(cum as f64 / total as f64);
        }
    }

    // Apply: bilinear interpolation between the four surrounding tile
    // mappings, one gain per quad.
    let mut out = vec![0.0; w * h];
    let tw = qw as f64 / tiles_x as f64;
    let th = qh as f64 / tiles_y as f64;
    for qy in 0..qh {
        let fy = (qy as f64 + 0.5) / th - 0.5;
        let ty0 = fy.floor();
        let wy = fy - ty0;
        let ty0i = (ty0 as isize).clamp(0, tiles_y as isize - 1) as usize;
        let ty1i = ((ty0 as isize + 1).max(0) as usize).min(tiles_y - 1);
        for qx in 0..qw {
            let fx = (qx as f64 + 0.5) / tw - 0.5;
            let tx0 = fx.floor();
            let wx = fx - tx0;
            let tx0i = (tx0 as isize).clamp(0, tiles_x as isize - 1) as usize;
            let tx1i = ((tx0 as isize + 1).max(0) as usize).min(tiles_x - 1);

            let bin = bin_of[qy * qw + qx];
            let tl = luts[(ty0i * tiles_x + tx0i) * bins + bin];
            let tr = luts[(ty0i * tiles_x + tx1i) * bins + bin];
            let bl = luts[(ty1i * tiles_x + tx0i) * bins + bin];
            let br = luts[(ty1i * tiles_x + tx1i) * bins + bin];
            let top = tl + wx * (tr - tl);
            let bot = bl + wx * (br - bl);
            let mapped = top + wy * (bot - top);

            let yv = luma[qy * qw + qx];
            let gain = mapped / yv.max(LUMA_EPSILON);
            let (x, y) = (2 * qx, 2 * qy);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let i = (y + dy) * w + x + dx;
                out[i] = (m[i] * gain).clamp(0.0, 1.0);
            }
        }
    }

    let mut meta = img.meta.clone();
    // The mapped image occupies [0, 1]; drop any HDR headroom.
    meta.bit_depth = meta.bit_depth.min(16);
    BayerImage::new(w, h, img.phase(), out, meta)
}

/// CLAHE-style histogram clip: bins above the limit are flattened and the
/// excess is spread evenly, residual distributed at a fixed stride.
fn clip_histogram(hist: &mut [u64], total: u64, clip_limit: f64) {
    let bins = hist.len() as u64;
    let limit = ((clip_limit * total as f64 / bins as f64).floor() as u64).max(1);
    let mut excess = 0u64;
    for h in hist.iter_mut() {
        if *h > limit {
            excess += *h - limit;
            *h = limit;
        }
    }
    if excess == 0 {
        return;
    }
    let per_bin = excess / bins;
    let mut residual = excess % bins;
    for h in hist.iter_mut() {
        *h += per_bin;
    }
    if let Some(step) = bins.checked_div(residual) {
        let step = (step as usize).max(1);
        let mut i = 0;
        while residual > 0 && i < hist.len() {
            hist[i] += 1;
            residual -= 1;
            i += step;
        }
        // Any leftover lands in the first bins.
        let mut i = 0;
        while residual > 0 {
            hist[i] += 1;
            residual -= 1;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{BayerPhase, ImageMeta};
    use crate::rng::PixelRng;

    fn quad_image(qw: usize, qh: usize, quad_values: &[f64]) -> BayerImage {
        let (w, h) = (qw * 2, qh * 2);
        let mut data = vec![0.0; w * h];
        for qy in 0..qh {
            for qx in 0..qw {
                let v = quad_values[qy * qw + qx];
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    data[(2 * qy + dy) * w + 2 * qx + dx] = v;
                }
            }
        }
        BayerImage::new(w, h, BayerPhase::Rggb, data, ImageMeta::default()).unwrap()
    }

    /// Uniform-luma input, one tile, no clipping: the mapping approaches the
    /// sRGB linearization curve and the post-gamma output is uniform within
    /// histogram resolution.
    #[test]
    fn equalized_input_maps_to_linearization_curve() {
        let (qw, qh) = (64, 64);
        let n = qw * qh;
        // Spread quad values uniformly over (0, 1), then scatter them
        // spatially so the single tile sees the whole population.
        let mut values: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
        let mut rng = PixelRng::new(4, 0, 0);
        for i in (1..values.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            values.swap(i, j);
        }
        let img = quad_image(qw, qh, &values);
        let out = tone_map(&img, 1, 1, f64::INFINITY, 256).unwrap();

        let bins = 256.0;
        for qy in 0..qh {
            for qx in 0..qw {
                let v = values[qy * qw + qx];
                let o = out.get(2 * qx, 2 * qy);
                // Mapping tracks the linearization curve...
                assert!(
                    (o - crate::srgb::decode(v)).abs() < 2.5 * (1.0 / bins + 1.0 / n as f64) * 2.4,
                    "quad ({qx},{qy}): {o} vs decode({v})"
                );
                // ...and re-encoding lands back on the uniform CDF.
                assert!(
                    (crate::srgb::encode(o) - v).abs() < 1.5 / bins + 1.0 / n as f64,
                    "quad ({qx},{qy}) encode {} vs {v}",
                    crate::srgb::encode(o)
                );
            }
        }
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = quad_image(16, 16, &[0.37; 256]);
        let out = tone_map(&img, 4, 4, 4.0, 256).unwrap();
        let first = out.get(0, 0);
        for &v in out.data() {
            assert!((v - first).abs() < 1e-12);
        }
    }

    #[test]
    fn per_quad_ratios_preserved_when_unclipped() {
        let mut rng = PixelRng::new(21, 0, 0);
        let (w, h) = (32, 32);
        let data: Vec<f64> = (0..w * h).map(|_| 0.2 + 0.6 * rng.next_f64()).collect();
        let img =
            BayerImage::new(w, h, BayerPhase::Rggb, data.clone(), ImageMeta::default()).unwrap();
        let out = tone_map(&img, 2, 2, 4.0, 128).unwrap();
        for qy in 0..h / 2 {
            for qx in 0..w / 2 {
                let idx = [
                    (2 * qy) * w + 2 * qx,
                    (2 * qy) * w + 2 * qx + 1,
                    (2 * qy + 1) * w + 2 * qx,
                    (2 * qy + 1) * w + 2 * qx + 1,
                ];
                if idx.iter().any(|&i| out.data()[i] >= 1.0 - 1e-9) {
                    continue; // clipped quad, ratios not expected to hold
                }
                let base_in = data[idx[0]];
                let base_out = out.data()[idx[0]];
                for &i in &idx[1..] {
                    let expect = data[i] / base_in;
                    let got = out.data()[i] / base_out;
                    assert!((expect - got).abs() < 1e-9, "quad ({qx},{qy})");
                }
            }
        }
    }

    #[test]
    fn hdr_input_is_compressed_into_unit_range() {
        let mut rng = PixelRng::new(8, 0, 0);
        let meta = ImageMeta {
            bit_depth: 20,
            ..ImageMeta::default()
        };
        let data: Vec<f64> = (0..64 * 64)
            .map(|_| 16.0 * rng.next_f64().powi(4))
            .collect();
        let img = BayerImage::new(64, 64, BayerPhase::Rggb, data, meta).unwrap();
        let out = tone_map(&img, 4, 4, 4.0, 256).unwrap();
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(out.meta.bit_depth, 16);
        assert_eq!(out.hdr_ceiling(), 1.0);
    }

    #[test]
    fn tile_grid_larger_than_quad_grid_rejected() {
        let img = quad_image(4, 4, &[0.5; 16]);
        assert!(tone_map(&img, 8, 8, 4.0, 64).is_err());
    }

    #[test]
    fn clip_histogram_conserves_mass() {
        let mut hist = vec![0u64; 64];
        hist[3] = 1000;
        hist[10] = 24;
        let total = 1024;
        clip_histogram(&mut hist, total, 2.0);
        assert_eq!(hist.iter().sum::<u64>(), total);
        let limit = (2.0 * total as f64 / 64.0).floor() as u64;
        // The clipped bin keeps the limit plus its share of redistribution.
        assert!(hist[3] >= limit && hist[3] <= limit + excess_share(total, limit) + 1);
    }

    fn excess_share(total: u64, limit: u64) -> u64 {
        (total - limit) / 64
    }
}
