//! Deterministic synthetic test scenes.
//!
//! Multi-octave smooth value noise shaped into natural-looking sRGB images:
//! most energy in the shadows and midtones, smooth chroma variation, a few
//! bright highlights. Used by smoke tests and the statistic suites when no
//! photographic corpus is mounted.

use crate::image::{RgbEncoding, RgbImage};
use crate::rng::PixelRng;
use crate::srgb;

const OCTAVE_STREAM: u64 = 0x53_594e_5448; // "SYNTH"

fn value_noise(width: usize, height: usize, nodes: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut grid = vec![0.0; nodes * nodes];
    for (i, g) in grid.iter_mut().enumerate() {
        *g = PixelRng::new(seed, stream, i as u64).next_f64();
    }
    let mut out = vec![0.0; width * height];
    let sx = (nodes - 1) as f64 / (width.max(2) - 1) as f64;
    let sy = (nodes - 1) as f64 / (height.max(2) - 1) as f64;
    for y in 0..height {
        let gy = y as f64 * sy;
        let y0 = (gy as usize).min(nodes - 2);
        let fy = gy - y0 as f64;
        for x in 0..width {
            let gx = x as f64 * sx;
            let x0 = (gx as usize).min(nodes - 2);
            let fx = gx - x0 as f64;
            let n00 = grid[y0 * nodes + x0];
            let n10 = grid[y0 * nodes + x0 + 1];
            let n01 = grid[(y0 + 1) * nodes + x0];
            let n11 = grid[(y0 + 1) * nodes + x0 + 1];
            let top = n00 + fx * (n10 - n00);
            let bot = n01 + fx * (n11 - n01);
            out[y * width + x] = top + fy * (bot - top);
        }
    }
    out
}

/// A natural-looking sRGB scene, deterministic in `seed`.
pub fn natural_scene(width: usize, height: usize, seed: u64) -> RgbImage {
    let n = width * height;
    let octaves = [(3usize, 0.42), (5, 0.26), (9, 0.16), (17, 0.10), (33, 0.06)];
    let mut luma = vec![0.0; n];
    for (o, (nodes, weight)) in octaves.iter().enumerate() {
        let field = value_noise(width, height, *nodes, seed, OCTAVE_STREAM + o as u64);
        for (l, f) in luma.iter_mut().zip(&field) {
            *l += weight * f;
        }
    }
    // Push mass toward the shadows the way photographic scenes sit in
    // linear light.
    for l in luma.iter_mut() {
        *l = (0.80 * l.powf(4.0)).clamp(0.0, 1.0);
    }

    // Sparse bright highlights.
    let mut hl = PixelRng::new(seed, OCTAVE_STREAM + 100, 0);
    let blobs = 2 + (hl.next_u64() % 4) as usize;
    for _ in 0..blobs {
        let cx = hl.next_f64() * width as f64;
        let cy = hl.next_f64() * height as f64;
        let radius = (2.0 + hl.next_f64() * 0.06 * width as f64).max(1.5);
        let strength = 0.6 + 0.4 * hl.next_f64();
        let inv_r2 = 1.0 / (2.0 * radius * radius);
        let reach = (radius * 3.0).ceil() as isize;
        let (cxi, cyi) = (cx as isize, cy as isize);
        for y in (cyi - reach).max(0)..(cyi + reach).min(height as isize) {
            for x in (cxi - reach).max(0)..(cxi + reach).min(width as isize) {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let g = strength * (-(dx * dx + dy * dy) * inv_r2).exp();
                let l = &mut luma[y as usize * width + x as usize];
                *l = (*l + g).min(1.0);
            }
        }
    }

    // Smooth chroma fields around neutral.
    let tint_a = value_noise(width, height, 4, seed, OCTAVE_STREAM + 200);
    let tint_b = value_noise(width, height, 4, seed, OCTAVE_STREAM + 201);
    let mut planes: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let l = luma[i];
        let a = tint_a[i] - 0.5;
        let b = tint_b[i] - 0.5;
        let r = (l * (1.0 + 0.5 * a)).clamp(0.0, 1.0);
        let g = (l * (1.0 - 0.2 * (a + b))).clamp(0.0, 1.0);
        let bl = (l * (1.0 + 0.5 * b)).clamp(0.0, 1.0);
        planes[0][i] = srgb::encode(r);
        planes[1][i] = srgb::encode(g);
        planes[2][i] = srgb::encode(bl);
    }
    RgbImage::new(width, height, RgbEncoding::Srgb, planes).expect("synthetic scene is valid")
}
