//! Poisson-Gaussian sensor noise.

use crate::error::Result;
use crate::image::BayerImage;
use crate::rng::PixelRng;

/// Stream salt so noise draws never collide with other seed consumers.
const NOISE_STREAM: u64 = 0x4e_4f49_5345; // "NOISE"

/// Add shot and read noise: `y = P(x / g) * g + N(0, sigma^2)`.
///
/// `g` is the shot-noise gain (variance at signal x is `g * x`); zero
/// disables the Poisson term. Each pixel draws from its own counter-keyed
/// stream `(seed, frame, pixel index)`, so the result is independent of any
/// scheduling. Output is clamped to the sensor range [0, ceiling].
pub fn add_noise_frame(
    img: &BayerImage,
    shot_noise_gain: f64,
    read_noise_sigma: f64,
    seed: u64,
    frame_index: u64,
) -> Result<BayerImage> {
    assert!(shot_noise_gain >= 0.0 && read_noise_sigma >= 0.0);
    if shot_noise_gain == 0.0 && read_noise_sigma == 0.0 {
        return Ok(img.clone());
    }
    let ceiling = img.hdr_ceiling();
    let stream = NOISE_STREAM ^ frame_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let data: Vec<f64> = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut rng = PixelRng::new(seed, stream, i as u64);
            let signal = if shot_noise_gain > 0.0 {
                rng.next_poisson(x / shot_noise_gain) * shot_noise_gain
            } else {
                x
            };
            let read = if read_noise_sigma > 0.0 {
                read_noise_sigma * rng.next_gaussian()
            } else {
                0.0
            };
            (signal + read).clamp(0.0, ceiling)
        })
        .collect();
    img.with_data(data)
}

/// Single-frame convenience wrapper.
pub fn add_noise(
    img: &BayerImage,
    shot_noise_gain: f64,
    read_noise_sigma: f64,
    seed: u64,
) -> Result<BayerImage> {
    add_noise_frame(img, shot_noise_gain, read_noise_sigma, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{BayerPhase, ImageMeta};

    fn constant(value: f64, n: usize) -> BayerImage {
        BayerImage::constant(n, n, BayerPhase::Rggb, value, ImageMeta::default()).unwrap()
    }

    #[test]
    fn zero_parameters_are_identity() {
        let img = constant(0.4, 16);
        let out = add_noise(&img, 0.0, 0.0, 99).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn mean_is_unbiased_and_variance_matches_model() {
        // Poisson-Gaussian model: var = g*x + sigma^2 at constant level x.
        let (g, sigma, x) = (4e-4, 1e-3, 0.5);
        let img = constant(x, 512); // 262144 pixels
        let out = add_noise(&img, g, sigma, 4242).unwrap();
        let n = out.data().len() as f64;
        let mean: f64 = out.data().iter().sum::<f64>() / n;
        let var: f64 = out
            .data()
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n;
        let expect = g * x + sigma * sigma;
        let std = expect.sqrt();
        assert!((mean - x).abs() < 4.0 * std / n.sqrt(), "mean {mean}");
        assert!(
            (var - expect).abs() / expect < 0.05,
            "var {var} vs {expect}"
        );
    }

    #[test]
    fn deterministic_per_seed_and_frame() {
        let img = constant(0.3, 8);
        let a = add_noise_frame(&img, 1e-3, 1e-3, 7, 0).unwrap();
        let b = add_noise_frame(&img, 1e-3, 1e-3, 7, 0).unwrap();
        let c = add_noise_frame(&img, 1e-3, 1e-3, 7, 1).unwrap();
        let d = add_noise_frame(&img, 1e-3, 1e-3, 8, 0).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
        assert_ne!(a.data(), d.data());
    }

    #[test]
    fn never_negative() {
        let img = constant(0.002, 64);
        let out = add_noise(&img, 1e-3, 5e-3, 3).unwrap();
        assert!(out.data().iter().all(|&v| v >= 0.0));
    }
}
