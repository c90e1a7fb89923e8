//! Property tests for the toolkit-wide invariants.

use proptest::prelude::*;
use rawpipe_core::image::{BayerImage, BayerPhase, ImageMeta, RgbEncoding, RgbImage};
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::isp;
use rawpipe_core::rng::PixelRng;
use rawpipe_core::stats;

fn tmp_path(tag: &str, case: u64) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rawpipe-prop-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(format!("{tag}-{case}.png"))
}

fn random_values(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = PixelRng::new(seed, 7001, 0);
    (0..n).map(|_| rng.next_f64() * scale).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// load(save(x)) stays within the container quantization bound, for any
    /// image geometry and any supported bit depth; the sidecar round-trips
    /// every metadata field exactly.
    #[test]
    fn bayer_save_load_identity(
        w in 1..12usize,
        h in 1..12usize,
        bit_depth in 8u32..=20,
        phase_idx in 0..4usize,
        black_level in 0.0..0.5f64,
        exposure_ratio in 1.0..16.0f64,
        seed in any::<u64>(),
    ) {
        let (w, h) = (2 * w, 2 * h);
        let meta = ImageMeta {
            black_level,
            bit_depth,
            sensor_id: format!("prop-{seed}"),
            exposure_ratio,
            rng_seed: seed,
        };
        let ceiling = meta.hdr_ceiling();
        let data = random_values(w * h, seed, ceiling);
        let img = BayerImage::new(w, h, BayerPhase::ALL[phase_idx], data, meta.clone()).unwrap();
        let path = tmp_path("bayer", seed);
        io::save_bayer(&img, &path).unwrap();
        let LoadedImage::Bayer(back) = io::load_image(&path).unwrap() else {
            panic!("expected Bayer");
        };
        let bound = io::quantization_bound(bit_depth);
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= bound, "{a} vs {b} (bound {bound})");
        }
        prop_assert_eq!(back.phase(), BayerPhase::ALL[phase_idx]);
        prop_assert_eq!(back.meta, meta);
    }

    #[test]
    fn rgb_save_load_identity(w in 1..24usize, h in 1..24usize, seed in any::<u64>()) {
        let planes = [
            random_values(w * h, seed, 1.0),
            random_values(w * h, seed ^ 1, 1.0),
            random_values(w * h, seed ^ 2, 1.0),
        ];
        let img = RgbImage::new(w, h, RgbEncoding::Srgb, planes).unwrap();
        let path = tmp_path("rgb", seed);
        io::save_rgb(&img, &path).unwrap();
        let LoadedImage::Rgb(back) = io::load_image(&path).unwrap() else {
            panic!("expected RGB");
        };
        for c in 0..3 {
            for (a, b) in img.plane(c).iter().zip(back.plane(c)) {
                prop_assert!((a - b).abs() <= 1.0 / 255.0);
            }
        }
    }

    /// Tone mapping is a dynamic-range compressor: any non-negative input
    /// lands in [0, 1], and every ISP stage output stays finite and
    /// non-negative.
    #[test]
    fn tone_map_compresses_into_unit_range(
        qw in 4..20usize,
        qh in 4..20usize,
        hdr in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let (w, h) = (2 * qw, 2 * qh);
        let meta = ImageMeta {
            bit_depth: if hdr { 20 } else { 12 },
            ..ImageMeta::default()
        };
        let data = random_values(w * h, seed, meta.hdr_ceiling());
        let img = BayerImage::new(w, h, BayerPhase::Rggb, data, meta).unwrap();
        let out = isp::tone_map(&img, 2, 2, 4.0, 64).unwrap();
        prop_assert!(out.data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }

    /// Native samples survive demosaicing exactly, whatever the phase.
    #[test]
    fn demosaic_native_sample_fixpoint(
        w in 2..24usize,
        h in 2..24usize,
        phase_idx in 0..4usize,
        seed in any::<u64>(),
    ) {
        let (w, h) = (2 * w, 2 * h);
        let phase = BayerPhase::ALL[phase_idx];
        let data = random_values(w * h, seed, 1.0);
        let img = BayerImage::new(w, h, phase, data, ImageMeta::default()).unwrap();
        let rgb = isp::demosaic(&img).unwrap();
        let back = rawpipe_core::capture::remosaic(&rgb, phase, img.meta.clone()).unwrap();
        prop_assert_eq!(back.data(), img.data());
    }

    /// The power transform pair is a bijection on [0, 1] to within 1e-6.
    #[test]
    fn pow_transform_bijection(n in 1.0..10.0f64, seed in any::<u64>()) {
        let img = RgbImage::new(
            64,
            8,
            RgbEncoding::Srgb,
            [
                random_values(512, seed, 1.0),
                random_values(512, seed ^ 1, 1.0),
                random_values(512, seed ^ 2, 1.0),
            ],
        )
        .unwrap();
        let back = stats::pow_inverse_rgb(&stats::pow_transform_rgb(&img, n).unwrap(), n).unwrap();
        for c in 0..3 {
            for (a, b) in img.plane(c).iter().zip(back.plane(c)) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }

    /// Histogram mass always equals the pixel count.
    #[test]
    fn histogram_mass_conservation(
        w in 1..16usize,
        h in 1..16usize,
        bins in 2..64usize,
        seed in any::<u64>(),
    ) {
        let (w, h) = (2 * w, 2 * h);
        let data = random_values(w * h, seed, 1.0);
        let img = BayerImage::new(w, h, BayerPhase::Grbg, data, ImageMeta::default()).unwrap();
        let total: u64 = stats::channel_histogram_bayer(&img, bins)
            .unwrap()
            .iter()
            .map(|s| s.histogram.iter().sum::<u64>())
            .sum();
        prop_assert_eq!(total, (w * h) as u64);
    }
}
