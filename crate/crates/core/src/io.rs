//! File I/O.
//!
//! Display-referred images travel as 8-bit RGB PNG (sRGB). Raw Bayer frames
//! travel as 16-bit grayscale PNG plus a flat `key=value` sidecar carrying
//! the sensor metadata. Values are normalized with divisor `2^bits - 1`; for
//! containers deeper than 16 bits the PNG stores the top 16 bits and the
//! normalized range extends to the HDR ceiling (see `ImageMeta::hdr_ceiling`).

use crate::error::{Error, Result};
use crate::image::{BayerImage, BayerPhase, ImageMeta, RgbEncoding, RgbImage};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub enum LoadedImage {
    Rgb(RgbImage),
    Bayer(BayerImage),
}

/// Path of the metadata sidecar accompanying a Bayer PNG.
pub fn sidecar_path(image_path: &Path) -> PathBuf {
    image_path.with_extension("meta")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Number of quantization steps for a container depth, and the value span
/// those steps cover.
fn quantization(bit_depth: u32) -> (f64, f64) {
    if bit_depth > 16 {
        let ceiling = (1u64 << (bit_depth - 16)) as f64;
        (((1u32 << 16) - 1) as f64, ceiling)
    } else {
        (((1u32 << bit_depth) - 1) as f64, 1.0)
    }
}

/// Worst-case absolute error introduced by one save/load cycle.
pub fn quantization_bound(bit_depth: u32) -> f64 {
    let (steps, span) = quantization(bit_depth);
    span / steps
}

pub fn load_image(path: &Path) -> Result<LoadedImage> {
    let dynamic = image::open(path).map_err(|source| Error::Png {
        path: path.to_path_buf(),
        source,
    })?;
    match dynamic {
        image::DynamicImage::ImageRgb8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let mut planes = [
                Vec::with_capacity(w * h),
                Vec::with_capacity(w * h),
                Vec::with_capacity(w * h),
            ];
            for px in buf.pixels() {
                for (c, plane) in planes.iter_mut().enumerate() {
                    plane.push(px.0[c] as f64 / 255.0);
                }
            }
            Ok(LoadedImage::Rgb(RgbImage::new(
                w,
                h,
                RgbEncoding::Srgb,
                planes,
            )?))
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let meta_path = sidecar_path(path);
            if !meta_path.exists() {
                return Err(Error::MissingSidecar(meta_path));
            }
            let meta = read_sidecar(&meta_path)?;
            let phase = meta.1;
            let meta = meta.0;
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            if w % 2 != 0 || h % 2 != 0 {
                return Err(Error::InvalidImage(format!(
                    "Bayer PNG has odd dimensions {w}x{h}"
                )));
            }
            let (steps, span) = quantization(meta.bit_depth);
            let data: Vec<f64> = buf
                .pixels()
                .map(|px| px.0[0] as f64 / steps * span)
                .collect();
            Ok(LoadedImage::Bayer(BayerImage::new(
                w, h, phase, data, meta,
            )?))
        }
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!(
                "expected 8-bit RGB or 16-bit grayscale PNG, got {:?}",
                other.color()
            ),
        }),
    }
}

/// Write an sRGB image as 8-bit RGB PNG. Values must already be in [0, 1].
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    if img.encoding() != RgbEncoding::Srgb {
        return Err(Error::OutOfRange(
            "only sRGB images can be written as 8-bit PNG; gamma-encode first".into(),
        ));
    }
    let (w, h) = (img.width(), img.height());
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let px = img.pixel(x, y);
            let mut out = [0u8; 3];
            for c in 0..3 {
                let v = px[c];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange(format!(
                        "sRGB value {v} at ({x},{y}) outside [0, 1]; clip before saving"
                    )));
                }
                out[c] = (v * 255.0).round() as u8;
            }
            buf.put_pixel(x as u32, y as u32, image::Rgb(out));
        }
    }
    buf.save(path).map_err(|source| Error::Png {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a Bayer frame as 16-bit grayscale PNG plus metadata sidecar.
pub fn save_bayer(img: &BayerImage, path: &Path) -> Result<()> {
    let (steps, span) = quantization(img.meta.bit_depth);
    let (w, h) = (img.width(), img.height());
    let mut buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let v = img.get(x, y);
            if !(0.0..=span).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "raw value {v} at ({x},{y}) outside [0, {span}]; clip before saving"
                )));
            }
            let code = (v / span * steps).round() as u16;
            buf.put_pixel(x as u32, y as u32, image::Luma([code]));
        }
    }
    buf.save(path).map_err(|source| Error::Png {
        path: path.to_path_buf(),
        source,
    })?;
    write_sidecar(&img.meta, img.phase(), &sidecar_path(path))
}

pub fn write_sidecar(meta: &ImageMeta, phase: BayerPhase, path: &Path) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "black_level={}", meta.black_level);
    let _ = writeln!(s, "bit_depth={}", meta.bit_depth);
    let _ = writeln!(s, "phase={phase}");
    let _ = writeln!(s, "sensor_id={}", meta.sensor_id);
    let _ = writeln!(s, "exposure_ratio={}", meta.exposure_ratio);
    let _ = writeln!(s, "rng_seed={}", meta.rng_seed);
    std::fs::write(path, s).map_err(io_err(path))
}

pub fn read_sidecar(path: &Path) -> Result<(ImageMeta, BayerPhase)> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut meta = ImageMeta::default();
    let mut phase = None;
    let mut seen_black = false;
    let mut seen_depth = false;
    let bad = |reason: String| Error::Sidecar {
        path: path.to_path_buf(),
        reason,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: missing '='", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "black_level" => {
                meta.black_level = value
                    .parse()
                    .map_err(|e| bad(format!("black_level: {e}")))?;
                seen_black = true;
            }
            "bit_depth" => {
                meta.bit_depth = value.parse().map_err(|e| bad(format!("bit_depth: {e}")))?;
                seen_depth = true;
            }
            "phase" => {
                phase = Some(
                    value
                        .parse::<BayerPhase>()
                        .map_err(|e| bad(format!("phase: {e}")))?,
                );
            }
            "sensor_id" => meta.sensor_id = value.to_string(),
            "exposure_ratio" => {
                meta.exposure_ratio = value
                    .parse()
                    .map_err(|e| bad(format!("exposure_ratio: {e}")))?;
            }
            "rng_seed" => {
                meta.rng_seed = value.parse().map_err(|e| bad(format!("rng_seed: {e}")))?;
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    if !seen_black || !seen_depth {
        return Err(bad("black_level and bit_depth are required".into()));
    }
    let phase = phase.ok_or_else(|| bad("phase is required".into()))?;
    meta.validate().map_err(|e| bad(e.to_string()))?;
    Ok((meta, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PixelRng;

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("rawpipe-io-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn rgb_roundtrip_within_8bit_quantization() {
        let dir = tmpdir("rgb");
        let mut rng = PixelRng::new(1, 0, 0);
        let planes = [(); 3].map(|_| (0..64 * 32).map(|_| rng.next_f64()).collect::<Vec<f64>>());
        let img = RgbImage::new(64, 32, RgbEncoding::Srgb, planes).unwrap();
        let path = dir.join("img.png");
        save_rgb(&img, &path).unwrap();
        let LoadedImage::Rgb(back) = load_image(&path).unwrap() else {
            panic!("expected RGB");
        };
        for c in 0..3 {
            for (a, b) in img.plane(c).iter().zip(back.plane(c)) {
                assert!((a - b).abs() <= 1.0 / 255.0 + 1e-12);
            }
        }
        // Full-scale and zero map exactly.
        let flat = RgbImage::new(
            2,
            2,
            RgbEncoding::Srgb,
            [vec![1.0; 4], vec![0.0; 4], vec![1.0; 4]],
        )
        .unwrap();
        save_rgb(&flat, &path).unwrap();
        let LoadedImage::Rgb(back) = load_image(&path).unwrap() else {
            panic!()
        };
        assert_eq!(back.get(0, 0, 0), 1.0);
        assert_eq!(back.get(1, 0, 0), 0.0);
    }

    #[test]
    fn rgb_out_of_range_rejected() {
        let dir = tmpdir("range");
        let img = RgbImage::new(
            2,
            2,
            RgbEncoding::Linear,
            [vec![1.5; 4], vec![0.0; 4], vec![0.0; 4]],
        )
        .unwrap();
        assert!(save_rgb(&img, &dir.join("x.png")).is_err());
    }

    #[test]
    fn bayer_roundtrip_with_sidecar() {
        let dir = tmpdir("bayer");
        let mut rng = PixelRng::new(2, 0, 0);
        let meta = ImageMeta {
            black_level: 0.062,
            bit_depth: 12,
            sensor_id: "sensor-a".into(),
            exposure_ratio: 4.0,
            rng_seed: 777,
        };
        let data: Vec<f64> = (0..32 * 32).map(|_| rng.next_f64()).collect();
        let img = BayerImage::new(32, 32, BayerPhase::Grbg, data, meta.clone()).unwrap();
        let path = dir.join("frame.png");
        save_bayer(&img, &path).unwrap();
        let LoadedImage::Bayer(back) = load_image(&path).unwrap() else {
            panic!("expected Bayer")
        };
        assert_eq!(back.meta, meta);
        assert_eq!(back.phase(), BayerPhase::Grbg);
        let bound = quantization_bound(12);
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= bound);
        }
    }

    #[test]
    fn hdr_container_extends_range() {
        let dir = tmpdir("hdr");
        let meta = ImageMeta {
            black_level: 0.062,
            bit_depth: 20,
            sensor_id: "sensor-a".into(),
            exposure_ratio: 16.0,
            rng_seed: 0,
        };
        let mut rng = PixelRng::new(9, 0, 0);
        let data: Vec<f64> = (0..16 * 16).map(|_| rng.next_f64() * 16.0).collect();
        let img = BayerImage::new(16, 16, BayerPhase::Rggb, data, meta).unwrap();
        let path = dir.join("merged.png");
        save_bayer(&img, &path).unwrap();
        let LoadedImage::Bayer(back) = load_image(&path).unwrap() else {
            panic!()
        };
        let bound = quantization_bound(20);
        assert!(bound < 3e-4);
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= bound, "{a} vs {b}");
        }
    }

    #[test]
    fn missing_sidecar_is_an_error() {
        let dir = tmpdir("nosidecar");
        let img = BayerImage::constant(4, 4, BayerPhase::Rggb, 0.5, ImageMeta::default()).unwrap();
        let path = dir.join("orphan.png");
        save_bayer(&img, &path).unwrap();
        std::fs::remove_file(sidecar_path(&path)).unwrap();
        assert!(matches!(load_image(&path), Err(Error::MissingSidecar(_))));
    }

    #[test]
    fn sidecar_unknown_key_rejected() {
        let dir = tmpdir("sidecarbad");
        let path = dir.join("bad.meta");
        std::fs::write(&path, "black_level=0\nbit_depth=12\nphase=RGGB\nwat=1\n").unwrap();
        assert!(read_sidecar(&path).is_err());
    }

    #[test]
    fn normalization_divisor_is_full_scale() {
        // A 12-bit code of 4095 loads as exactly 1.0.
        let dir = tmpdir("norm");
        let path = dir.join("full.png");
        let mut buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> = image::ImageBuffer::new(2, 2);
        for px in buf.pixels_mut() {
            *px = image::Luma([4095u16]);
        }
        buf.save(&path).unwrap();
        let meta = ImageMeta {
            bit_depth: 12,
            ..ImageMeta::default()
        };
        write_sidecar(&meta, BayerPhase::Rggb, &sidecar_path(&path)).unwrap();
        let LoadedImage::Bayer(img) = load_image(&path).unwrap() else {
            panic!()
        };
        assert_eq!(img.get(0, 0), 1.0);
    }
}
