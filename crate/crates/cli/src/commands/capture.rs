//! `rawpipe capture`: RGB corpus -> simulated raw HDR corpus.

use crate::corpus::{self, Entry};
use anyhow::{Context, Result};
use rawpipe_core::capture::{run_capture, CaptureConfig};
use rawpipe_core::config::ConfigFile;
use rawpipe_core::image::{BayerImage, RgbEncoding, RgbImage};
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::isp::{run_isp, IspConfig, IspOutput, IspStages, ToneMapParams};
use rawpipe_core::{srgb, SensorProfile};
use rayon::prelude::*;
use std::path::Path;

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    out: &Path,
    config: Option<&ConfigFile>,
    profile: SensorProfile,
    seed: u64,
    jobs: Option<usize>,
    sample: Option<usize>,
    debug_triptych: bool,
) -> Result<()> {
    let base_config = match config {
        Some(file) => file.build_capture_config(Some(profile))?,
        None => CaptureConfig::new(profile),
    };
    let mut entries = corpus::walk_corpus(input, seed)?;
    if let Some(k) = sample {
        entries = corpus::sample_per_class(entries, k, seed);
    }
    std::fs::create_dir_all(out)?;

    // Preview pipeline for the optional triptych: the full ISP with the
    // tone map at its HDR calibration.
    let preview_isp = IspConfig::new(
        IspStages {
            tone_map: Some(ToneMapParams {
                clip_limit: 128.0,
                bins: 1024,
                ..ToneMapParams::default()
            }),
            ..IspStages::full()
        },
        base_config.profile.clone(),
    )
    .expect("full pipeline is a valid configuration");

    let pool = corpus::thread_pool(jobs)?;
    let results: Vec<(usize, std::result::Result<(), String>)> = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, entry)| {
                let outcome = process_one(
                    entry,
                    out,
                    &base_config,
                    debug_triptych.then_some(&preview_isp),
                )
                .map_err(|e| format!("{e:#}"));
                (i, outcome)
            })
            .collect()
    });

    let mut produced: Vec<&Entry> = Vec::new();
    let mut failures = Vec::new();
    for (i, outcome) in results {
        match outcome {
            Ok(()) => produced.push(&entries[i]),
            Err(reason) => failures.push((entries[i].rel_path.clone(), reason)),
        }
    }
    corpus::write_manifest(out, seed, &produced)?;
    println!(
        "capture: {} image(s) written to {}, {} failure(s)",
        produced.len(),
        out.display(),
        failures.len()
    );
    corpus::finish_with_failures(out, &failures)
}

fn process_one(
    entry: &Entry,
    out: &Path,
    base_config: &CaptureConfig,
    preview_isp: Option<&IspConfig>,
) -> Result<()> {
    let LoadedImage::Rgb(img) = io::load_image(&entry.abs_path)? else {
        anyhow::bail!("expected an 8-bit RGB PNG");
    };
    let config = base_config.clone().with_seed(entry.seed);
    let raw = run_capture(&img, &config)?;
    let out_path = out.join(&entry.rel_path);
    std::fs::create_dir_all(out_path.parent().context("output path has no parent")?)?;
    io::save_bayer(&raw, &out_path)?;

    if let Some(isp_config) = preview_isp {
        let debug_dir = out.join("debug").join(&entry.class);
        std::fs::create_dir_all(&debug_dir)?;
        let stem = out_path
            .file_stem()
            .context("no file stem")?
            .to_string_lossy();
        io::save_rgb(&img, &debug_dir.join(format!("{stem}_original.png")))?;
        io::save_rgb(
            &colorize_raw(&raw),
            &debug_dir.join(format!("{stem}_raw.png")),
        )?;
        match run_isp(&raw, isp_config)? {
            IspOutput::Rgb(rgb) => io::save_rgb(&rgb, &debug_dir.join(format!("{stem}_isp.png")))?,
            IspOutput::Bayer(_) => unreachable!("preview pipeline demosaics"),
        }
    }
    Ok(())
}

/// Display rendering of a mosaic: each site shown in its own color,
/// normalized by the HDR ceiling and gamma-encoded for visibility.
fn colorize_raw(raw: &BayerImage) -> RgbImage {
    let (w, h) = (raw.width(), raw.height());
    let inv_ceiling = 1.0 / raw.hdr_ceiling();
    let mut planes = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
    for y in 0..h {
        for x in 0..w {
            let c = raw.color_at(x, y).rgb_channel();
            let v = (raw.get(x, y) * inv_ceiling).clamp(0.0, 1.0);
            planes[c][y * w + x] = srgb::encode(v).clamp(0.0, 1.0);
        }
    }
    RgbImage::new(w, h, RgbEncoding::Srgb, planes).expect("colorized raw is valid")
}
