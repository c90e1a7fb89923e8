//! `rawpipe isp`: raw corpus -> processed corpus under a stage selection.

use crate::corpus::{self, Entry};
use anyhow::{bail, Context, Result};
use rawpipe_core::config::ConfigFile;
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::isp::{run_isp, IspConfig, IspOutput};
use rawpipe_core::SensorProfile;
use rayon::prelude::*;
use std::path::Path;

pub fn run(
    input: &Path,
    out: &Path,
    config: &ConfigFile,
    profile: SensorProfile,
    seed: u64,
    jobs: Option<usize>,
    sample: Option<usize>,
) -> Result<()> {
    let isp_config = config.build_isp_config(Some(profile))?;
    let mut entries = corpus::walk_corpus(input, seed)?;
    if let Some(k) = sample {
        entries = corpus::sample_per_class(entries, k, seed);
    }
    std::fs::create_dir_all(out)?;

    let pool = corpus::thread_pool(jobs)?;
    let results: Vec<(usize, std::result::Result<(), String>)> = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, entry)| {
                let outcome = process_one(entry, out, &isp_config).map_err(|e| format!("{e:#}"));
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
        "isp: {} image(s) written to {}, {} failure(s)",
        produced.len(),
        out.display(),
        failures.len()
    );
    corpus::finish_with_failures(out, &failures)
}

fn process_one(entry: &Entry, out: &Path, config: &IspConfig) -> Result<()> {
    let LoadedImage::Bayer(raw) = io::load_image(&entry.abs_path)? else {
        bail!("expected a 16-bit Bayer PNG with sidecar");
    };
    // The sidecar pedestal must agree with the profile the stages will use.
    let profile_bl = config.profile().black_level;
    if config.stages().black_level && (raw.meta.black_level - profile_bl).abs() > 1e-6 {
        bail!(
            "black_level mismatch: sidecar {} vs profile {}",
            raw.meta.black_level,
            profile_bl
        );
    }
    let out_path = out.join(&entry.rel_path);
    std::fs::create_dir_all(out_path.parent().context("output path has no parent")?)?;
    match run_isp(&raw, config)? {
        IspOutput::Bayer(mosaic) => io::save_bayer(&mosaic, &out_path)?,
        IspOutput::Rgb(rgb) => io::save_rgb(&rgb, &out_path).map_err(|e| {
            anyhow::anyhow!("{e} (demosaiced output needs the gamma stage for 8-bit PNG)")
        })?,
    }
    Ok(())
}
