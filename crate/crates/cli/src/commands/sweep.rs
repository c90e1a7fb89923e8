//! `rawpipe sweep`: skew/kurtosis of x^n-transformed corpora over a ladder
//! of exponents, optionally materializing the transformed datasets.

use crate::corpus::{self, Entry};
use anyhow::{bail, Context, Result};
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::stats::{pow_transform_rgb, sweep_exponents, SweepAccumulator};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    out: &Path,
    n_min: f64,
    n_max: f64,
    step: f64,
    write_datasets: Option<&Path>,
    seed: u64,
    jobs: Option<usize>,
    sample: Option<usize>,
) -> Result<()> {
    let ns = sweep_exponents(n_min, n_max, step)?;
    let mut entries = corpus::walk_corpus(input, seed)?;
    if let Some(k) = sample {
        entries = corpus::sample_per_class(entries, k, seed);
    }
    if let Some(dir) = write_datasets {
        for &n in &ns {
            std::fs::create_dir_all(dir.join(format!("n_{n}")))?;
        }
    }

    // Per-image partial sweeps in parallel, merged in corpus order so the
    // result is independent of the worker count.
    let pool = corpus::thread_pool(jobs)?;
    let partials: Vec<(usize, std::result::Result<SweepAccumulator, String>)> =
        pool.install(|| {
            entries
                .par_iter()
                .enumerate()
                .map(|(i, entry)| {
                    let outcome =
                        process_one(entry, &ns, write_datasets).map_err(|e| format!("{e:#}"));
                    (i, outcome)
                })
                .collect()
        });

    let mut acc = SweepAccumulator::new(&ns);
    let mut failures = Vec::new();
    let mut used = 0usize;
    for (i, outcome) in partials {
        match outcome {
            Ok(partial) => {
                acc.merge(&partial);
                used += 1;
            }
            Err(reason) => failures.push((entries[i].rel_path.clone(), reason)),
        }
    }
    if used == 0 {
        bail!("no readable RGB images in the corpus");
    }

    let mut csv = String::from("channel,n,mean,variance,skew,kurtosis,samples\n");
    for row in acc.rows() {
        let m = row.moments;
        let skew = m
            .skew
            .map(|s| format!("{s}"))
            .unwrap_or_else(|| "undefined".into());
        let kurtosis = m
            .kurtosis
            .map(|k| format!("{k}"))
            .unwrap_or_else(|| "undefined".into());
        let _ = writeln!(
            csv,
            "{},{},{},{},{skew},{kurtosis},{}",
            row.channel, row.n, m.mean, m.variance, m.n
        );
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "sweep: {} exponent(s) over {used} image(s) -> {}",
        ns.len(),
        out.display()
    );
    let out_dir = out.parent().unwrap_or(Path::new("."));
    corpus::finish_with_failures(out_dir, &failures)
}

fn process_one(
    entry: &Entry,
    ns: &[f64],
    write_datasets: Option<&Path>,
) -> Result<SweepAccumulator> {
    let LoadedImage::Rgb(img) = io::load_image(&entry.abs_path)? else {
        bail!("sweep operates on RGB corpora (values in [0, 1])");
    };
    let mut acc = SweepAccumulator::new(ns);
    acc.add_rgb(&img)?;
    if let Some(dir) = write_datasets {
        for &n in ns {
            let transformed = pow_transform_rgb(&img, n)?;
            let path = dir.join(format!("n_{n}")).join(&entry.rel_path);
            std::fs::create_dir_all(path.parent().context("no parent")?)?;
            io::save_rgb(&transformed, &path)?;
        }
    }
    Ok(acc)
}
