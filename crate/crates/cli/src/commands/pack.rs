//! `rawpipe pack`: raw corpus -> CNN input tensors.

use crate::corpus::{self, Entry};
use anyhow::{bail, Context, Result};
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::pack::{pack, write_tensor, Representation};
use rayon::prelude::*;
use std::path::Path;

pub fn run(
    input: &Path,
    out: &Path,
    repr: Representation,
    seed: u64,
    jobs: Option<usize>,
    sample: Option<usize>,
) -> Result<()> {
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
                let outcome = process_one(entry, out, repr).map_err(|e| format!("{e:#}"));
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
        "pack: {} tensor(s) ({repr:?}) written to {}, {} failure(s)",
        produced.len(),
        out.display(),
        failures.len()
    );
    corpus::finish_with_failures(out, &failures)
}

fn process_one(entry: &Entry, out: &Path, repr: Representation) -> Result<()> {
    let LoadedImage::Bayer(raw) = io::load_image(&entry.abs_path)? else {
        bail!("expected a 16-bit Bayer PNG with sidecar");
    };
    let tensor = pack(&raw, repr);
    let out_path = out.join(&entry.rel_path).with_extension("rpt");
    std::fs::create_dir_all(out_path.parent().context("no parent")?)?;
    write_tensor(&tensor, &out_path)?;
    Ok(())
}
