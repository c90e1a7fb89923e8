//! Corpus layout, manifests and per-image seeding.
//!
//! Corpora are class-per-subdirectory trees of PNG files. Every command
//! walks entries in sorted order, derives per-image seeds from the global
//! seed and the relative path, and records outputs in a manifest so reruns
//! are bit-for-bit reproducible at any worker count.

use anyhow::{bail, Context, Result};
use rawpipe_core::rng::derive_seed;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct Entry {
    /// Path relative to the corpus root, e.g. `class/img.png`.
    pub rel_path: String,
    pub class: String,
    pub abs_path: PathBuf,
    pub seed: u64,
}

/// Walk a class-per-subdirectory corpus. Entries come back sorted by
/// relative path; per-image seeds mix the global seed with the path.
pub fn walk_corpus(root: &Path, global_seed: u64) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let classes = std::fs::read_dir(root)
        .with_context(|| format!("cannot read corpus directory {}", root.display()))?;
    for class_dir in classes {
        let class_dir = class_dir?;
        if !class_dir.file_type()?.is_dir() {
            continue;
        }
        let class = class_dir.file_name().to_string_lossy().to_string();
        for file in std::fs::read_dir(class_dir.path())? {
            let file = file?;
            let path = file.path();
            if path.extension().and_then(|e| e.to_str()) != Some("png") {
                continue;
            }
            let rel_path = format!(
                "{class}/{}",
                path.file_name().unwrap_or_default().to_string_lossy()
            );
            entries.push(Entry {
                seed: derive_seed(global_seed, &rel_path),
                class: class.clone(),
                abs_path: path,
                rel_path,
            });
        }
    }
    if entries.is_empty() {
        bail!(
            "no PNG images under {} (expected class-per-subdirectory layout)",
            root.display()
        );
    }
    entries.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    Ok(entries)
}

/// Seeded per-class sampling: keep `k` images of each class.
pub fn sample_per_class(entries: Vec<Entry>, k: usize, global_seed: u64) -> Vec<Entry> {
    use rawpipe_core::rng::{fnv1a64, PixelRng};
    let mut by_class: Vec<(String, Vec<Entry>)> = Vec::new();
    for e in entries {
        match by_class.iter_mut().find(|(c, _)| *c == e.class) {
            Some((_, v)) => v.push(e),
            None => by_class.push((e.class.clone(), vec![e])),
        }
    }
    let mut kept = Vec::new();
    for (class, mut v) in by_class {
        let mut rng = PixelRng::new(global_seed, 0x53414d50, fnv1a64(class.as_bytes()));
        for i in (1..v.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            v.swap(i, j);
        }
        v.truncate(k);
        kept.extend(v);
    }
    kept.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    kept
}

/// Write the manifest listing every produced output.
pub fn write_manifest(out_dir: &Path, global_seed: u64, entries: &[&Entry]) -> Result<()> {
    let mut text = String::new();
    text.push_str("# rawpipe manifest\n");
    text.push_str(&format!("# global_seed={global_seed}\n"));
    text.push_str("# columns: path\tclass\tseed\n");
    for e in entries {
        text.push_str(&format!("{}\t{}\t{}\n", e.rel_path, e.class, e.seed));
    }
    let path = out_dir.join("manifest.tsv");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Record per-file failures; returns an error when any occurred so the
/// process exits nonzero.
pub fn finish_with_failures(out_dir: &Path, failures: &[(String, String)]) -> Result<()> {
    if failures.is_empty() {
        return Ok(());
    }
    let mut text = String::new();
    for (path, reason) in failures {
        text.push_str(&format!("{path}\t{reason}\n"));
    }
    let path = out_dir.join("failures.txt");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    bail!("{} file(s) failed; see {}", failures.len(), path.display());
}

/// Build the worker pool: --jobs beats RAWPIPE_JOBS beats all cores.
pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let jobs = match jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => Some(n),
        None => match std::env::var("RAWPIPE_JOBS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .context("RAWPIPE_JOBS must be an integer")?,
            ),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    builder.build().context("building worker pool")
}
