//! `rawpipe stats`: pooled per-channel distribution report for a corpus.

use crate::corpus;
use anyhow::{bail, Context, Result};
use rawpipe_core::io::{self, LoadedImage};
use rawpipe_core::stats::MomentAccumulator;
use std::fmt::Write as _;
use std::path::Path;

struct ChannelAccumulator {
    label: &'static str,
    histogram: Vec<u64>,
    moments: MomentAccumulator,
}

impl ChannelAccumulator {
    fn new(label: &'static str, bins: usize) -> Self {
        Self {
            label,
            histogram: vec![0; bins],
            moments: MomentAccumulator::new(),
        }
    }

    fn push(&mut self, v: f64, scale: f64) {
        let bins = self.histogram.len();
        let idx = ((v * scale) as usize).min(bins - 1);
        self.histogram[idx] += 1;
        self.moments.push(v);
    }
}

enum CorpusKind {
    Rgb,
    Bayer { range_max: f64 },
}

pub fn run(
    input: &Path,
    out: &Path,
    bins: usize,
    hist_dir: Option<&Path>,
    seed: u64,
    sample: Option<usize>,
) -> Result<()> {
    if bins < 2 {
        bail!("--bins must be at least 2");
    }
    let mut entries = corpus::walk_corpus(input, seed)?;
    if let Some(k) = sample {
        entries = corpus::sample_per_class(entries, k, seed);
    }

    let mut kind: Option<CorpusKind> = None;
    let mut channels: Vec<ChannelAccumulator> = Vec::new();
    let mut failures = Vec::new();
    for entry in &entries {
        let result = (|| -> Result<()> {
            match io::load_image(&entry.abs_path)? {
                LoadedImage::Rgb(img) => {
                    match kind {
                        None => {
                            kind = Some(CorpusKind::Rgb);
                            channels = ["R", "G", "B"]
                                .iter()
                                .map(|l| ChannelAccumulator::new(l, bins))
                                .collect();
                        }
                        Some(CorpusKind::Rgb) => {}
                        Some(CorpusKind::Bayer { .. }) => bail!("RGB image in a Bayer corpus"),
                    }
                    for (c, acc) in channels.iter_mut().enumerate() {
                        for &v in img.plane(c) {
                            acc.push(v, bins as f64);
                        }
                    }
                }
                LoadedImage::Bayer(img) => {
                    let ceiling = img.hdr_ceiling();
                    match &kind {
                        None => {
                            kind = Some(CorpusKind::Bayer { range_max: ceiling });
                            channels = ["R", "Gr", "Gb", "B"]
                                .iter()
                                .map(|l| ChannelAccumulator::new(l, bins))
                                .collect();
                        }
                        Some(CorpusKind::Bayer { range_max }) if *range_max == ceiling => {}
                        Some(CorpusKind::Bayer { range_max }) => bail!(
                            "HDR ceiling {ceiling} differs from the corpus ceiling {range_max}"
                        ),
                        Some(CorpusKind::Rgb) => bail!("Bayer image in an RGB corpus"),
                    }
                    let scale = bins as f64 / ceiling;
                    let w = img.width();
                    for (i, &v) in img.data().iter().enumerate() {
                        let c = img.color_at(i % w, i / w).plane_index();
                        channels[c].push(v, scale);
                    }
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            failures.push((entry.rel_path.clone(), format!("{e:#}")));
        }
    }
    if channels.is_empty() {
        bail!("no readable images in the corpus");
    }

    let mut csv = String::from("channel,mean,variance,skew,kurtosis,samples\n");
    for ch in &channels {
        let m = ch.moments.finish();
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
            "{},{},{},{skew},{kurtosis},{}",
            ch.label, m.mean, m.variance, m.n
        );
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;

    if let Some(dir) = hist_dir {
        std::fs::create_dir_all(dir)?;
        let range_max = match &kind {
            Some(CorpusKind::Bayer { range_max }) => *range_max,
            _ => 1.0,
        };
        for ch in &channels {
            let mut text = String::from("bin_center,count\n");
            for (i, &count) in ch.histogram.iter().enumerate() {
                let center = (i as f64 + 0.5) / bins as f64 * range_max;
                let _ = writeln!(text, "{center},{count}");
            }
            std::fs::write(dir.join(format!("{}.csv", ch.label)), text)?;
        }
    }
    println!(
        "stats: {} channel(s) over {} image(s) -> {}",
        channels.len(),
        entries.len() - failures.len(),
        out.display()
    );
    let out_dir = out.parent().unwrap_or(Path::new("."));
    corpus::finish_with_failures(out_dir, &failures)
}
