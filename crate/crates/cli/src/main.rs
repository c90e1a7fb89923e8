//! rawpipe: batch front end for the raw imaging pipeline toolkit.
//!
//! Subcommands transform whole corpora deterministically: `capture`
//! synthesizes raw HDR datasets from RGB images, `isp` develops raw corpora
//! with any stage selection, `stats` and `sweep` report pixel-distribution
//! analytics, `pack` emits CNN input tensors, and `cost` produces the
//! ISP-versus-CNN trade-off table.

mod commands;
mod corpus;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rawpipe_core::config::ConfigFile;
use rawpipe_core::SensorProfile;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "rawpipe", version, about = "Raw imaging pipeline toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (flat key=value). Repeatable for `cost`.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,

    /// Sensor profile file; may also be embedded in --config as profile.* keys.
    #[arg(long, global = true)]
    profile: Option<PathBuf>,

    /// Global seed; per-image seeds are derived from it and the image path.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: RAWPIPE_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Process only K seeded-sampled images per class.
    #[arg(long, global = true)]
    sample: Option<usize>,

    /// Packed tensor representation for `pack`.
    #[arg(long, global = true, default_value = "2")]
    repr: String,

    /// Report the streaming memory model instead of the worst case.
    #[arg(long, global = true)]
    fused: bool,

    /// Also emit original / colorized raw / ISP preview triptychs.
    #[arg(long, global = true)]
    debug_triptych: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate raw HDR captures from an RGB corpus.
    Capture {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Develop a raw corpus through an ISP configuration.
    Isp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-channel distribution statistics of a corpus.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        /// Also dump per-channel histograms into this directory.
        #[arg(long)]
        hist_dir: Option<PathBuf>,
    },
    /// Skew/kurtosis sweep of the power transform x^n over a corpus.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        n_min: f64,
        #[arg(long, default_value_t = 10.0)]
        n_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Also write the transformed datasets under this directory.
        #[arg(long)]
        write_datasets: Option<PathBuf>,
    },
    /// Pack a raw corpus into CNN input tensors.
    Pack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// ISP vs CNN cost trade-off report over configs x models.
    Cost {
        /// CNN layer table file. Repeatable.
        #[arg(long)]
        model: Vec<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 224)]
        width: usize,
        #[arg(long, default_value_t = 224)]
        height: usize,
        /// Optional accuracy table (config,model,accuracy CSV) to join in.
        #[arg(long)]
        accuracies: Option<PathBuf>,
    },
}

/// Load --profile if given, else fall back to profile.* keys in `config`.
fn resolve_profile(
    profile_path: &Option<PathBuf>,
    config: Option<&ConfigFile>,
) -> Result<Option<SensorProfile>> {
    if let Some(path) = profile_path {
        let file = ConfigFile::from_path(path)?;
        if !file.has_profile() {
            bail!("{} contains no profile.* keys", path.display());
        }
        return Ok(Some(file.build_profile()?));
    }
    match config {
        Some(c) if c.has_profile() => Ok(Some(c.build_profile()?)),
        _ => Ok(None),
    }
}

fn single_config(paths: &[PathBuf]) -> Result<Option<ConfigFile>> {
    match paths {
        [] => Ok(None),
        [one] => Ok(Some(ConfigFile::from_path(one)?)),
        _ => bail!("this command takes at most one --config"),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Capture { input, out } => {
            let config = single_config(&cli.config)?;
            let profile = resolve_profile(&cli.profile, config.as_ref())?
                .context("capture needs a sensor profile (--profile or profile.* keys)")?;
            commands::capture::run(
                input,
                out,
                config.as_ref(),
                profile,
                cli.seed,
                cli.jobs,
                cli.sample,
                cli.debug_triptych,
            )
        }
        Command::Isp { input, out } => {
            let config = single_config(&cli.config)?
                .context("isp needs --config with the stage selection")?;
            let profile = resolve_profile(&cli.profile, Some(&config))?
                .context("isp needs a sensor profile (--profile or profile.* keys)")?;
            commands::isp::run(input, out, &config, profile, cli.seed, cli.jobs, cli.sample)
        }
        Command::Stats {
            input,
            out,
            bins,
            hist_dir,
        } => commands::stats::run(input, out, *bins, hist_dir.as_deref(), cli.seed, cli.sample),
        Command::Sweep {
            input,
            out,
            n_min,
            n_max,
            step,
            write_datasets,
        } => commands::sweep::run(
            input,
            out,
            *n_min,
            *n_max,
            *step,
            write_datasets.as_deref(),
            cli.seed,
            cli.jobs,
            cli.sample,
        ),
        Command::Pack { input, out } => {
            let repr = cli
                .repr
                .parse()
                .map_err(|e| anyhow::anyhow!("--repr: {e}"))?;
            commands::pack::run(input, out, repr, cli.seed, cli.jobs, cli.sample)
        }
        Command::Cost {
            model,
            out,
            width,
            height,
            accuracies,
        } => {
            let profile = match &cli.profile {
                Some(path) => Some(ConfigFile::from_path(path)?.build_profile()?),
                None => None,
            };
            commands::cost::run(
                &cli.config,
                model,
                out,
                profile,
                *width,
                *height,
                accuracies.as_deref(),
                cli.fused,
            )
        }
    }
}
