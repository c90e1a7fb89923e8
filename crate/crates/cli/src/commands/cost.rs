//! `rawpipe cost`: trade-off report across ISP configs and CNN models.

use anyhow::{bail, Context, Result};
use rawpipe_core::config::ConfigFile;
use rawpipe_core::cost::{parse_layer_file, tradeoff_report, LayerSpec};
use rawpipe_core::isp::IspConfig;
use rawpipe_core::SensorProfile;
use std::collections::HashMap;
use std::path::Path;
use std::path::PathBuf;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config_paths: &[PathBuf],
    model_paths: &[PathBuf],
    out: &Path,
    profile: Option<SensorProfile>,
    width: usize,
    height: usize,
    accuracies: Option<&Path>,
    fused: bool,
) -> Result<()> {
    if config_paths.is_empty() {
        bail!("cost needs at least one --config");
    }
    if model_paths.is_empty() {
        bail!("cost needs at least one --model");
    }
    let mut configs: Vec<(String, IspConfig)> = Vec::new();
    for path in config_paths {
        let file = ConfigFile::from_path(path)?;
        let config = file
            .build_isp_config(profile.clone())
            .with_context(|| format!("building ISP config from {}", path.display()))?;
        configs.push((stem(path), config));
    }
    let mut models: Vec<(String, Vec<LayerSpec>)> = Vec::new();
    for path in model_paths {
        models.push((stem(path), parse_layer_file(path)?));
    }
    let accuracy_map = match accuracies {
        Some(path) => Some(parse_accuracies(path)?),
        None => None,
    };
    let report = tradeoff_report(
        &configs,
        &models,
        accuracy_map.as_ref(),
        width,
        height,
        fused,
    )?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, &report).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "cost: {} config(s) x {} model(s) -> {}",
        configs.len(),
        models.len(),
        out.display()
    );
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string())
}

/// Accuracy table: `config,model,accuracy` rows, optional header.
fn parse_accuracies(path: &Path) -> Result<HashMap<(String, String), f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.eq_ignore_ascii_case("config,model,accuracy") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            bail!(
                "{} line {}: expected config,model,accuracy",
                path.display(),
                lineno + 1
            );
        }
        let value: f64 = fields[2].parse().with_context(|| {
            format!("{} line {}: bad accuracy value", path.display(), lineno + 1)
        })?;
        map.insert((fields[0].to_string(), fields[1].to_string()), value);
    }
    Ok(map)
}
