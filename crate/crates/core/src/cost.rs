//! Hardware cost accounting: arithmetic operations and DRAM traffic per
//! inference for ISP configurations and CNN layer stacks.
//!
//! Operations are multiplies, adds and simple transcendentals; a
//! multiply-accumulate counts as two. The per-stage ISP formulas model
//! production-grade implementations of each block (not the simplified
//! reference code in this crate) and every formula is emitted with the
//! report so the numbers can be recomputed by hand.

use crate::error::{Error, Result};
use crate::isp::IspConfig;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Bytes per pixel for the three working representations: 16-bit Bayer,
/// 3x16-bit linear RGB, 3x8-bit sRGB output.
pub const BYTES_BAYER: u64 = 2;
pub const BYTES_RGB_LINEAR: u64 = 6;
pub const BYTES_SRGB: u64 = 3;

/// Bilateral tap cost: range delta, square, sigma scale, exp, value MAC
/// (2), weight add.
const DENOISE_OPS_PER_TAP: f64 = 7.0;
/// Per-pass overhead: normalization divide and reciprocal.
const DENOISE_OPS_PER_PASS: f64 = 2.0;

/// Production directional demosaic, modeled after adaptive
/// homogeneity-directed implementations:
///   directional green+chroma interpolation, both orientations   32
///   perceptual-space conversion of both candidates              60
///   homogeneity neighborhood scoring                            48
///   direction selection and blend                                8
///   3 iterations of chroma-difference median refinement        192
///   final assembly and clipping                                 12
const DEMOSAIC_OPS_PER_PIXEL: f64 = 352.0;

/// Subtract, clamp, rescale.
const BLACK_LEVEL_OPS_PER_PIXEL: f64 = 3.0;
/// Gain multiply, clamp.
const WHITE_BALANCE_OPS_PER_PIXEL: f64 = 2.0;
/// 9 MACs per RGB pixel.
const COLOR_CORRECT_OPS_PER_PIXEL: f64 = 18.0;
/// One transcendental plus two ops per channel.
const GAMMA_OPS_PER_PIXEL: f64 = 9.0;

/// Cost of one enabled stage at a given resolution.
#[derive(Clone, Debug)]
pub struct StageCost {
    pub name: &'static str,
    pub ops_per_pixel: f64,
    pub bytes_read_per_pixel: u64,
    pub bytes_written_per_pixel: u64,
    pub formula: &'static str,
}

/// Per-stage costs for the enabled stages of a configuration.
pub fn stage_costs(config: &IspConfig, width: usize, height: usize) -> Vec<StageCost> {
    let px = (width * height) as f64;
    let stages = config.stages();
    let mut out = Vec::new();
    if let Some(p) = &stages.denoise {
        let taps = (2 * p.radius + 1) as f64;
        out.push(StageCost {
            name: "denoise",
            ops_per_pixel: 2.0 * (taps * DENOISE_OPS_PER_TAP + DENOISE_OPS_PER_PASS),
            bytes_read_per_pixel: BYTES_BAYER,
            bytes_written_per_pixel: BYTES_BAYER,
            formula: "2 passes * ((2*radius+1) taps * 7 + 2) per pixel",
        });
    }
    if stages.black_level {
        out.push(StageCost {
            name: "black_level",
            ops_per_pixel: BLACK_LEVEL_OPS_PER_PIXEL,
            bytes_read_per_pixel: BYTES_BAYER,
            bytes_written_per_pixel: BYTES_BAYER,
            formula: "3 per pixel (subtract, clamp, rescale)",
        });
    }
    if stages.white_balance {
        out.push(StageCost {
            name: "white_balance",
            ops_per_pixel: WHITE_BALANCE_OPS_PER_PIXEL,
            bytes_read_per_pixel: BYTES_BAYER,
            bytes_written_per_pixel: BYTES_BAYER,
            formula: "2 per pixel (gain multiply, clamp)",
        });
    }
    if let Some(p) = &stages.tone_map {
        let tile_ops = 2.0 * (p.tiles_x * p.tiles_y * p.bins) as f64;
        out.push(StageCost {
            name: "tone_map",
            ops_per_pixel: 1.0 + 8.0 / 4.0 + tile_ops / px,
            bytes_read_per_pixel: BYTES_BAYER,
            bytes_written_per_pixel: BYTES_BAYER,
            formula: "1 per pixel histogram + 8 per quad LUT + 2 per tile bin CDF",
        });
    }
    if stages.demosaic {
        out.push(StageCost {
            name: "demosaic",
            ops_per_pixel: DEMOSAIC_OPS_PER_PIXEL,
            bytes_read_per_pixel: BYTES_BAYER,
            bytes_written_per_pixel: BYTES_RGB_LINEAR,
            formula: "352 per pixel (directional interpolation, homogeneity scoring, \
                      3 refinement iterations)",
        });
    }
    if stages.color_correct {
        out.push(StageCost {
            name: "color_correct",
            ops_per_pixel: COLOR_CORRECT_OPS_PER_PIXEL,
            bytes_read_per_pixel: BYTES_RGB_LINEAR,
            bytes_written_per_pixel: BYTES_RGB_LINEAR,
            formula: "18 per pixel (9 MACs)",
        });
    }
    if stages.gamma {
        out.push(StageCost {
            name: "gamma",
            ops_per_pixel: GAMMA_OPS_PER_PIXEL,
            bytes_read_per_pixel: BYTES_RGB_LINEAR,
            bytes_written_per_pixel: BYTES_SRGB,
            formula: "9 per pixel (1 transcendental + 2 ops per channel)",
        });
    }
    out
}

#[derive(Clone, Debug)]
pub struct IspCost {
    pub total_ops: u64,
    pub total_bytes: u64,
    pub stages: Vec<StageCost>,
}

/// Total arithmetic and memory traffic for one frame.
///
/// The default memory model is the worst case: every enabled stage reads its
/// input from and writes its output to external memory. `fused` instead
/// charges one input read and one final write (a streaming pipeline).
/// An empty configuration costs no ops, but the image is still read once by
/// whatever consumes it.
pub fn isp_cost(config: &IspConfig, width: usize, height: usize, fused: bool) -> IspCost {
    let px = (width * height) as u64;
    let stages = stage_costs(config, width, height);
    let total_ops: f64 = stages.iter().map(|s| s.ops_per_pixel * px as f64).sum();
    let total_bytes = if stages.is_empty() {
        px * BYTES_BAYER
    } else if fused {
        px * (stages[0].bytes_read_per_pixel + stages.last().unwrap().bytes_written_per_pixel)
    } else {
        px * stages
            .iter()
            .map(|s| s.bytes_read_per_pixel + s.bytes_written_per_pixel)
            .sum::<u64>()
    };
    IspCost {
        total_ops: total_ops.round() as u64,
        total_bytes,
        stages,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    DepthwiseConv,
    Dense,
    Pool,
}

/// One CNN layer: input geometry, kernel, stride and output channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub h: usize,
    pub w: usize,
    pub c_in: usize,
    pub k: usize,
    pub stride: usize,
    pub c_out: usize,
}

impl LayerSpec {
    /// Output spatial dims: same-padding for convolutions, valid for pools.
    pub fn output_dims(&self) -> (usize, usize, usize) {
        match self.kind {
            LayerKind::Conv | LayerKind::DepthwiseConv => (
                self.h.div_ceil(self.stride),
                self.w.div_ceil(self.stride),
                self.c_out,
            ),
            LayerKind::Pool => (
                (self.h - self.k) / self.stride + 1,
                (self.w - self.k) / self.stride + 1,
                self.c_out,
            ),
            LayerKind::Dense => (1, 1, self.c_out),
        }
    }

    /// Operation count, MAC = 2 ops, pooling 1 op per element touched.
    pub fn ops(&self) -> u64 {
        let (ho, wo, _) = self.output_dims();
        let (ho, wo) = (ho as u64, wo as u64);
        let (c_in, c_out, k) = (self.c_in as u64, self.c_out as u64, self.k as u64);
        match self.kind {
            LayerKind::Conv => 2 * ho * wo * c_out * c_in * k * k,
            LayerKind::DepthwiseConv => 2 * ho * wo * c_in * k * k,
            LayerKind::Dense => 2 * c_in * c_out,
            LayerKind::Pool => ho * wo * c_in * k * k,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h == 0
            || self.w == 0
            || self.c_in == 0
            || self.c_out == 0
            || self.k == 0
            || self.stride == 0
        {
            return Err(Error::InvalidConfig(format!("degenerate layer {self:?}")));
        }
        if self.kind == LayerKind::DepthwiseConv && self.c_in != self.c_out {
            return Err(Error::InvalidConfig(format!(
                "depthwise layer must keep its channel count, got {} -> {}",
                self.c_in, self.c_out
            )));
        }
        Ok(())
    }
}

/// Total ops of a chained layer stack; shapes must be consistent.
pub fn cnn_cost(layers: &[LayerSpec]) -> Result<u64> {
    if layers.is_empty() {
        return Err(Error::InvalidConfig("empty layer list".into()));
    }
    let mut total = 0u64;
    let mut prev_out: Option<(usize, usize, usize)> = None;
    for (i, layer) in layers.iter().enumerate() {
        layer.validate()?;
        if let Some((h, w, c)) = prev_out {
            if layer.kind == LayerKind::Dense {
                if layer.c_in != h * w * c {
                    return Err(Error::InvalidConfig(format!(
                        "layer {i}: dense input {} != flattened {h}x{w}x{c}",
                        layer.c_in
                    )));
                }
            } else if (layer.h, layer.w, layer.c_in) != (h, w, c) {
                return Err(Error::InvalidConfig(format!(
                    "layer {i}: input {}x{}x{} does not chain from previous output {h}x{w}x{c}",
                    layer.h, layer.w, layer.c_in
                )));
            }
        }
        total += layer.ops();
        prev_out = Some(layer.output_dims());
    }
    Ok(total)
}

/// Parse a flat layer table: one layer per line,
/// `kind h w c_in k stride c_out`, `#` comments.
pub fn parse_layer_file(path: &Path) -> Result<Vec<LayerSpec>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_layers(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

pub fn parse_layers(text: &str) -> std::result::Result<Vec<LayerSpec>, String> {
    let mut layers = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 7 {
            return Err(format!(
                "line {}: expected 7 fields (kind h w c_in k stride c_out)",
                lineno + 1
            ));
        }
        let kind = match fields[0] {
            "conv" => LayerKind::Conv,
            "depthwise-conv" | "dw" => LayerKind::DepthwiseConv,
            "dense" | "fc" => LayerKind::Dense,
            "pool" => LayerKind::Pool,
            other => return Err(format!("line {}: unknown kind {other:?}", lineno + 1)),
        };
        let nums: Vec<usize> = fields[1..]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        layers.push(LayerSpec {
            kind,
            h: nums[0],
            w: nums[1],
            c_in: nums[2],
            k: nums[3],
            stride: nums[4],
            c_out: nums[5],
        });
    }
    Ok(layers)
}

/// Cross product of ISP configs and CNN models as a CSV trade-off report.
///
/// The first lines carry the cost formulas so every number in the table can
/// be recomputed independently.
pub fn tradeoff_report(
    configs: &[(String, IspConfig)],
    models: &[(String, Vec<LayerSpec>)],
    accuracies: Option<&HashMap<(String, String), f64>>,
    width: usize,
    height: usize,
    fused: bool,
) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# isp formulas: {}", formula_summary());
    let _ = writeln!(
        out,
        "# cnn formulas: conv=2*Ho*Wo*Cout*Cin*k^2; depthwise=2*Ho*Wo*Cin*k^2; \
         dense=2*Cin*Cout; pool=1 op/element"
    );
    let _ = writeln!(
        out,
        "# memory model: {} (bytes/pixel: bayer={BYTES_BAYER}, linear rgb={BYTES_RGB_LINEAR}, srgb={BYTES_SRGB})",
        if fused {
            "fused streaming (input read + final write)"
        } else {
            "worst case (every stage round-trips DRAM)"
        }
    );
    let _ = writeln!(
        out,
        "config,model,isp_ops,cnn_ops,ops_ratio,isp_bytes,accuracy"
    );
    for (config_name, config) in configs {
        let isp = isp_cost(config, width, height, fused);
        for (model_name, layers) in models {
            let cnn_ops = cnn_cost(layers)?;
            let ratio = isp.total_ops as f64 / cnn_ops as f64;
            let accuracy = accuracies
                .and_then(|m| m.get(&(config_name.clone(), model_name.clone())))
                .map(|a| format!("{a}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{config_name},{model_name},{},{cnn_ops},{ratio:.6},{},{accuracy}",
                isp.total_ops, isp.total_bytes
            );
        }
    }
    Ok(out)
}

pub fn formula_summary() -> &'static str {
    "denoise=2*((2r+1)*7+2)/px; black_level=3/px; white_balance=2/px; \
     tone_map=1/px+8/quad+2*tiles*bins; demosaic=352/px; color_correct=18/px; gamma=9/px"
}
