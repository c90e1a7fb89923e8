//! Flat `key=value` configuration files.
//!
//! One vocabulary serves sensor profiles, ISP stage selections and capture
//! settings; a file may carry any subset. Unknown keys are errors and
//! duplicate keys are errors.

use crate::capture::CaptureConfig;
use crate::error::{Error, Result};
use crate::image::BayerPhase;
use crate::isp::{DenoiseParams, IspConfig, IspStages, ToneMapParams};
use crate::profile::{Mat3, SensorProfile};
use std::collections::BTreeMap;
use std::path::Path;

const VALID_KEYS: &[&str] = &[
    "denoise",
    "denoise.radius",
    "denoise.spatial_sigma",
    "denoise.range_sigma",
    "black_level",
    "white_balance",
    "tone_map",
    "tone_map.tiles_x",
    "tone_map.tiles_y",
    "tone_map.clip_limit",
    "tone_map.bins",
    "demosaic",
    "color_correct",
    "gamma",
    "profile.id",
    "profile.black_level",
    "profile.bit_depth",
    "profile.phase",
    "profile.wb_gains",
    "profile.ccm",
    "profile.shot_noise_gain",
    "profile.read_noise_sigma",
    "profile.exposure_ratios",
    "capture.hdr",
    "capture.noise",
    "capture.hdr_strength",
    "capture.hdr_curve_power",
    "capture.hdr_grid_x",
    "capture.hdr_grid_y",
    "capture.seed",
];

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    map: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !VALID_KEYS.contains(&key) {
                return Err(Error::InvalidConfig(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Layer `overlay` on top of `self`; overlay values win.
    pub fn merged_with(mut self, overlay: &ConfigFile) -> Self {
        for (k, v) in &overlay.map {
            self.map.insert(k.clone(), v.clone());
        }
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("on" | "true" | "1") => Ok(true),
            Some("off" | "false" | "0") => Ok(false),
            Some(other) => Err(Error::InvalidConfig(format!(
                "{key}: expected on/off, got {other:?}"
            ))),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::InvalidConfig(format!("{key}: {e}"))),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some("inf") => Ok(f64::INFINITY),
            Some(s) => s
                .parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("{key}: {e}"))),
        }
    }

    fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|e| Error::InvalidConfig(format!("{key}: {e}"))),
        }
    }

    pub fn has_profile(&self) -> bool {
        self.map.keys().any(|k| k.starts_with("profile."))
    }

    /// Build the sensor profile from `profile.*` keys.
    pub fn build_profile(&self) -> Result<SensorProfile> {
        let require = |key: &str| {
            self.get(key)
                .ok_or_else(|| Error::InvalidConfig(format!("missing required key {key}")))
        };
        let black_level: f64 = require("profile.black_level")?
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("profile.black_level: {e}")))?;
        let bit_depth: u32 = require("profile.bit_depth")?
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("profile.bit_depth: {e}")))?;
        let phase: BayerPhase = require("profile.phase")?.parse()?;
        let gains = self
            .float_list("profile.wb_gains")?
            .ok_or_else(|| Error::InvalidConfig("missing required key profile.wb_gains".into()))?;
        if gains.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "profile.wb_gains: expected 3 values, got {}",
                gains.len()
            )));
        }
        let ccm_flat = self
            .float_list("profile.ccm")?
            .ok_or_else(|| Error::InvalidConfig("missing required key profile.ccm".into()))?;
        if ccm_flat.len() != 9 {
            return Err(Error::InvalidConfig(format!(
                "profile.ccm: expected 9 values, got {}",
                ccm_flat.len()
            )));
        }
        let ccm: Mat3 = [
            [ccm_flat[0], ccm_flat[1], ccm_flat[2]],
            [ccm_flat[3], ccm_flat[4], ccm_flat[5]],
            [ccm_flat[6], ccm_flat[7], ccm_flat[8]],
        ];
        SensorProfile::new(
            self.get("profile.id").unwrap_or("unnamed").to_string(),
            black_level,
            [gains[0], gains[1], gains[2]],
            ccm,
            self.float_or("profile.shot_noise_gain", 0.0)?,
            self.float_or("profile.read_noise_sigma", 0.0)?,
            bit_depth,
            self.float_list("profile.exposure_ratios")?
                .unwrap_or_else(|| vec![1.0, 4.0, 16.0]),
            phase,
        )
    }

    /// Stage selection from the flag keys.
    pub fn build_isp_stages(&self) -> Result<IspStages> {
        let mut stages = IspStages::default();
        if self.flag("denoise")? {
            let d = DenoiseParams::default();
            stages.denoise = Some(DenoiseParams {
                radius: self.number("denoise.radius")?.unwrap_or(d.radius),
                spatial_sigma: self.float_or("denoise.spatial_sigma", d.spatial_sigma)?,
                range_sigma: self.float_or("denoise.range_sigma", d.range_sigma)?,
            });
        }
        stages.black_level = self.flag("black_level")?;
        stages.white_balance = self.flag("white_balance")?;
        if self.flag("tone_map")? {
            let t = ToneMapParams::default();
            stages.tone_map = Some(ToneMapParams {
                tiles_x: self.number("tone_map.tiles_x")?.unwrap_or(t.tiles_x),
                tiles_y: self.number("tone_map.tiles_y")?.unwrap_or(t.tiles_y),
                clip_limit: self.float_or("tone_map.clip_limit", t.clip_limit)?,
                bins: self.number("tone_map.bins")?.unwrap_or(t.bins),
            });
        }
        stages.demosaic = self.flag("demosaic")?;
        stages.color_correct = self.flag("color_correct")?;
        stages.gamma = self.flag("gamma")?;
        Ok(stages)
    }

    /// Validated ISP configuration; the profile comes from this file unless
    /// an explicit one is supplied.
    pub fn build_isp_config(&self, profile: Option<SensorProfile>) -> Result<IspConfig> {
        let profile = match profile {
            Some(p) => p,
            None if self.has_profile() => self.build_profile()?,
            None => {
                return Err(Error::InvalidConfig(
                    "no sensor profile: pass a profile file or add profile.* keys".into(),
                ))
            }
        };
        IspConfig::new(self.build_isp_stages()?, profile)
    }

    /// Capture configuration from `capture.*` keys.
    pub fn build_capture_config(&self, profile: Option<SensorProfile>) -> Result<CaptureConfig> {
        let profile = match profile {
            Some(p) => p,
            None if self.has_profile() => self.build_profile()?,
            None => {
                return Err(Error::InvalidConfig(
                    "no sensor profile: pass a profile file or add profile.* keys".into(),
                ))
            }
        };
        let mut config = CaptureConfig::new(profile);
        if self.get("capture.hdr").is_some() {
            config.hdr = self.flag("capture.hdr")?;
        }
        if self.get("capture.noise").is_some() {
            config.noise = self.flag("capture.noise")?;
        }
        config.hdr_strength = self.float_or("capture.hdr_strength", config.hdr_strength)?;
        config.hdr_curve_power =
            self.float_or("capture.hdr_curve_power", config.hdr_curve_power)?;
        config.hdr_grid = (
            self.number("capture.hdr_grid_x")?
                .unwrap_or(config.hdr_grid.0),
            self.number("capture.hdr_grid_y")?
                .unwrap_or(config.hdr_grid.1),
        );
        if let Some(seed) = self.number::<u64>("capture.seed")? {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROFILE: &str = "\
profile.id = sensor-a
profile.black_level = 0.062
profile.bit_depth = 12
profile.phase = RGGB
profile.wb_gains = 2.0, 1.0, 1.7
profile.ccm = 1.7, -0.5, -0.2, -0.25, 1.45, -0.2, -0.05, -0.55, 1.6
profile.shot_noise_gain = 0.0004
profile.read_noise_sigma = 0.001
profile.exposure_ratios = 1, 4, 16
";

    #[test]
    fn profile_roundtrip() {
        let cfg = ConfigFile::parse(PROFILE).unwrap();
        let p = cfg.build_profile().unwrap();
        assert_eq!(p.id, "sensor-a");
        assert_eq!(p.bit_depth, 12);
        assert_eq!(p.wb_gains, [2.0, 1.0, 1.7]);
        assert_eq!(p.exposure_ratios, vec![1.0, 4.0, 16.0]);
        assert_eq!(p.phase, BayerPhase::Rggb);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ConfigFile::parse("sharpen = on\n").is_err());
        assert!(ConfigFile::parse("denoise = on\ndenoise = off\n").is_err());
    }

    #[test]
    fn stage_flags_parse_with_parameters() {
        let text = "denoise = on\ndenoise.radius = 7\nblack_level = on\nwhite_balance = on\n\
                    tone_map = on\ntone_map.clip_limit = inf\ndemosaic = on\n";
        let cfg = ConfigFile::parse(text).unwrap();
        let stages = cfg.build_isp_stages().unwrap();
        assert_eq!(stages.denoise.unwrap().radius, 7);
        assert!(stages.tone_map.unwrap().clip_limit.is_infinite());
        assert!(stages.demosaic);
        assert!(!stages.gamma);
    }

    #[test]
    fn isp_config_needs_a_profile() {
        let cfg = ConfigFile::parse("black_level = on\n").unwrap();
        assert!(cfg.build_isp_config(None).is_err());
        let merged = ConfigFile::parse(PROFILE)
            .unwrap()
            .merged_with(&ConfigFile::parse("black_level = on\ntone_map = on\n").unwrap());
        assert!(merged.build_isp_config(None).is_ok());
    }

    #[test]
    fn invalid_stage_combination_rejected_at_build() {
        let text = format!("{PROFILE}tone_map = on\n");
        let cfg = ConfigFile::parse(&text).unwrap();
        assert!(cfg.build_isp_config(None).is_err());
    }

    #[test]
    fn capture_defaults_and_overrides() {
        let cfg = ConfigFile::parse(PROFILE).unwrap();
        let capture = cfg.build_capture_config(None).unwrap();
        assert!(capture.hdr);
        assert!(capture.noise);
        assert_eq!(capture.hdr_strength, 1.5);
        let text = format!(
            "{PROFILE}capture.hdr = off\ncapture.noise = off\ncapture.seed = 99\n\
             capture.hdr_strength = 2.5\n"
        );
        let cfg = ConfigFile::parse(&text).unwrap();
        let capture = cfg.build_capture_config(None).unwrap();
        assert!(!capture.hdr);
        assert!(!capture.noise);
        assert_eq!(capture.seed, 99);
        assert_eq!(capture.hdr_strength, 2.5);
    }
}
