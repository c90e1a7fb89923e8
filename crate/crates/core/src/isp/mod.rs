//! The ISP: seven individually togglable stages running raw Bayer -> RGB.
//!
//! Stage order is fixed: denoise, black level subtraction, white balance,
//! tone mapping, demosaic, color correction, gamma. Configurations are
//! limited to combinations with compatible data representations, enforced at
//! construction.

mod black_level;
mod color;
mod demosaic;
mod denoise;
mod tone_map;
mod white_balance;

pub use black_level::subtract_black_level;
pub use color::{color_correct, gamma_encode};
pub use demosaic::demosaic;
pub use denoise::{denoise, DenoiseParams};
pub use tone_map::{tone_map, ToneMapParams};
pub use white_balance::white_balance;

use crate::error::{Error, Result};
use crate::image::{BayerImage, RgbImage};
use crate::profile::SensorProfile;

/// Which stages run, with their parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IspStages {
    pub denoise: Option<DenoiseParams>,
    pub black_level: bool,
    pub white_balance: bool,
    pub tone_map: Option<ToneMapParams>,
    pub demosaic: bool,
    pub color_correct: bool,
    pub gamma: bool,
}

impl IspStages {
    /// Every stage enabled with default parameters.
    pub fn full() -> Self {
        Self {
            denoise: Some(DenoiseParams::default()),
            black_level: true,
            white_balance: true,
            tone_map: Some(ToneMapParams::default()),
            demosaic: true,
            color_correct: true,
            gamma: true,
        }
    }

    pub fn enabled_count(&self) -> usize {
        self.denoise.is_some() as usize
            + self.black_level as usize
            + self.white_balance as usize
            + self.tone_map.is_some() as usize
            + self.demosaic as usize
            + self.color_correct as usize
            + self.gamma as usize
    }
}

/// A validated stage selection plus the sensor calibration it runs with.
#[derive(Clone, Debug, PartialEq)]
pub struct IspConfig {
    stages: IspStages,
    profile: SensorProfile,
}

impl IspConfig {
    pub fn new(stages: IspStages, profile: SensorProfile) -> Result<Self> {
        if stages.tone_map.is_some() && !stages.black_level {
            return Err(Error::InvalidConfig(
                "tone mapping requires black level subtraction (the pedestal must not be \
                 scaled with light intensity)"
                    .into(),
            ));
        }
        if stages.white_balance && !stages.black_level {
            return Err(Error::InvalidConfig(
                "white balance requires black level subtraction".into(),
            ));
        }
        if stages.color_correct && !stages.demosaic {
            return Err(Error::InvalidConfig(
                "color correction operates on demosaiced RGB, not Bayer data".into(),
            ));
        }
        if stages.gamma && !stages.demosaic {
            return Err(Error::InvalidConfig(
                "gamma encoding operates on demosaiced RGB, not Bayer data".into(),
            ));
        }
        Ok(Self { stages, profile })
    }

    #[inline]
    pub fn stages(&self) -> &IspStages {
        &self.stages
    }

    #[inline]
    pub fn profile(&self) -> &SensorProfile {
        &self.profile
    }
}

/// Output of a pipeline run: Bayer when demosaic is disabled, RGB otherwise.
#[derive(Clone, Debug)]
pub enum IspOutput {
    Bayer(BayerImage),
    Rgb(RgbImage),
}

impl IspOutput {
    pub fn as_bayer(&self) -> Option<&BayerImage> {
        match self {
            IspOutput::Bayer(b) => Some(b),
            IspOutput::Rgb(_) => None,
        }
    }

    pub fn as_rgb(&self) -> Option<&RgbImage> {
        match self {
            IspOutput::Rgb(r) => Some(r),
            IspOutput::Bayer(_) => None,
        }
    }
}

/// Run the enabled stages in fixed order.
pub fn run_isp(img: &BayerImage, config: &IspConfig) -> Result<IspOutput> {
    let stages = &config.stages;
    let profile = &config.profile;
    let mut raw = img.clone();

    if let Some(p) = &stages.denoise {
        raw = denoise(&raw, p.spatial_sigma, p.range_sigma, p.radius)?;
    }
    if stages.black_level {
        raw = subtract_black_level(&raw, profile.black_level)?;
    }
    if stages.white_balance {
        raw = white_balance(&raw, profile.wb_gains)?;
    }
    if let Some(p) = &stages.tone_map {
        raw = tone_map(&raw, p.tiles_x, p.tiles_y, p.clip_limit, p.bins)?;
    }
    if !stages.demosaic {
        return Ok(IspOutput::Bayer(raw));
    }
    let mut rgb = demosaic(&raw)?;
    if stages.color_correct {
        rgb = color_correct(&rgb, profile.ccm())?;
    }
    if stages.gamma {
        rgb = gamma_encode(&rgb)?;
    }
    Ok(IspOutput::Rgb(rgb))
}
