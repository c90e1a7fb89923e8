//! Raw imaging pipeline toolkit.
//!
//! A configurable multi-stage ISP (raw Bayer to RGB), its inverse "capture
//! model" (standard RGB to simulated raw HDR sensor data with realistic
//! statistics), pixel-distribution analytics, mosaic-to-tensor packing, and
//! a hardware cost model for ISP-versus-CNN trade-off studies.

pub mod capture;
pub mod config;
pub mod cost;
mod error;
pub mod image;
pub mod io;
pub mod isp;
pub mod pack;
pub mod profile;
pub mod rng;
pub mod srgb;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use image::{BayerImage, BayerPhase, CfaColor, ImageMeta, RgbEncoding, RgbImage};
pub use profile::SensorProfile;
