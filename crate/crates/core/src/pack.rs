//! Mosaic-to-tensor packing: the three input representations for feeding
//! CNNs raw data, plus a minimal binary tensor container.

use crate::error::{Error, Result};
use crate::image::{BayerImage, BayerPhase, ImageMeta};
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Single plane, shape (H, W, 1).
    R1,
    /// Three channels with zeros at missing colors, shape (H, W, 3).
    R2,
    /// Four channels per quad (R, Gr, Gb, B), shape (H/2, W/2, 4).
    R3,
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "r1" | "R1" => Ok(Representation::R1),
            "2" | "r2" | "R2" => Ok(Representation::R2),
            "3" | "r3" | "R3" => Ok(Representation::R3),
            other => Err(Error::InvalidConfig(format!(
                "unknown representation {other:?}, expected 1, 2 or 3"
            ))),
        }
    }
}

/// Row-major (H, W, C) tensor of real values.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
    pub representation: Representation,
}

impl PackedTensor {
    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Keep pixels on a single plane.
pub fn pack_r1(img: &BayerImage) -> PackedTensor {
    PackedTensor {
        height: img.height(),
        width: img.width(),
        channels: 1,
        data: img.data().to_vec(),
        representation: Representation::R1,
    }
}

/// Stretch pixels to 3 channels by color, zeros elsewhere.
pub fn pack_r2(img: &BayerImage) -> PackedTensor {
    let (w, h) = (img.width(), img.height());
    let mut data = vec![0.0; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            let c = img.color_at(x, y).rgb_channel();
            data[(y * w + x) * 3 + c] = img.get(x, y);
        }
    }
    PackedTensor {
        height: h,
        width: w,
        channels: 3,
        data,
        representation: Representation::R2,
    }
}

/// Collapse each 2x2 quad to one site with 4 channels in fixed order
/// (R, Gr, Gb, B), regardless of the mosaic phase.
pub fn pack_r3(img: &BayerImage) -> PackedTensor {
    let (w, h) = (img.width(), img.height());
    let (qw, qh) = (w / 2, h / 2);
    let mut data = vec![0.0; qw * qh * 4];
    for qy in 0..qh {
        for qx in 0..qw {
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (x, y) = (2 * qx + dx, 2 * qy + dy);
                let c = img.color_at(x, y).plane_index();
                data[(qy * qw + qx) * 4 + c] = img.get(x, y);
            }
        }
    }
    PackedTensor {
        height: qh,
        width: qw,
        channels: 4,
        data,
        representation: Representation::R3,
    }
}

/// Exact inverse of [`pack_r3`].
pub fn unpack_r3(t: &PackedTensor, phase: BayerPhase) -> Result<BayerImage> {
    if t.representation != Representation::R3 || t.channels != 4 {
        return Err(Error::InvalidImage(format!(
            "unpack_r3 expects an R3 tensor, got {:?} with {} channels",
            t.representation, t.channels
        )));
    }
    let (w, h) = (t.width * 2, t.height * 2);
    let mut data = vec![0.0; w * h];
    for qy in 0..t.height {
        for qx in 0..t.width {
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (x, y) = (2 * qx + dx, 2 * qy + dy);
                let c = phase.color_at(x, y).plane_index();
                data[y * w + x] = t.get(qy, qx, c);
            }
        }
    }
    BayerImage::new(w, h, phase, data, ImageMeta::default())
}

pub fn pack(img: &BayerImage, repr: Representation) -> PackedTensor {
    match repr {
        Representation::R1 => pack_r1(img),
        Representation::R2 => pack_r2(img),
        Representation::R3 => pack_r3(img),
    }
}

const MAGIC: &[u8; 4] = b"RPT1";

/// Serialize as a flat little-endian f32 stream behind a 16-byte header
/// (magic, H, W, C).
pub fn write_tensor(t: &PackedTensor, path: &Path) -> Result<()> {
    let err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(err)?;
    let mut out = std::io::BufWriter::new(file);
    let mut run = || -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(t.height as u32).to_le_bytes())?;
        out.write_all(&(t.width as u32).to_le_bytes())?;
        out.write_all(&(t.channels as u32).to_le_bytes())?;
        for &v in &t.data {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        out.flush()
    };
    run().map_err(err)
}

pub fn read_tensor(path: &Path) -> Result<PackedTensor> {
    let err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufReader::new(std::fs::File::open(path).map_err(err)?);
    let mut header = [0u8; 16];
    file.read_exact(&mut header).map_err(err)?;
    if &header[0..4] != MAGIC {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "bad tensor magic".into(),
        });
    }
    let h = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let c = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let mut raw = Vec::new();
    file.read_to_end(&mut raw).map_err(err)?;
    if raw.len() != h * w * c * 4 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!(
                "tensor payload {} bytes, expected {}",
                raw.len(),
                h * w * c * 4
            ),
        });
    }
    let data: Vec<f64> = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let representation = match c {
        1 => Representation::R1,
        3 => Representation::R2,
        4 => Representation::R3,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("unexpected channel count {other}"),
            })
        }
    };
    Ok(PackedTensor {
        height: h,
        width: w,
        channels: c,
        data,
        representation,
    })
}
