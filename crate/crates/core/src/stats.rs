//! Pixel-distribution analytics: histograms, central moments, and the
//! power-transform pair used to dial distribution skew up and down.
//!
//! Conventions: population (biased) central moments; kurtosis is Pearson
//! (non-excess, normal = 3). Accumulation is single-pass with compensated
//! summation in a fixed order, so results do not depend on how work is
//! chunked, and partial accumulators merge exactly (power sums are
//! additive).

use crate::error::{Error, Result};
use crate::image::{BayerImage, CfaColor, RgbImage};

#[derive(Clone, Copy, Debug, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum - self.comp
    }
}

/// Population moments of a pixel sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    /// `m3 / m2^1.5`; `None` when the variance is zero.
    pub skew: Option<f64>,
    /// Pearson `m4 / m2^2`; `None` when the variance is zero.
    pub kurtosis: Option<f64>,
}

/// Streaming accumulator over raw power sums.
#[derive(Clone, Debug, Default)]
pub struct MomentAccumulator {
    n: u64,
    s1: KahanSum,
    s2: KahanSum,
    s3: KahanSum,
    s4: KahanSum,
    min: f64,
    max: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ..Self::default()
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let x2 = x * x;
        self.s1.add(x);
        self.s2.add(x2);
        self.s3.add(x2 * x);
        self.s4.add(x2 * x2);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Exact combination of two partial accumulations.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.n += other.n;
        self.s1.merge(&other.s1);
        self.s2.merge(&other.s2);
        self.s3.merge(&other.s3);
        self.s4.merge(&other.s4);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn finish(&self) -> Moments {
        if self.n == 0 {
            return Moments {
                n: 0,
                mean: 0.0,
                variance: 0.0,
                skew: None,
                kurtosis: None,
            };
        }
        let n = self.n as f64;
        let mean = self.s1.value() / n;
        let e2 = self.s2.value() / n;
        let e3 = self.s3.value() / n;
        let e4 = self.s4.value() / n;
        let m2 = (e2 - mean * mean).max(0.0);
        // A constant population has exactly zero variance; rounding noise in
        // the power sums must not fake a tiny spread.
        let constant = self.min == self.max;
        let variance = if constant { 0.0 } else { m2 };
        let (skew, kurtosis) = if constant || variance == 0.0 {
            (None, None)
        } else {
            let m3 = e3 - 3.0 * mean * e2 + 2.0 * mean * mean * mean;
            let m4 =
                e4 - 4.0 * mean * e3 + 6.0 * mean * mean * e2 - 3.0 * mean * mean * mean * mean;
            (
                Some(m3 / variance.powf(1.5)),
                Some(m4 / (variance * variance)),
            )
        };
        Moments {
            n: self.n,
            mean,
            variance,
            skew,
            kurtosis,
        }
    }
}

/// Moments of an explicit sample.
pub fn moments(samples: impl IntoIterator<Item = f64>) -> Moments {
    let mut acc = MomentAccumulator::new();
    for x in samples {
        acc.push(x);
    }
    acc.finish()
}

/// Per-channel histogram plus moments.
#[derive(Clone, Debug)]
pub struct DistStats {
    pub channel: String,
    pub bins: usize,
    /// Counts over `bins` uniform bins spanning [0, range_max].
    pub histogram: Vec<u64>,
    pub range_max: f64,
    pub moments: Moments,
}

impl DistStats {
    fn build(
        channel: &str,
        bins: usize,
        range_max: f64,
        values: impl Iterator<Item = f64>,
    ) -> Self {
        let mut histogram = vec![0u64; bins];
        let mut acc = MomentAccumulator::new();
        let scale = bins as f64 / range_max;
        for v in values {
            let idx = ((v * scale) as usize).min(bins - 1);
            histogram[idx] += 1;
            acc.push(v);
        }
        DistStats {
            channel: channel.to_string(),
            bins,
            histogram,
            range_max,
            moments: acc.finish(),
        }
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.bins as f64 * self.range_max
    }
}

/// Stats for the four mosaic populations R, Gr, Gb, B.
pub fn channel_histogram_bayer(img: &BayerImage, bins: usize) -> Result<Vec<DistStats>> {
    if bins < 2 {
        return Err(Error::InvalidConfig("need at least 2 bins".into()));
    }
    let range_max = img.hdr_ceiling();
    let w = img.width();
    let channels = [CfaColor::R, CfaColor::Gr, CfaColor::Gb, CfaColor::B];
    Ok(channels
        .iter()
        .map(|&color| {
            let values = img
                .data()
                .iter()
                .enumerate()
                .filter_map(move |(i, &v)| (img.color_at(i % w, i / w) == color).then_some(v));
            DistStats::build(color.label(), bins, range_max, values)
        })
        .collect())
}

/// Stats for the three planes of an RGB image.
pub fn channel_histogram_rgb(img: &RgbImage, bins: usize) -> Result<Vec<DistStats>> {
    if bins < 2 {
        return Err(Error::InvalidConfig("need at least 2 bins".into()));
    }
    let range_max = img
        .plane(0)
        .iter()
        .chain(img.plane(1))
        .chain(img.plane(2))
        .cloned()
        .fold(1.0f64, f64::max);
    Ok(["R", "G", "B"]
        .iter()
        .enumerate()
        .map(|(c, name)| DistStats::build(name, bins, range_max, img.plane(c).iter().cloned()))
        .collect())
}

fn check_unit_range(values: &[f64]) -> Result<()> {
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!(
                "power transform input {v} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// `x -> x^n` per pixel. Requires values in [0, 1] and n >= 1.
pub fn pow_transform_rgb(img: &RgbImage, n: f64) -> Result<RgbImage> {
    assert!(n >= 1.0, "exponent must be >= 1");
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        check_unit_range(img.plane(c))?;
        *plane = img.plane(c).iter().map(|&v| v.powf(n)).collect();
    }
    img.with_planes(img.encoding(), planes)
}

/// `x -> x^(1/n)` per pixel, inverse of [`pow_transform_rgb`].
pub fn pow_inverse_rgb(img: &RgbImage, n: f64) -> Result<RgbImage> {
    assert!(n >= 1.0, "exponent must be >= 1");
    let mut planes: [Vec<f64>; 3] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        check_unit_range(img.plane(c))?;
        *plane = img.plane(c).iter().map(|&v| v.powf(1.0 / n)).collect();
    }
    img.with_planes(img.encoding(), planes)
}

pub fn pow_transform_bayer(img: &BayerImage, n: f64) -> Result<BayerImage> {
    assert!(n >= 1.0, "exponent must be >= 1");
    check_unit_range(img.data())?;
    img.with_data(img.data().iter().map(|&v| v.powf(n)).collect())
}

pub fn pow_inverse_bayer(img: &BayerImage, n: f64) -> Result<BayerImage> {
    assert!(n >= 1.0, "exponent must be >= 1");
    check_unit_range(img.data())?;
    img.with_data(img.data().iter().map(|&v| v.powf(1.0 / n)).collect())
}

/// The exponent ladder `min, min+step, ..., max` (inclusive).
pub fn sweep_exponents(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && min >= 1.0 && max >= min && step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bad sweep range [{min}, {max}] step {step}"
        )));
    }
    let count = ((max - min) / step).round() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// One row of a skew sweep: moments of the n-transformed population.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: f64,
    /// "all" for the pooled population, else R/G/B.
    pub channel: String,
    pub moments: Moments,
}

/// Streaming sweep over a corpus: for every exponent, pooled and
/// per-channel moments of the transformed pixel population.
#[derive(Clone, Debug)]
pub struct SweepAccumulator {
    ns: Vec<f64>,
    pooled: Vec<MomentAccumulator>,
    per_channel: Vec<[MomentAccumulator; 3]>,
}

impl SweepAccumulator {
    pub fn new(ns: &[f64]) -> Self {
        Self {
            ns: ns.to_vec(),
            pooled: ns.iter().map(|_| MomentAccumulator::new()).collect(),
            per_channel: ns
                .iter()
                .map(|_| [(); 3].map(|_| MomentAccumulator::new()))
                .collect(),
        }
    }

    /// Accumulate one image; its stored values must lie in [0, 1].
    pub fn add_rgb(&mut self, img: &RgbImage) -> Result<()> {
        for c in 0..3 {
            check_unit_range(img.plane(c))?;
        }
        for (k, &n) in self.ns.iter().enumerate() {
            for c in 0..3 {
                for &v in img.plane(c) {
                    let t = v.powf(n);
                    self.pooled[k].push(t);
                    self.per_channel[k][c].push(t);
                }
            }
        }
        Ok(())
    }

    /// Merge a partial sweep computed over a disjoint part of the corpus.
    pub fn merge(&mut self, other: &SweepAccumulator) {
        assert_eq!(self.ns, other.ns);
        for k in 0..self.ns.len() {
            self.pooled[k].merge(&other.pooled[k]);
            for c in 0..3 {
                self.per_channel[k][c].merge(&other.per_channel[k][c]);
            }
        }
    }

    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for (k, &n) in self.ns.iter().enumerate() {
            rows.push(SweepRow {
                n,
                channel: "all".into(),
                moments: self.pooled[k].finish(),
            });
            for (c, name) in ["R", "G", "B"].iter().enumerate() {
                rows.push(SweepRow {
                    n,
                    channel: (*name).into(),
                    moments: self.per_channel[k][c].finish(),
                });
            }
        }
        rows
    }
}
