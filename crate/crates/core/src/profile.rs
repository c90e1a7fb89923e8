//! Sensor calibration bundles.

use crate::error::{Error, Result};
use crate::image::BayerPhase;

/// Row-major 3x3 matrix used for color correction / confusion.
pub type Mat3 = [[f64; 3]; 3];

pub fn mat3_mul_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat3_det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mat3_inverse(m: &Mat3) -> Option<Mat3> {
    let det = mat3_det(m);
    if !det.is_finite() || det.abs() < 1e-12 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    Some(out)
}

/// Calibration bundle for one imaging sensor.
///
/// Validated once at construction; all pipeline stages may then assume the
/// matrix is invertible, the gains positive and the exposure ladder sane.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorProfile {
    pub id: String,
    /// Normalized pedestal in [0, 1).
    pub black_level: f64,
    /// White balance gains (R, G, B), all > 0.
    pub wb_gains: [f64; 3],
    /// Color correction matrix; rows sum to 1 (gray preserving).
    ccm: Mat3,
    ccm_inverse: Mat3,
    /// Poisson scale: variance of shot noise at signal x is `gain * x`.
    pub shot_noise_gain: f64,
    /// Gaussian read noise standard deviation, normalized units.
    pub read_noise_sigma: f64,
    pub bit_depth: u32,
    /// Strictly increasing, first element 1.
    pub exposure_ratios: Vec<f64>,
    pub phase: BayerPhase,
}

impl SensorProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        black_level: f64,
        wb_gains: [f64; 3],
        ccm: Mat3,
        shot_noise_gain: f64,
        read_noise_sigma: f64,
        bit_depth: u32,
        exposure_ratios: Vec<f64>,
        phase: BayerPhase,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&black_level) {
            return Err(Error::InvalidProfile(format!(
                "black_level {black_level} outside [0, 1)"
            )));
        }
        if wb_gains.iter().any(|&g| !g.is_finite() || g <= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "wb_gains {wb_gains:?} must be strictly positive"
            )));
        }
        for (i, row) in ccm.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidProfile(format!(
                    "ccm row {i} sums to {sum}, expected 1"
                )));
            }
        }
        let ccm_inverse =
            mat3_inverse(&ccm).ok_or_else(|| Error::InvalidProfile("ccm is singular".into()))?;
        if !shot_noise_gain.is_finite()
            || shot_noise_gain < 0.0
            || !read_noise_sigma.is_finite()
            || read_noise_sigma < 0.0
        {
            return Err(Error::InvalidProfile(
                "noise parameters must be >= 0".into(),
            ));
        }
        if !(8..=20).contains(&bit_depth) {
            return Err(Error::InvalidProfile(format!(
                "bit_depth {bit_depth} outside 8..=20"
            )));
        }
        if exposure_ratios.is_empty() {
            return Err(Error::InvalidProfile("empty exposure_ratios".into()));
        }
        if exposure_ratios.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidProfile(
                "exposure_ratios must be finite".into(),
            ));
        }
        if exposure_ratios[0] != 1.0 {
            return Err(Error::InvalidProfile(format!(
                "first exposure ratio must be 1, got {}",
                exposure_ratios[0]
            )));
        }
        if exposure_ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "exposure_ratios must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            id: id.into(),
            black_level,
            wb_gains,
            ccm,
            ccm_inverse,
            shot_noise_gain,
            read_noise_sigma,
            bit_depth,
            exposure_ratios,
            phase,
        })
    }

    /// Identity calibration: no pedestal, unit gains, identity matrix, no
    /// noise, 16-bit container. Useful for round-trip measurements.
    pub fn neutral() -> Self {
        Self::new(
            "neutral",
            0.0,
            [1.0, 1.0, 1.0],
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            0.0,
            0.0,
            16,
            vec![1.0, 4.0, 16.0],
            BayerPhase::Rggb,
        )
        .expect("neutral profile is valid")
    }

    #[inline]
    pub fn ccm(&self) -> &Mat3 {
        &self.ccm
    }

    #[inline]
    pub fn ccm_inverse(&self) -> &Mat3 {
        &self.ccm_inverse
    }

    pub fn max_ratio(&self) -> f64 {
        *self
            .exposure_ratios
            .last()
            .expect("validated non-empty ratios")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_ccm() -> Mat3 {
        [[1.5, -0.3, -0.2], [-0.2, 1.6, -0.4], [-0.1, -0.5, 1.6]]
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = demo_ccm();
        let inv = mat3_inverse(&m).unwrap();
        for col in 0..3 {
            let mut e = [0.0; 3];
            e[col] = 1.0;
            let out = mat3_mul_vec(&m, mat3_mul_vec(&inv, e));
            for (row, &v) in out.iter().enumerate() {
                let expect = if row == col { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "({row},{col}) = {v}");
            }
        }
    }

    #[test]
    fn gray_preserving_inverse() {
        // Rows sum to 1, so the inverse also maps gray to gray.
        let inv = mat3_inverse(&demo_ccm()).unwrap();
        let out = mat3_mul_vec(&inv, [1.0, 1.0, 1.0]);
        for &v in &out {
            assert!((v - 1.0).abs() < 1e-9, "{out:?}");
        }
    }

    #[test]
    fn singular_ccm_rejected() {
        let bad = [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]];
        let err = SensorProfile::new(
            "bad",
            0.0,
            [1.0; 3],
            bad,
            0.0,
            0.0,
            12,
            vec![1.0],
            BayerPhase::Rggb,
        );
        assert!(err.is_err());
    }

    #[test]
    fn ratios_validated() {
        let mk = |ratios: Vec<f64>| {
            SensorProfile::new(
                "p",
                0.0,
                [1.0; 3],
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                0.0,
                0.0,
                12,
                ratios,
                BayerPhase::Rggb,
            )
        };
        assert!(mk(vec![1.0, 4.0, 16.0]).is_ok());
        assert!(mk(vec![2.0, 4.0]).is_err());
        assert!(mk(vec![1.0, 4.0, 4.0]).is_err());
        assert!(mk(vec![]).is_err());
    }

    #[test]
    fn row_sum_validated() {
        let bad = [[1.5, -0.3, -0.1], [-0.2, 1.6, -0.4], [-0.1, -0.5, 1.6]];
        assert!(SensorProfile::new(
            "p",
            0.0,
            [1.0; 3],
            bad,
            0.0,
            0.0,
            12,
            vec![1.0],
            BayerPhase::Rggb
        )
        .is_err());
    }
}
