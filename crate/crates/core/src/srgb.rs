//! Scalar sRGB transfer curves (IEC 61966-2-1).

const KNEE_LINEAR: f64 = 0.003_130_8;
const KNEE_ENCODED: f64 = 0.040_45;

/// Linear -> sRGB encoded, both in [0, 1].
#[inline]
pub fn encode(x: f64) -> f64 {
    if x <= KNEE_LINEAR {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    }
}

/// sRGB encoded -> linear, both in [0, 1].
#[inline]
pub fn decode(x: f64) -> f64 {
    if x <= KNEE_ENCODED {
        x / 12.92
    } else {
        ((x + 0.055) / 1.055).powf(2.4)
    }
}
