//! Unit boundary between cyclic frequencies (Hz, used for configuration and
//! output) and angular rates (rad/s, used inside every equation of motion).

use core::f64::consts::PI;

/// Cyclic frequency in Hz to angular rate in rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Angular rate in rad/s to cyclic frequency in Hz.
#[inline]
pub fn cyclic(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}

/// Intensity in mW/cm² to W/m².
#[inline]
pub fn mw_cm2_to_si(mw_cm2: f64) -> f64 {
    mw_cm2 * 10.0
}

/// Intensity in W/m² to mW/cm².
#[inline]
pub fn si_to_mw_cm2(w_m2: f64) -> f64 {
    w_m2 / 10.0
}

/// 1 fs² in s².
pub const FS2: f64 = 1e-30;
