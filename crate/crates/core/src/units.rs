//! Conversions between the laboratory units used in configuration files
//! (gauss, kilogauss, micrometres) and the SI units used internally.
//!
//! Everything inside the library is SI: tesla, metre, second, joule, kelvin.

/// Tesla per gauss.
pub const GAUSS: f64 = 1e-4;
/// Tesla per kilogauss.
pub const KILOGAUSS: f64 = 1e-1;
/// Metres per micrometre.
pub const MICROMETER: f64 = 1e-6;
/// Metres per nanometre.
pub const NANOMETER: f64 = 1e-9;
/// Kelvin per microkelvin.
pub const MICROKELVIN: f64 = 1e-6;

#[inline]
pub fn gauss_to_tesla(b: f64) -> f64 {
    b * GAUSS
}

#[inline]
pub fn tesla_to_gauss(b: f64) -> f64 {
    b / GAUSS
}

/// Magnetization quoted as the field equivalent μ_0·M in kilogauss.
#[inline]
pub fn kilogauss_to_tesla(b: f64) -> f64 {
    b * KILOGAUSS
}

#[inline]
pub fn tesla_to_kilogauss(b: f64) -> f64 {
    b / KILOGAUSS
}

#[inline]
pub fn um_to_m(x: f64) -> f64 {
    x * MICROMETER
}

#[inline]
pub fn m_to_um(x: f64) -> f64 {
    x / MICROMETER
}

#[inline]
pub fn nm_to_m(x: f64) -> f64 {
    x * NANOMETER
}

#[inline]
pub fn m_to_nm(x: f64) -> f64 {
    x / NANOMETER
}

/// Energy in units of h·kHz, i.e. ħ·(2π·kHz).
#[inline]
pub fn joule_to_khz(e: f64) -> f64 {
    e / (crate::constants::PLANCK * 1e3)
}
