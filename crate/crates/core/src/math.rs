//! Float helpers backed by `libm` so the crate stays `no_std`.

pub(crate) use libm::{cos, exp, log, log10, pow, sin, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}
