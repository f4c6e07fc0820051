use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::ComplexSequence;
use crate::C64;

/// Unit-energy constant-modulus LFM sweeping `band_fraction` of `[0,1)`,
/// centred on 0.5: instantaneous frequency runs linearly from
/// `(1 − x)/2` to `(1 + x)/2`.
pub fn chirp_reference(n: usize, band_fraction: f64) -> Result<ComplexSequence> {
    if n < 2 {
        return Err(Error::invalid("chirp needs at least two samples"));
    }
    if !(band_fraction > 0.0 && band_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "band fraction must lie in (0,1], got {band_fraction}"
        )));
    }
    let amp = 1.0 / (n as f64).sqrt();
    let f0 = 0.5 * (1.0 - band_fraction);
    let rate = band_fraction / (2.0 * n as f64);
    let samples = (0..n)
        .map(|k| {
            let k = k as f64;
            let cycles = f0 * k + rate * k * k;
            C64::from_polar(amp, 2.0 * PI * cycles.fract())
        })
        .collect();
    ComplexSequence::new(samples)
}
