use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_raw, Direction};
use crate::C64;

/// Normalized aperiodic autocorrelation magnitude.
///
/// `lags` are in samples and ascend from `−(N−1)`; for an interpolated
/// profile they step by `1/factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationProfile {
    pub lags: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    /// Samples per unit lag.
    pub factor: usize,
}

impl AutocorrelationProfile {
    fn from_magnitudes(mags: &[f64], factor: usize) -> Self {
        // mags[i] is lag i/factor for i ≥ 0; mirror for negative lags
        let peak = mags[0];
        let db = |m: f64| {
            if m > 0.0 {
                20.0 * (m / peak).log10()
            } else {
                f64::NEG_INFINITY
            }
        };
        let k = mags.len();
        let mut lags = Vec::with_capacity(2 * k - 1);
        let mut magnitude_db = Vec::with_capacity(2 * k - 1);
        for i in (1..k).rev() {
            lags.push(-(i as f64) / factor as f64);
            magnitude_db.push(db(mags[i]));
        }
        for (i, m) in mags.iter().enumerate() {
            lags.push(i as f64 / factor as f64);
            magnitude_db.push(if i == 0 { 0.0 } else { db(*m) });
        }
        Self {
            lags,
            magnitude_db,
            factor,
        }
    }

    /// Values at lags `0, 1/factor, 2/factor, …`.
    pub fn one_sided(&self) -> &[f64] {
        &self.magnitude_db[self.magnitude_db.len() / 2..]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,af_db")?;
        for (l, v) in self.lags.iter().zip(&self.magnitude_db) {
            writeln!(w, "{l},{v:.6}")?;
        }
        Ok(())
    }
}

/// `r(τ) = Σ c(n) c*(n−τ)` at integer lags, normalized to `r(0)`.
pub fn autocorrelation(c: &[C64]) -> Result<AutocorrelationProfile> {
    autocorrelation_interpolated(c, 1)
}

/// Autocorrelation band-limited-interpolated to `factor` points per lag.
///
/// Integer-lag samples of a chirp spanning the full sampled band fall on
/// the nulls of its sinc-like response, so sidelobe measurements use the
/// interpolated profile. The spectrum is treated as occupying `[0, 1)`.
pub fn autocorrelation_interpolated(c: &[C64], factor: usize) -> Result<AutocorrelationProfile> {
    let n = c.len();
    if n < 2 {
        return Err(Error::invalid("autocorrelation needs at least two samples"));
    }
    if factor == 0 {
        return Err(Error::invalid("interpolation factor must be positive"));
    }
    let m = (2 * n).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(c);
    fft_raw(&mut buf, Direction::Forward);
    let mut spec = vec![C64::new(0.0, 0.0); m * factor];
    for (s, b) in spec.iter_mut().zip(&buf) {
        *s = C64::new(b.norm_sqr(), 0.0);
    }
    fft_raw(&mut spec, Direction::Inverse);
    let count = (n - 1) * factor + 1;
    let mags: Vec<f64> = spec[..count].iter().map(|z| z.norm()).collect();
    if mags[0] == 0.0 {
        return Err(Error::ZeroNorm("sequence"));
    }
    Ok(AutocorrelationProfile::from_magnitudes(&mags, factor))
}

fn mainlobe_end(v: &[f64]) -> Option<usize> {
    (1..v.len().saturating_sub(1)).find(|&i| v[i] <= v[i + 1])
}

/// Peak sidelobe level: highest value beyond the first local minimum, in dB.
pub fn psl(profile: &AutocorrelationProfile) -> Result<f64> {
    let v = profile.one_sided();
    if v.len() < 2 {
        return Err(Error::invalid("profile needs at least three lags"));
    }
    Ok(match mainlobe_end(v) {
        Some(end) => v[end + 1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        None => f64::NEG_INFINITY,
    })
}

/// Width of the region around lag 0 above −3 dB, interpolating linear magnitude between lags.
pub fn mainlobe_width_3db(profile: &AutocorrelationProfile) -> f64 {
    let v = profile.one_sided();
    let thr = 10f64.powf(-3.0 / 20.0);
    let lin = |d: f64| 10f64.powf(d / 20.0);
    let step = 1.0 / profile.factor as f64;
    for i in 1..v.len() {
        let (a, b) = (lin(v[i - 1]), lin(v[i]));
        if b < thr {
            let frac = (a - thr) / (a - b);
            return 2.0 * step * ((i - 1) as f64 + frac);
        }
    }
    2.0 * step * (v.len() - 1) as f64
}
