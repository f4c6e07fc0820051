use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A licensed emitter's normalized band with its interference budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    f_lo: f64,
    f_hi: f64,
    depth_db: f64,
    energy_budget: f64,
    /// Half-open pulse-index interval during which the emitter is active.
    activity: Option<Range<usize>>,
}

impl FrequencyBand {
    pub fn new(f_lo: f64, f_hi: f64, energy_budget: f64) -> Result<Self> {
        Self::check_edges(f_lo, f_hi)?;
        if !(energy_budget > 0.0) || !energy_budget.is_finite() {
            return Err(Error::invalid(format!(
                "energy budget must be positive and finite, got {energy_budget}"
            )));
        }
        Ok(Self {
            f_lo,
            f_hi,
            depth_db: -10.0 * energy_budget.log10(),
            energy_budget,
            activity: None,
        })
    }

    /// Band whose budget sits `depth_db` below the reference energy:
    /// `E_I = 10^(-depth/10) · reference_energy`.
    pub fn with_depth(f_lo: f64, f_hi: f64, depth_db: f64, reference_energy: f64) -> Result<Self> {
        if !(depth_db >= 0.0) || !depth_db.is_finite() {
            return Err(Error::invalid(format!(
                "notch depth must be >= 0 dB, got {depth_db}"
            )));
        }
        let mut band = Self::new(f_lo, f_hi, 10f64.powf(-depth_db / 10.0) * reference_energy)?;
        band.depth_db = depth_db;
        Ok(band)
    }

    /// Maps an RF band `[f1, f2]` inside the radar band `[radar_lo, radar_lo + bandwidth]`.
    pub fn from_rf(
        f1_hz: f64,
        f2_hz: f64,
        radar_lo_hz: f64,
        bandwidth_hz: f64,
        depth_db: f64,
        reference_energy: f64,
    ) -> Result<Self> {
        if !(bandwidth_hz > 0.0) {
            return Err(Error::invalid("radar bandwidth must be positive"));
        }
        let lo = (f1_hz - radar_lo_hz) / bandwidth_hz;
        let hi = (f2_hz - radar_lo_hz) / bandwidth_hz;
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::invalid(format!(
                "emitter band [{f1_hz}, {f2_hz}] Hz lies outside the radar band"
            )));
        }
        Self::with_depth(lo, hi, depth_db, reference_energy)
    }

    pub fn with_activity(mut self, pulses: Range<usize>) -> Self {
        self.activity = Some(pulses);
        self
    }

    fn check_edges(f_lo: f64, f_hi: f64) -> Result<()> {
        if !(0.0..1.0).contains(&f_lo) {
            return Err(Error::invalid(format!("f_lo must lie in [0,1), got {f_lo}")));
        }
        if !(f_hi > 0.0 && f_hi <= 1.0) {
            return Err(Error::invalid(format!("f_hi must lie in (0,1], got {f_hi}")));
        }
        if f_lo >= f_hi {
            return Err(Error::invalid(format!("empty band [{f_lo}, {f_hi}]")));
        }
        Ok(())
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    pub fn width(&self) -> f64 {
        self.f_hi - self.f_lo
    }

    pub fn depth_db(&self) -> f64 {
        self.depth_db
    }

    pub fn energy_budget(&self) -> f64 {
        self.energy_budget
    }

    pub fn activity(&self) -> Option<&Range<usize>> {
        self.activity.as_ref()
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_lo && f <= self.f_hi
    }

    /// Checks that the activity window fits a dwell of `pulses` pulses.
    pub fn check_activity(&self, pulses: usize) -> Result<()> {
        match &self.activity {
            Some(r) if r.start > r.end || r.end > pulses => Err(Error::invalid(format!(
                "activity window {r:?} exceeds the {pulses}-pulse dwell"
            ))),
            _ => Ok(()),
        }
    }
}

/// Grid indices `i` in `[0, n)` with `f_lo ≤ i/n ≤ f_hi`, ascending.
pub fn band_grid(band: &FrequencyBand, n: usize) -> Result<Vec<usize>> {
    grid_indices(band.f_lo, band.f_hi, n)
}

pub(crate) fn grid_indices(f_lo: f64, f_hi: f64, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("grid order must be positive"));
    }
    let nf = n as f64;
    let idx: Vec<usize> = (0..n)
        .filter(|&i| {
            let f = i as f64 / nf;
            f >= f_lo && f <= f_hi
        })
        .collect();
    if idx.is_empty() {
        return Err(Error::BandTooNarrow {
            lo: f_lo,
            hi: f_hi,
            n,
        });
    }
    Ok(idx)
}
