use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{band_grid, FrequencyBand};
use crate::{CMatrix, C64};

/// Missing slow-time rows and frequency columns. Indices are zero-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationMask {
    pub missing_frequency_bins: BTreeSet<usize>,
    pub missing_pulse_rows: BTreeSet<usize>,
}

impl ObservationMask {
    pub fn is_empty(&self) -> bool {
        self.missing_frequency_bins.is_empty() && self.missing_pulse_rows.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            missing_frequency_bins: &self.missing_frequency_bins | &other.missing_frequency_bins,
            missing_pulse_rows: &self.missing_pulse_rows | &other.missing_pulse_rows,
        }
    }

    /// Checks the indices against an `rows × cols` matrix and that something survives.
    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if let Some(&r) = self.missing_pulse_rows.iter().next_back() {
            if r >= rows {
                return Err(Error::invalid(format!("masked row {r} outside 0..{rows}")));
            }
        }
        if let Some(&c) = self.missing_frequency_bins.iter().next_back() {
            if c >= cols {
                return Err(Error::invalid(format!("masked column {c} outside 0..{cols}")));
            }
        }
        if self.missing_pulse_rows.len() >= rows {
            return Err(Error::AllMasked("pulse"));
        }
        if self.missing_frequency_bins.len() >= cols {
            return Err(Error::AllMasked("frequency bin"));
        }
        Ok(())
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        !self.missing_pulse_rows.contains(&row) && !self.missing_frequency_bins.contains(&col)
    }

    /// Kept pulse rows in ascending order.
    pub fn observed_rows(&self, rows: usize) -> Vec<usize> {
        (0..rows)
            .filter(|r| !self.missing_pulse_rows.contains(r))
            .collect()
    }

    pub fn observed_columns(&self, cols: usize) -> Vec<usize> {
        (0..cols)
            .filter(|c| !self.missing_frequency_bins.contains(c))
            .collect()
    }
}

/// Slow-time × frequency data with its observation mask; masked entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: CMatrix,
    mask: ObservationMask,
}

impl DataMatrix {
    /// Complete data.
    pub fn new(values: CMatrix) -> Self {
        Self {
            values,
            mask: ObservationMask::default(),
        }
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn into_values(self) -> CMatrix {
        self.values
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// Zeroes the listed rows and columns; masks accumulate.
pub fn apply_mask(data: &DataMatrix, mask: &ObservationMask) -> Result<DataMatrix> {
    let combined = data.mask.union(mask);
    combined.check(data.rows(), data.cols())?;
    let mut values = data.values.clone();
    let zero = C64::new(0.0, 0.0);
    for &r in &mask.missing_pulse_rows {
        values.row_mut(r).fill(zero);
    }
    for &c in &mask.missing_frequency_bins {
        values.column_mut(c).fill(zero);
    }
    Ok(DataMatrix {
        values,
        mask: combined,
    })
}

/// Frequency columns falling inside any band on the grid `k / N_f`.
pub fn mask_from_bands(bands: &[FrequencyBand], bins: usize) -> Result<ObservationMask> {
    let mut mask = ObservationMask::default();
    for b in bands {
        mask.missing_frequency_bins.extend(band_grid(b, bins)?);
    }
    Ok(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DwellPattern {
    /// Rows spread evenly; at half dwell the odd rows are missing.
    #[default]
    Periodic,
    /// One contiguous missing run starting at `start`.
    Block { start: usize },
    /// Missing rows drawn uniformly without replacement.
    Random,
}

/// Row mask leaving about `fraction · M` pulses for imaging.
pub fn mask_from_dwell_fraction(
    fraction: f64,
    pattern: DwellPattern,
    pulses: usize,
    seed: u64,
) -> Result<ObservationMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "dwell fraction {fraction} outside (0, 1]"
        )));
    }
    let keep = (fraction * pulses as f64).round() as usize;
    if keep == 0 {
        return Err(Error::invalid(format!(
            "dwell fraction {fraction} leaves no pulse out of {pulses}"
        )));
    }
    let missing_count = pulses - keep;
    let missing: BTreeSet<usize> = match pattern {
        DwellPattern::Periodic => (1..pulses)
            .filter(|&i| {
                let a = (i as f64 * fraction + 1e-12).floor();
                let b = ((i - 1) as f64 * fraction + 1e-12).floor();
                a == b
            })
            .collect(),
        DwellPattern::Block { start } => {
            if start + missing_count > pulses {
                return Err(Error::invalid(format!(
                    "missing block {start}..{} exceeds {pulses} pulses",
                    start + missing_count
                )));
            }
            (start..start + missing_count).collect()
        }
        DwellPattern::Random => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..pulses).collect();
            idx.shuffle(&mut rng);
            idx.into_iter().take(missing_count).collect()
        }
    };
    Ok(ObservationMask {
        missing_frequency_bins: BTreeSet::new(),
        missing_pulse_rows: missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |i, j| C64::new(i as f64 + 1.0, j as f64 - 0.5))
    }

    #[test]
    fn empty_mask_is_identity() {
        let d = DataMatrix::new(ramp(4, 5));
        let m = apply_mask(&d, &ObservationMask::default()).unwrap();
        assert_eq!(m, d);
    }

    #[test]
    fn masking_is_idempotent() {
        let d = DataMatrix::new(ramp(4, 5));
        let mask = ObservationMask {
            missing_frequency_bins: [1, 3].into(),
            missing_pulse_rows: [2].into(),
        };
        let once = apply_mask(&d, &mask).unwrap();
        let twice = apply_mask(&once, &mask).unwrap();
        assert_eq!(once, twice);
        for i in 0..4 {
            for j in 0..5 {
                let z = once.values()[(i, j)];
                assert_eq!(z == C64::new(0.0, 0.0), !mask.is_observed(i, j));
            }
        }
    }

    #[test]
    fn all_masked_is_rejected() {
        let d = DataMatrix::new(ramp(2, 3));
        let mask = ObservationMask {
            missing_frequency_bins: [0, 1, 2].into(),
            ..Default::default()
        };
        assert!(matches!(apply_mask(&d, &mask), Err(Error::AllMasked(_))));
    }

    #[test]
    fn scenario_band_columns() {
        let bands = [
            FrequencyBand::new(0.19, 0.31, 1.0).unwrap(),
            FrequencyBand::new(0.765, 0.825, 1.0).unwrap(),
        ];
        let a = mask_from_bands(&bands[..1], 445).unwrap();
        let b = mask_from_bands(&bands[1..], 445).unwrap();
        // ⌈0.19·445⌉ = 85 … ⌊0.31·445⌋ = 137 and 341 … 367
        assert_eq!(a.missing_frequency_bins.len(), 53);
        assert_eq!(b.missing_frequency_bins.len(), 27);
        assert_eq!(
            mask_from_bands(&bands, 445).unwrap().missing_frequency_bins.len(),
            80
        );
    }

    #[test]
    fn dwell_patterns() {
        assert!(mask_from_dwell_fraction(1.0, DwellPattern::Periodic, 150, 0)
            .unwrap()
            .missing_pulse_rows
            .is_empty());
        let p = mask_from_dwell_fraction(0.5, DwellPattern::Periodic, 150, 0).unwrap();
        let odd: BTreeSet<usize> = (1..150).step_by(2).collect();
        assert_eq!(p.missing_pulse_rows, odd);
        let b = mask_from_dwell_fraction(0.5, DwellPattern::Block { start: 40 }, 150, 0).unwrap();
        assert_eq!(b.missing_pulse_rows, (40..115).collect());
        let r1 = mask_from_dwell_fraction(0.5, DwellPattern::Random, 150, 9).unwrap();
        let r2 = mask_from_dwell_fraction(0.5, DwellPattern::Random, 150, 9).unwrap();
        let r3 = mask_from_dwell_fraction(0.5, DwellPattern::Random, 150, 10).unwrap();
        assert_eq!(r1, r2);
        assert_ne!(r1, r3);
        assert_eq!(r1.missing_pulse_rows.len(), 75);
        assert!(mask_from_dwell_fraction(0.001, DwellPattern::Periodic, 150, 0).is_err());
        assert!(mask_from_dwell_fraction(0.0, DwellPattern::Periodic, 150, 0).is_err());
    }
}
