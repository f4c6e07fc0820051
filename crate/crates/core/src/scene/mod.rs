//! Synthetic ISAR acquisition: point-scatterer scenes, interference, masking.

mod geometry;
mod mask;
mod simulate;

pub use geometry::{target_spectrum, Scatterer, ScattererScene, SPEED_OF_LIGHT};
pub use mask::{
    apply_mask, mask_from_bands, mask_from_dwell_fraction, DataMatrix, DwellPattern, ObservationMask,
};
pub use simulate::{activity_windows, pulse_interval, simulate_dwell, waveform_spectrum, InterferenceSource};
