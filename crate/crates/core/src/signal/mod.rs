//! Frequency-domain machinery shared by the design, simulation and
//! recovery stages: sequences, bands, steering vectors, Fourier and
//! band-constraint matrices.

mod band;
mod chirp;
mod constraint;
mod fourier;
mod sequence;

pub use band::{band_grid, FrequencyBand};
pub use chirp::chirp_reference;
pub use constraint::{
    band_energy, check_constraints, spectral_band_energy, BandCheck, CirculantForm, ConstraintMatrix,
};
pub(crate) use fourier::dft_matrix;
pub use fourier::{steering_vector, FourierMatrix};
pub(crate) use sequence::energy;
pub use sequence::ComplexSequence;
