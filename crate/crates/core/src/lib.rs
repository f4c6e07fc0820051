//! Cognitive ISAR toolkit: spectrally-notched waveform synthesis under
//! per-band interference budgets, synthetic point-scatterer dwells, and
//! image formation from incomplete slow-time/frequency data via smoothed-ℓ0
//! and majorization-minimization nuclear-norm recovery.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::single_range_in_vec_init)]

pub mod design;
pub mod error;
pub mod fft;
pub mod imaging;
pub mod io;
pub mod pipeline;
pub mod recovery;
pub mod scene;
pub mod signal;
pub mod spectrum;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
