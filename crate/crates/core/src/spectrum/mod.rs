//! Waveform verification: Welch PSD, autocorrelation, sidelobe and notch metrics.

mod correlation;
mod psd;
mod window;

pub use correlation::{
    autocorrelation, autocorrelation_interpolated, mainlobe_width_3db, psl, AutocorrelationProfile,
};
pub use psd::{notch_depth, notch_depths, welch_psd, PsdEstimate, WelchParams};
pub use window::Window;
