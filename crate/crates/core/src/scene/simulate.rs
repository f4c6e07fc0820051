use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{target_spectrum, DataMatrix, ScattererScene};
use crate::error::{Error, Result};
use crate::fft::{fft_raw, fft_unitary, Direction};
use crate::signal::{band_grid, FrequencyBand};
use crate::{CMatrix, C64};

/// Band-limited white emitter overlapping the radar band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSource {
    pub band: FrequencyBand,
    /// Expected energy per pulse relative to the mean echo energy per pulse.
    pub power: f64,
    /// Active pulse rows; `None` means the whole dwell.
    pub activity: Option<Range<usize>>,
}

impl InterferenceSource {
    pub fn new(band: FrequencyBand, power: f64) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::invalid(format!(
                "interference power {power} must be finite and ≥ 0"
            )));
        }
        Ok(Self {
            band,
            power,
            activity: None,
        })
    }

    pub fn active_during(mut self, rows: Range<usize>) -> Self {
        self.activity = Some(rows);
        self
    }

    pub fn is_active(&self, row: usize) -> bool {
        self.activity.as_ref().is_none_or(|r| r.contains(&row))
    }
}

/// Pulse rows whose aspect angle lies in `[lo, hi)` degrees.
pub fn pulse_interval(scene: &ScattererScene, lo_deg: f64, hi_deg: f64) -> Range<usize> {
    let m = scene.pulse_count();
    if hi_deg <= lo_deg {
        return 0..0;
    }
    let idx = |deg: f64| ((deg / scene.angle_step).round().max(0.0) as usize).min(m);
    idx(lo_deg)..idx(hi_deg)
}

/// Indices of the sources active on each of the `pulses` rows.
pub fn activity_windows(sources: &[InterferenceSource], pulses: usize) -> Vec<Vec<usize>> {
    (0..pulses)
        .map(|i| {
            sources
                .iter()
                .enumerate()
                .filter(|(_, s)| s.is_active(i))
                .map(|(k, _)| k)
                .collect()
        })
        .collect()
}

/// DTFT of `c` at `n / N_f`, `n = 0..N_f`, by folding `c` modulo `N_f` and one FFT.
pub fn waveform_spectrum(c: &[C64], bins: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); bins];
    for (k, z) in c.iter().enumerate() {
        buf[k % bins] += z;
    }
    fft_raw(&mut buf, Direction::Forward);
    buf
}

fn complex_gaussian(rng: &mut ChaCha20Rng, n: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        })
        .collect()
}

/// Runs the acquisition chain for every aspect angle.
///
/// Per row: echo spectrum × waveform spectrum, to the range domain, plus
/// interference and receiver noise, then matched filtering with `c` and
/// back to frequency. `snr_db` is the single-pulse post-compression SNR,
/// peak compressed return over noise per range bin; `f64::INFINITY`
/// disables noise. Row `i` draws from stream `i` of the seeded generator.
pub fn simulate_dwell(
    scene: &ScattererScene,
    c: &[C64],
    sources: &[InterferenceSource],
    snr_db: f64,
    seed: Option<u64>,
) -> Result<DataMatrix> {
    scene.validate()?;
    if c.is_empty() {
        return Err(Error::invalid("empty waveform"));
    }
    let noisy = snr_db.is_finite();
    if snr_db.is_nan() {
        return Err(Error::invalid("SNR is NaN"));
    }
    let seed = match seed {
        Some(s) => s,
        None if noisy || !sources.is_empty() => {
            return Err(Error::invalid("a seed is required for noisy or interfered runs"))
        }
        None => 0,
    };
    let m = scene.pulse_count();
    let nf = scene.bin_count();
    let spec = waveform_spectrum(c, nf);
    let gain = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / nf as f64;
    let source_bins: Vec<Vec<usize>> = sources
        .iter()
        .map(|s| band_grid(&s.band, nf))
        .collect::<Result<_>>()?;

    // transmitted echo spectra
    let echoes: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|i| target_spectrum(scene, i).map(|x| x.iter().zip(&spec).map(|(a, b)| a * b).collect()))
        .collect::<Result<_>>()?;
    let echo_energy = echoes
        .iter()
        .map(|e| e.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / m as f64;

    let noise_var = if noisy {
        let peak = echoes
            .par_iter()
            .map(|e| {
                let mut r: Vec<C64> = e.iter().zip(&spec).map(|(a, b)| a * b.conj()).collect();
                fft_unitary(&mut r, Direction::Inverse);
                r.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            / m as f64;
        peak / (10f64.powf(snr_db / 10.0) * gain)
    } else {
        0.0
    };

    let rows: Vec<Vec<C64>> = echoes
        .into_par_iter()
        .enumerate()
        .map(|(i, echo)| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut y = echo;
            fft_unitary(&mut y, Direction::Inverse);
            for (s, bins) in sources.iter().zip(&source_bins) {
                // drawn whether active or not, so rows stay aligned across activity settings
                let mut w = complex_gaussian(&mut rng, nf);
                if !s.is_active(i) || s.power == 0.0 {
                    continue;
                }
                fft_unitary(&mut w, Direction::Forward);
                let mut limited = vec![C64::new(0.0, 0.0); nf];
                for &k in bins {
                    limited[k] = w[k];
                }
                // unit expected energy per bin → scale to the requested total
                let scale = (s.power * echo_energy / bins.len() as f64).sqrt();
                fft_unitary(&mut limited, Direction::Inverse);
                for (a, b) in y.iter_mut().zip(&limited) {
                    *a += b * scale;
                }
            }
            if noisy {
                let sd = noise_var.sqrt();
                for (a, b) in y.iter_mut().zip(complex_gaussian(&mut rng, nf)) {
                    *a += b * sd;
                }
            }
            fft_unitary(&mut y, Direction::Forward);
            y.iter_mut().zip(&spec).for_each(|(a, b)| *a *= b.conj());
            y
        })
        .collect();
    Ok(DataMatrix::new(CMatrix::from_fn(m, nf, |i, j| rows[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scatterer;
    use crate::signal::chirp_reference;

    fn small(scatterers: Vec<Scatterer>) -> ScattererScene {
        let mut s = ScattererScene::with_scatterers(scatterers);
        s.rotation_span = 3.2;
        s.angle_step = 0.1;
        s.frequency_step = s.bandwidth / 63.0;
        s
    }

    fn pt(x: f64, y: f64, a: f64) -> Scatterer {
        Scatterer {
            x,
            y,
            amplitude: C64::new(a, 0.0),
        }
    }

    #[test]
    fn folded_fft_matches_dtft() {
        let c = chirp_reference(100, 0.8).unwrap();
        let s = waveform_spectrum(c.samples(), 37);
        for (n, z) in s.iter().enumerate() {
            let nu = n as f64 / 37.0;
            let want: C64 = c
                .samples()
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * nu * k as f64))
                .sum();
            assert!((z - want).norm() < 1e-10);
        }
    }

    #[test]
    fn noiseless_chain_is_spectrum_times_gain() {
        let scene = small(vec![pt(0.1, 0.05, 1.0), pt(-0.2, 0.0, 0.5)]);
        let c = chirp_reference(256, 1.0).unwrap();
        let d = simulate_dwell(&scene, c.samples(), &[], f64::INFINITY, None).unwrap();
        let spec = waveform_spectrum(c.samples(), scene.bin_count());
        assert_eq!(d.rows(), 32);
        assert_eq!(d.cols(), 64);
        for i in [0, 13, 31] {
            let x = target_spectrum(&scene, i).unwrap();
            for n in 0..64 {
                let want = x[n] * spec[n].norm_sqr();
                assert!((d.values()[(i, n)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_power_source_changes_nothing() {
        let scene = small(vec![pt(0.1, 0.0, 1.0)]);
        let c = chirp_reference(128, 1.0).unwrap();
        let a = simulate_dwell(&scene, c.samples(), &[], f64::INFINITY, None).unwrap();
        let src = InterferenceSource::new(FrequencyBand::new(0.2, 0.3, 1.0).unwrap(), 0.0).unwrap();
        let b = simulate_dwell(&scene, c.samples(), &[src], f64::INFINITY, Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interference_stays_in_band_and_window() {
        let scene = small(vec![pt(0.0, 0.0, 1.0)]);
        let c = chirp_reference(128, 1.0).unwrap();
        let clean = simulate_dwell(&scene, c.samples(), &[], f64::INFINITY, None).unwrap();
        let band = FrequencyBand::new(0.25, 0.4, 1.0).unwrap();
        let src = InterferenceSource::new(band.clone(), 100.0)
            .unwrap()
            .active_during(5..10);
        let d = simulate_dwell(&scene, c.samples(), &[src], f64::INFINITY, Some(1)).unwrap();
        let bins = band_grid(&band, 64).unwrap();
        for i in 0..32 {
            for n in 0..64 {
                let diff = (d.values()[(i, n)] - clean.values()[(i, n)]).norm();
                if (5..10).contains(&i) && bins.contains(&n) {
                    continue;
                }
                assert!(diff < 1e-10, "row {i} col {n}");
            }
        }
        let energy: f64 = (5..10)
            .flat_map(|i| bins.iter().map(move |&n| (i, n)))
            .map(|(i, n)| (d.values()[(i, n)] - clean.values()[(i, n)]).norm_sqr())
            .sum();
        assert!(energy > 1.0);
    }

    #[test]
    fn reproducible_and_seed_checked() {
        let scene = small(vec![pt(0.1, 0.1, 1.0)]);
        let c = chirp_reference(64, 1.0).unwrap();
        let a = simulate_dwell(&scene, c.samples(), &[], 10.0, Some(7)).unwrap();
        let b = simulate_dwell(&scene, c.samples(), &[], 10.0, Some(7)).unwrap();
        let e = simulate_dwell(&scene, c.samples(), &[], 10.0, Some(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, e);
        assert!(simulate_dwell(&scene, c.samples(), &[], 10.0, None).is_err());
    }

    #[test]
    fn noise_level_follows_snr() {
        // single centre scatterer: compressed peak power is known, noise per bin follows
        let scene = small(vec![pt(0.0, 0.0, 1.0)]);
        let c = chirp_reference(64, 1.0).unwrap();
        let clean = simulate_dwell(&scene, c.samples(), &[], f64::INFINITY, None).unwrap();
        let noisy = simulate_dwell(&scene, c.samples(), &[], 0.0, Some(11)).unwrap();
        let spec = waveform_spectrum(c.samples(), 64);
        let gain = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        let mut peak = 0.0;
        let mut noise = 0.0;
        for i in 0..32 {
            let mut r: Vec<C64> = clean.values().row(i).iter().cloned().collect();
            fft_unitary(&mut r, Direction::Inverse);
            peak += r.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) / 32.0;
            for n in 0..64 {
                noise += (noisy.values()[(i, n)] - clean.values()[(i, n)]).norm_sqr();
            }
        }
        noise /= 32.0 * 64.0;
        let _ = gain;
        let snr = 10.0 * (peak / noise).log10();
        assert!(snr.abs() < 0.5, "{snr}");
    }

    #[test]
    fn angle_windows_to_rows() {
        let s = ScattererScene::drone();
        assert_eq!(pulse_interval(&s, 0.0, 7.0), 0..70);
        assert_eq!(pulse_interval(&s, 7.0, 11.0), 70..110);
        assert_eq!(pulse_interval(&s, 11.0, 15.0), 110..150);
        assert!(pulse_interval(&s, 5.0, 5.0).is_empty());
        let band = FrequencyBand::new(0.2, 0.3, 1.0).unwrap();
        let a = InterferenceSource::new(band.clone(), 1.0)
            .unwrap()
            .active_during(0..70);
        let b = InterferenceSource::new(band.clone(), 1.0)
            .unwrap()
            .active_during(60..80);
        let never = InterferenceSource::new(band, 1.0).unwrap().active_during(0..0);
        let w = activity_windows(&[a, b, never], 150);
        assert_eq!(w[0], vec![0]);
        assert_eq!(w[65], vec![0, 1]);
        assert_eq!(w[75], vec![1]);
        assert!(w[100].is_empty());
    }
}
