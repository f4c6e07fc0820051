use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Window;
use crate::error::{Error, Result};
use crate::fft::{fft_raw, Direction};
use crate::signal::FrequencyBand;
use crate::C64;

/// Lowest level kept in `values_db`, relative to the normalization peak.
const FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchParams {
    pub segment_len: usize,
    pub overlap_len: usize,
    pub window: Window,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            segment_len: 3000,
            overlap_len: 2900,
            window: Window::BlackmanHarris,
        }
    }
}

impl WelchParams {
    /// Shrinks the segment to at most `n` samples, keeping the overlap ratio.
    pub fn fit_to(self, n: usize) -> Self {
        if self.segment_len <= n {
            return self;
        }
        let overlap = (self.overlap_len as f64 * n as f64 / self.segment_len as f64).floor() as usize;
        Self {
            segment_len: n,
            overlap_len: overlap.min(n.saturating_sub(1)),
            window: self.window,
        }
    }

    /// Segment length zero-padded to the next power of two, times four.
    pub fn nfft(&self) -> usize {
        self.segment_len.next_power_of_two() * 4
    }
}

/// Welch estimate on the grid `k / nfft`, `k = 0..nfft`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub grid: Vec<f64>,
    pub values_db: Vec<f64>,
    /// Power per bin; the mean over the grid equals the signal power.
    pub linear: Vec<f64>,
    /// Linear level mapped to 0 dB.
    pub reference_level: f64,
    pub params: WelchParams,
    pub nfft: usize,
    pub segments: usize,
}

impl PsdEstimate {
    /// Re-expresses `values_db` relative to the maximum of `reference`.
    pub fn relative_to(&self, reference: &PsdEstimate) -> Self {
        let level = reference.linear.iter().cloned().fold(0.0, f64::max);
        let mut out = self.clone();
        out.reference_level = level;
        out.values_db = to_db(&self.linear, level);
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "frequency,psd_db")?;
        for (f, v) in self.grid.iter().zip(&self.values_db) {
            writeln!(w, "{f:.8},{v:.6}")?;
        }
        Ok(())
    }
}

fn to_db(linear: &[f64], level: f64) -> Vec<f64> {
    linear
        .iter()
        .map(|p| {
            if level > 0.0 && *p > 0.0 {
                (10.0 * (p / level).log10()).max(FLOOR_DB)
            } else {
                FLOOR_DB
            }
        })
        .collect()
}

/// Averaged periodogram of windowed, overlapping segments, normalized to its own maximum.
pub fn welch_psd(c: &[C64], params: &WelchParams) -> Result<PsdEstimate> {
    let n = c.len();
    let seg = params.segment_len;
    if seg == 0 || seg > n {
        return Err(Error::invalid(format!(
            "segment length {seg} must lie in [1, {n}]"
        )));
    }
    if params.overlap_len >= seg {
        return Err(Error::invalid(format!(
            "overlap {} must be shorter than the segment {seg}",
            params.overlap_len
        )));
    }
    let hop = seg - params.overlap_len;
    let count = (n - seg) / hop + 1;
    let nfft = params.nfft();
    let win = params.window.coefficients(seg);
    let win_energy: f64 = win.iter().map(|w| w * w).sum();

    let periodograms: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|s| {
            let mut buf = vec![C64::new(0.0, 0.0); nfft];
            for (k, (b, w)) in buf.iter_mut().zip(&win).enumerate() {
                *b = c[s * hop + k] * *w;
            }
            fft_raw(&mut buf, Direction::Forward);
            buf.iter().map(|z| z.norm_sqr() / win_energy).collect()
        })
        .collect();
    let mut linear = vec![0.0; nfft];
    for p in &periodograms {
        for (acc, v) in linear.iter_mut().zip(p) {
            *acc += v;
        }
    }
    linear.iter_mut().for_each(|v| *v /= count as f64);

    let level = linear.iter().cloned().fold(0.0, f64::max);
    Ok(PsdEstimate {
        grid: (0..nfft).map(|k| k as f64 / nfft as f64).collect(),
        values_db: to_db(&linear, level),
        linear,
        reference_level: level,
        params: *params,
        nfft,
        segments: count,
    })
}

/// Mean dB level inside `band` minus the mean dB level outside it.
pub fn notch_depth(psd: &PsdEstimate, band: &FrequencyBand) -> Result<f64> {
    notch_depths(psd, std::slice::from_ref(band)).map(|v| v[0])
}

/// Per-band depths against the complement of all `bands`.
pub fn notch_depths(psd: &PsdEstimate, bands: &[FrequencyBand]) -> Result<Vec<f64>> {
    let inside = |f: f64, b: &FrequencyBand| f >= b.f_lo() && f <= b.f_hi();
    let mut pass = Vec::new();
    for (f, v) in psd.grid.iter().zip(&psd.values_db) {
        if !bands.iter().any(|b| inside(*f, b)) {
            pass.push(*v);
        }
    }
    if pass.is_empty() {
        return Err(Error::invalid("bands cover the whole grid"));
    }
    let pass_mean = pass.iter().sum::<f64>() / pass.len() as f64;
    bands
        .iter()
        .map(|b| {
            let vals: Vec<f64> = psd
                .grid
                .iter()
                .zip(&psd.values_db)
                .filter(|(f, _)| inside(**f, b))
                .map(|(_, v)| *v)
                .collect();
            if vals.is_empty() {
                return Err(Error::invalid(format!(
                    "band [{}, {}] holds no grid point",
                    b.f_lo(),
                    b.f_hi()
                )));
            }
            Ok(vals.iter().sum::<f64>() / vals.len() as f64 - pass_mean)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::chirp_reference;
    use std::f64::consts::PI;

    fn tone(n: usize, f: f64, amp: f64) -> Vec<C64> {
        (0..n)
            .map(|k| C64::from_polar(amp, 2.0 * PI * f * k as f64))
            .collect()
    }

    fn params(seg: usize, ov: usize) -> WelchParams {
        WelchParams {
            segment_len: seg,
            overlap_len: ov,
            window: Window::BlackmanHarris,
        }
    }

    #[test]
    fn constant_is_a_line_at_dc() {
        let c = vec![C64::new(1.0, 0.0); 1024];
        let p = welch_psd(&c, &params(256, 128)).unwrap();
        assert_eq!(p.values_db[0], 0.0);
        // beyond the four-term mainlobe (±4 bins of the segment) the floor is low
        let guard = 4 * p.nfft / 256 + 1;
        for (k, v) in p.values_db.iter().enumerate() {
            let d = k.min(p.nfft - k);
            if d > guard {
                assert!(*v <= -60.0, "bin {k}: {v}");
            }
        }
    }

    #[test]
    fn tone_peaks_at_its_frequency() {
        let c = tone(2048, 0.25, 1.0);
        let p = welch_psd(&c, &params(512, 256)).unwrap();
        let (k, _) = p
            .values_db
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(p.grid[k], 0.25);
    }

    #[test]
    fn parseval_for_tones() {
        for (f, amp) in [(0.1, 1.0), (0.37, 0.3), (0.81, 2.0)] {
            let c = tone(4096, f, amp);
            let p = welch_psd(&c, &params(1024, 512)).unwrap();
            let mean = p.linear.iter().sum::<f64>() / p.nfft as f64;
            assert!((mean / (amp * amp) - 1.0).abs() < 0.05, "{mean}");
        }
    }

    #[test]
    fn segment_checks() {
        let c = tone(100, 0.1, 1.0);
        assert!(welch_psd(&c, &params(101, 10)).is_err());
        assert!(welch_psd(&c, &params(50, 50)).is_err());
        let fitted = WelchParams::default().fit_to(100);
        assert_eq!(fitted.segment_len, 100);
        assert!(fitted.overlap_len < 100);
        assert!(welch_psd(&c, &fitted).is_ok());
    }

    #[test]
    fn nfft_and_grid() {
        let p = welch_psd(&tone(3000, 0.2, 1.0), &WelchParams::default()).unwrap();
        assert_eq!(p.nfft, 16384);
        assert_eq!(p.segments, 1);
        assert_eq!(p.grid[0], 0.0);
        assert!(p.grid.windows(2).all(|w| w[1] > w[0]));
        assert!(*p.grid.last().unwrap() < 1.0);
    }

    #[test]
    fn chirp_is_flat_where_fully_observed() {
        // a segment of S samples sees the sweep over [S/(2N), 1 − S/(2N)] from every offset
        let n = 10000;
        let c = chirp_reference(n, 1.0).unwrap();
        let p = welch_psd(c.samples(), &WelchParams::default()).unwrap();
        let (lo, hi) = (0.15, 0.85);
        let vals: Vec<f64> = p
            .grid
            .iter()
            .zip(&p.values_db)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, v)| *v)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!(vals.iter().all(|v| (v - mean).abs() <= 3.0));
    }

    #[test]
    fn relative_to_reference() {
        let a = welch_psd(&tone(1024, 0.2, 1.0), &params(256, 128)).unwrap();
        let b = welch_psd(&tone(1024, 0.2, 0.1), &params(256, 128)).unwrap();
        let r = b.relative_to(&a);
        let peak = r.values_db.iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak + 20.0).abs() < 1e-9);
    }

    fn synthetic(values_db: Vec<f64>) -> PsdEstimate {
        let n = values_db.len();
        PsdEstimate {
            grid: (0..n).map(|k| k as f64 / n as f64).collect(),
            linear: values_db.iter().map(|v| 10f64.powf(v / 10.0)).collect(),
            values_db,
            reference_level: 1.0,
            params: WelchParams::default(),
            nfft: n,
            segments: 1,
        }
    }

    #[test]
    fn notch_depth_examples() {
        let band = FrequencyBand::new(0.25, 0.5, 1.0).unwrap();
        let flat = synthetic(vec![-3.0; 64]);
        assert!(notch_depth(&flat, &band).unwrap().abs() < 1e-12);
        let rect = synthetic(
            (0..64)
                .map(|k| if (16..=32).contains(&k) { -25.0 } else { 0.0 })
                .collect(),
        );
        assert!((notch_depth(&rect, &band).unwrap() + 25.0).abs() < 0.1);
        let narrow = FrequencyBand::new(0.501, 0.503, 1.0).unwrap();
        assert!(notch_depth(&rect, &narrow).is_err());
    }

    #[test]
    fn csv_columns() {
        let p = synthetic(vec![0.0, -1.5]);
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("frequency,psd_db"));
        assert_eq!(text.lines().count(), 3);
    }
}
