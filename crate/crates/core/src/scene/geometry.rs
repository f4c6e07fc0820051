use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Range coordinate, m.
    pub x: f64,
    /// Cross-range coordinate, m.
    pub y: f64,
    pub amplitude: C64,
}

/// Point-scatterer target observed by a stepped-frequency radar over a rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererScene {
    pub scatterers: Vec<Scatterer>,
    /// Degrees.
    pub rotation_span: f64,
    /// Degrees.
    pub angle_step: f64,
    /// Hz.
    pub center_frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Hz.
    pub frequency_step: f64,
}

impl ScattererScene {
    /// Scene with the default radar geometry: 14 GHz centre, 2 GHz band,
    /// 4.5 MHz step, 15° rotation at 0.1°.
    pub fn with_scatterers(scatterers: Vec<Scatterer>) -> Self {
        Self {
            scatterers,
            rotation_span: 15.0,
            angle_step: 0.1,
            center_frequency: 14e9,
            bandwidth: 2e9,
            frequency_step: 4.5e6,
        }
    }

    /// Small drone-like layout within ±0.4 m: a body and four rotor hubs.
    pub fn drone() -> Self {
        let s = |x: f64, y: f64, a: f64, ph: f64| Scatterer {
            x,
            y,
            amplitude: C64::from_polar(a, ph),
        };
        Self::with_scatterers(vec![
            s(0.0, 0.0, 1.0, 0.0),
            s(0.25, 0.25, 0.8, 0.7),
            s(-0.25, 0.25, 0.7, 1.9),
            s(0.25, -0.25, 0.6, -2.2),
            s(-0.25, -0.25, 0.9, 2.8),
            s(0.1, -0.05, 0.5, -0.4),
            s(-0.35, 0.0, 0.4, 1.1),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        if self.scatterers.is_empty() {
            return Err(Error::invalid("scene needs at least one scatterer"));
        }
        let positive = [
            ("angle_step", self.angle_step),
            ("rotation_span", self.rotation_span),
            ("center_frequency", self.center_frequency),
            ("bandwidth", self.bandwidth),
            ("frequency_step", self.frequency_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let ratio = self.rotation_span / self.angle_step;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "rotation span {} is not a multiple of the angle step {}",
                self.rotation_span, self.angle_step
            )));
        }
        if self.frequency_step > self.bandwidth {
            return Err(Error::invalid("frequency step exceeds the bandwidth"));
        }
        if self.bandwidth / 2.0 >= self.center_frequency {
            return Err(Error::invalid("band extends below 0 Hz"));
        }
        Ok(())
    }

    /// `M = span / step`.
    pub fn pulse_count(&self) -> usize {
        (self.rotation_span / self.angle_step).round() as usize
    }

    /// `N_f = ⌊B / Δf⌋ + 1`.
    pub fn bin_count(&self) -> usize {
        (self.bandwidth / self.frequency_step + 1e-9).floor() as usize + 1
    }

    /// Lowest RF frequency of the band.
    pub fn start_frequency(&self) -> f64 {
        self.center_frequency - self.bandwidth / 2.0
    }

    pub fn bin_frequency(&self, n: usize) -> f64 {
        self.start_frequency() + n as f64 * self.frequency_step
    }

    /// Aspect angle of pulse `i` from the start of the dwell, degrees.
    pub fn aspect_angle(&self, i: usize) -> f64 {
        i as f64 * self.angle_step
    }

    /// Range resolution `c / 2B`, m.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    /// Cross-range resolution `λ / 2Δθ`, m.
    pub fn cross_range_resolution(&self) -> f64 {
        let lambda = SPEED_OF_LIGHT / self.center_frequency;
        lambda / (2.0 * self.rotation_span.to_radians())
    }

    /// Every scatterer amplitude multiplied by `k`.
    pub fn scaled(&self, k: C64) -> Self {
        let mut s = self.clone();
        s.scatterers.iter_mut().for_each(|p| p.amplitude *= k);
        s
    }
}

/// Stepped-frequency echo at pulse `angle_index`:
/// `Σ_p a_p exp(−j4π f_n r_p(θ_i) / c)`.
///
/// The rotation is referenced to mid-dwell so the image is centred in cross-range.
pub fn target_spectrum(scene: &ScattererScene, angle_index: usize) -> Result<Vec<C64>> {
    let m = scene.pulse_count();
    if angle_index >= m {
        return Err(Error::invalid(format!(
            "angle index {angle_index} outside 0..{m}"
        )));
    }
    let theta = (scene.aspect_angle(angle_index) - scene.rotation_span / 2.0).to_radians();
    let (sin, cos) = theta.sin_cos();
    let radial: Vec<f64> = scene.scatterers.iter().map(|p| p.x * cos - p.y * sin).collect();
    Ok((0..scene.bin_count())
        .map(|n| {
            let k = -4.0 * std::f64::consts::PI * scene.bin_frequency(n) / SPEED_OF_LIGHT;
            scene
                .scatterers
                .iter()
                .zip(&radial)
                .map(|(p, r)| p.amplitude * C64::from_polar(1.0, k * r))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one(x: f64, y: f64) -> ScattererScene {
        ScattererScene::with_scatterers(vec![Scatterer {
            x,
            y,
            amplitude: C64::new(1.0, 0.0),
        }])
    }

    #[test]
    fn default_counts() {
        let s = ScattererScene::drone();
        s.validate().unwrap();
        assert_eq!(s.bin_count(), 445);
        assert_eq!(s.pulse_count(), 150);
        assert!((s.range_resolution() - 0.0749).abs() < 1e-3);
    }

    #[test]
    fn centre_scatterer_is_flat() {
        let s = one(0.0, 0.0);
        for i in [0, 75, 149] {
            let x = target_spectrum(&s, i).unwrap();
            assert!(x.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn linear_phase_slope() {
        let r = 0.3;
        let mut s = one(r, 0.0);
        s.rotation_span = 0.2;
        s.angle_step = 0.1;
        // index 1 sits at zero rotation
        let x = target_spectrum(&s, 1).unwrap();
        let slope = -4.0 * PI * r / SPEED_OF_LIGHT * s.frequency_step;
        for n in 1..x.len() {
            let d = (x[n] / x[n - 1]).arg();
            let want = (slope + PI).rem_euclid(2.0 * PI) - PI;
            assert!((d - want).abs() < 1e-9);
        }
    }

    #[test]
    fn half_wavelength_pair_cancels() {
        let mut s = one(0.0, 0.0);
        s.rotation_span = 0.2;
        s.angle_step = 0.1;
        let n = 100;
        let lambda = SPEED_OF_LIGHT / s.bin_frequency(n);
        // two-way path difference of an odd number of half wavelengths
        s.scatterers.push(Scatterer {
            x: 41.0 * lambda / 4.0,
            y: 0.0,
            amplitude: C64::new(1.0, 0.0),
        });
        let x = target_spectrum(&s, 1).unwrap();
        assert!(x[n].norm() < 1e-9);
        assert!(x[n + 50].norm() > 0.1);
    }

    #[test]
    fn validation() {
        let mut s = ScattererScene::drone();
        s.angle_step = 0.07;
        assert!(s.validate().is_err());
        let empty = ScattererScene::with_scatterers(vec![]);
        assert!(empty.validate().is_err());
        assert!(target_spectrum(&ScattererScene::drone(), 150).is_err());
    }
}
