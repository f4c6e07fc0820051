use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{MetricMode, DEFAULT_FLOOR_DB};
use crate::recovery::{RmParams, Sl0Params};
use crate::scene::{pulse_interval, DwellPattern, InterferenceSource, Scatterer, ScattererScene};
use crate::signal::{chirp_reference, ComplexSequence, FrequencyBand};
use crate::spectrum::WelchParams;
use crate::C64;

/// Complete description of one simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label written into metrics rows.
    pub name: String,
    pub seed: u64,
    /// Single-pulse post-compression SNR; `inf` disables receiver noise.
    pub snr_db: f64,
    pub output: PathBuf,
    pub radar: RadarConfig,
    pub waveform: WaveformConfig,
    pub scene: SceneConfig,
    pub masks: MaskConfig,
    pub recovery: RecoveryConfig,
    pub analysis: AnalysisConfig,
    pub emitters: Vec<EmitterConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "two-interferer".into(),
            seed: 1,
            snr_db: 30.0,
            output: PathBuf::from("out"),
            radar: RadarConfig::default(),
            waveform: WaveformConfig::default(),
            scene: SceneConfig::Drone,
            masks: MaskConfig::default(),
            recovery: RecoveryConfig::default(),
            analysis: AnalysisConfig::default(),
            emitters: vec![
                EmitterConfig::new(13.38e9, 13.62e9, 40.0),
                EmitterConfig::new(14.53e9, 14.65e9, 30.0),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub frequency_step: f64,
    /// Degrees.
    pub rotation_span: f64,
    /// Degrees.
    pub angle_step: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            center_frequency: 14e9,
            bandwidth: 2e9,
            frequency_step: 4.5e6,
            rotation_span: 15.0,
            angle_step: 0.1,
        }
    }
}

impl RadarConfig {
    pub fn low_frequency(&self) -> f64 {
        self.center_frequency - 0.5 * self.bandwidth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    #[default]
    Chirp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub length: usize,
    pub block: usize,
    pub overlap: usize,
    pub reference: ReferenceKind,
    /// Fraction of the sampled band swept by the reference chirp.
    pub band_fraction: f64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            length: 5000,
            block: 2500,
            overlap: 1250,
            reference: ReferenceKind::Chirp,
            band_fraction: 1.0,
        }
    }
}

/// A licensed emitter: RF band, protection depth and power at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    /// Hz.
    pub f_lo: f64,
    /// Hz.
    pub f_hi: f64,
    pub depth_db: f64,
    /// Interference-to-signal ratio per pulse.
    #[serde(default = "default_isr")]
    pub isr_db: f64,
    /// Aspect-angle window `[start, end)` in degrees; absent means the whole dwell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_deg: Option<[f64; 2]>,
}

fn default_isr() -> f64 {
    20.0
}

impl EmitterConfig {
    pub fn new(f_lo: f64, f_hi: f64, depth_db: f64) -> Self {
        Self {
            f_lo,
            f_hi,
            depth_db,
            isr_db: default_isr(),
            active_deg: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererConfig {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SceneConfig {
    Drone,
    Points { scatterers: Vec<ScattererConfig> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub dwell_fraction: f64,
    pub pattern: DwellPattern,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            dwell_fraction: 1.0,
            pattern: DwellPattern::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub sl0: Sl0Params,
    pub rm: RmParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub welch: WelchParams,
    pub metric_mode: MetricMode,
    /// Autocorrelation interpolation factor.
    pub af_factor: usize,
    pub heatmap_floor_db: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            welch: WelchParams::default(),
            metric_mode: MetricMode::Complex,
            af_factor: 8,
            heatmap_floor_db: DEFAULT_FLOOR_DB,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Cross-field checks; every later stage assumes these hold.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db must be a number or inf, got {}", self.snr_db));
        }
        self.scene()?
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let w = &self.waveform;
        if w.length < 2 {
            return bad(format!("waveform length {} too short", w.length));
        }
        if w.block == 0 || w.block > w.length {
            return bad(format!(
                "block {} must lie in [1, length = {}]",
                w.block, w.length
            ));
        }
        if 2 * w.overlap > w.block {
            return bad(format!(
                "overlap {} exceeds half the block {}",
                w.overlap, w.block
            ));
        }
        if !(w.band_fraction > 0.0 && w.band_fraction <= 1.0) {
            return bad(format!("band_fraction {} outside (0, 1]", w.band_fraction));
        }
        let (lo, hi) = (
            self.radar.low_frequency(),
            self.radar.low_frequency() + self.radar.bandwidth,
        );
        for (k, e) in self.emitters.iter().enumerate() {
            if !(e.f_lo >= lo && e.f_hi <= hi && e.f_lo < e.f_hi) {
                return bad(format!(
                    "emitter {k}: band [{}, {}] Hz must be non-empty and inside the radar band [{lo}, {hi}] Hz",
                    e.f_lo, e.f_hi
                ));
            }
            if !(e.depth_db >= 0.0 && e.depth_db.is_finite()) {
                return bad(format!(
                    "emitter {k}: depth_db {} must be finite and ≥ 0",
                    e.depth_db
                ));
            }
            if !(e.isr_db.is_finite() || e.isr_db == f64::NEG_INFINITY) {
                return bad(format!("emitter {k}: isr_db {} must be finite or -inf", e.isr_db));
            }
            if let Some([a, b]) = e.active_deg {
                if !(a >= 0.0 && a <= b && b <= self.radar.rotation_span) {
                    return bad(format!(
                        "emitter {k}: window [{a}, {b}] deg outside the {} deg rotation",
                        self.radar.rotation_span
                    ));
                }
            }
        }
        let m = &self.masks;
        if !(m.dwell_fraction > 0.0 && m.dwell_fraction <= 1.0) {
            return bad(format!("dwell_fraction {} outside (0, 1]", m.dwell_fraction));
        }
        self.recovery
            .sl0
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.recovery.rm.k_max == 0 {
            return bad("recovery.rm.k_max must be positive".into());
        }
        let a = &self.analysis;
        if a.welch.segment_len == 0 || a.welch.overlap_len >= a.welch.segment_len {
            return bad("welch overlap must be shorter than the segment".into());
        }
        if a.af_factor == 0 {
            return bad("af_factor must be positive".into());
        }
        if !(a.heatmap_floor_db < 0.0) {
            return bad("heatmap_floor_db must be negative".into());
        }
        Ok(())
    }

    pub fn scene(&self) -> Result<ScattererScene> {
        let scatterers = match &self.scene {
            SceneConfig::Drone => ScattererScene::drone().scatterers,
            SceneConfig::Points { scatterers } => scatterers
                .iter()
                .map(|s| Scatterer {
                    x: s.x,
                    y: s.y,
                    amplitude: C64::from_polar(s.amplitude, s.phase_deg.to_radians()),
                })
                .collect(),
        };
        let r = &self.radar;
        Ok(ScattererScene {
            scatterers,
            rotation_span: r.rotation_span,
            angle_step: r.angle_step,
            center_frequency: r.center_frequency,
            bandwidth: r.bandwidth,
            frequency_step: r.frequency_step,
        })
    }

    pub fn reference(&self) -> Result<ComplexSequence> {
        match self.waveform.reference {
            ReferenceKind::Chirp => chirp_reference(self.waveform.length, self.waveform.band_fraction),
        }
    }

    /// Protected bands, normalized to the radar band, with budgets against `reference_energy`.
    pub fn bands(&self, reference_energy: f64) -> Result<Vec<FrequencyBand>> {
        self.emitters
            .iter()
            .map(|e| {
                FrequencyBand::from_rf(
                    e.f_lo,
                    e.f_hi,
                    self.radar.low_frequency(),
                    self.radar.bandwidth,
                    e.depth_db,
                    reference_energy,
                )
            })
            .collect()
    }

    pub fn sources(&self, scene: &ScattererScene) -> Result<Vec<InterferenceSource>> {
        self.emitters
            .iter()
            .zip(self.bands(1.0)?)
            .map(|(e, band)| {
                let src = InterferenceSource::new(band, 10f64.powf(e.isr_db / 10.0))?;
                Ok(match e.active_deg {
                    Some([a, b]) => src.active_during(pulse_interval(scene, a, b)),
                    None => src,
                })
            })
            .collect()
    }
}
