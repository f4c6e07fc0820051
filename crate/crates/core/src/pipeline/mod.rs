//! Scenario configuration and the end-to-end acquisition/imaging chain:
//! design, simulate, mask, recover, image, evaluate.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{
    AnalysisConfig, EmitterConfig, MaskConfig, RadarConfig, RecoveryConfig, ReferenceKind, ScattererConfig,
    ScenarioConfig, SceneConfig, WaveformConfig,
};

use crate::design::{design_with_report, DesignProblem, DesignReport};
use crate::error::{Error, Result};
use crate::imaging::{evaluate, rd_image, reconstruct_data, write_heatmap, ImageMetrics, IsarImage};
use crate::io::{write_json, write_matrix, write_sequence};
use crate::recovery::{operators_for, rm_recover, sl0_recover, write_trace_csv, TraceRow};
use crate::scene::{
    apply_mask, mask_from_bands, mask_from_dwell_fraction, simulate_dwell, DataMatrix, InterferenceSource,
    ObservationMask, ScattererScene,
};
use crate::signal::{ComplexSequence, FrequencyBand};
use crate::spectrum::{autocorrelation_interpolated, mainlobe_width_3db, notch_depths, psl, welch_psd};
use crate::{CMatrix, C64};

pub mod artifact {
    pub const WAVEFORM: &str = "waveform.bin";
    pub const DESIGN_REPORT: &str = "design_report.json";
    pub const PSD: &str = "psd.csv";
    pub const AF: &str = "af.csv";
    pub const ANALYSIS: &str = "analysis.json";
    pub const DATA_RAW: &str = "data_raw.bin";
    pub const MASK: &str = "mask.json";
    pub const DATA_MASKED: &str = "data_masked.bin";
    pub const DATA_RECOVERED: &str = "data_recovered.bin";
    pub const TRACE: &str = "trace.csv";
    pub const IMAGE: &str = "image.bin";
    pub const HEATMAP: &str = "image.png";
    pub const METRICS: &str = "metrics.csv";
    pub const MANIFEST: &str = "manifest.json";
}

/// The compared acquisition situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// Chirp, no interference, no noise, no masks.
    Gt,
    /// Chirp through the interference.
    Standard,
    /// Designed waveform; notch columns discarded.
    Notched,
    /// Notched plus 2D-SL0 recovery.
    #[serde(rename = "n-cs")]
    NCs,
    /// Notched plus rank-minimization recovery.
    #[serde(rename = "n-rm")]
    NRm,
}

impl Case {
    pub const ALL: [Case; 5] = [Case::Gt, Case::Standard, Case::Notched, Case::NCs, Case::NRm];

    pub fn label(self) -> &'static str {
        match self {
            Case::Gt => "gt",
            Case::Standard => "standard",
            Case::Notched => "notched",
            Case::NCs => "n-cs",
            Case::NRm => "n-rm",
        }
    }

    pub fn uses_design(self) -> bool {
        matches!(self, Case::Notched | Case::NCs | Case::NRm)
    }

    pub fn method(self) -> Method {
        match self {
            Case::NCs => Method::Sl0,
            Case::NRm => Method::Rm,
            _ => Method::None,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.label() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown case '{s}', expected gt|standard|notched|n-cs|n-rm"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    None,
    Sl0,
    Rm,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Method::None),
            "sl0" => Ok(Method::Sl0),
            "rm" => Ok(Method::Rm),
            _ => Err(Error::invalid(format!(
                "unknown method '{s}', expected none|sl0|rm"
            ))),
        }
    }
}

/// Data and image after the recovery stage.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub data: DataMatrix,
    pub image: IsarImage,
    pub trace: Vec<TraceRow>,
}

/// Waveform-level figures written by the analysis stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformAnalysis {
    /// Welch notch depth per protected band, dB.
    pub notch_depths_db: Vec<f64>,
    pub psl_db: f64,
    /// In lags.
    pub mainlobe_width_3db: f64,
}

/// A validated scenario with its derived objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub scene: ScattererScene,
    pub reference: ComplexSequence,
    pub bands: Vec<FrequencyBand>,
    pub sources: Vec<InterferenceSource>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let scene = config.scene()?;
        let reference = config.reference()?;
        let bands = config.bands(reference.energy())?;
        let sources = config.sources(&scene)?;
        Ok(Self {
            config,
            scene,
            reference,
            bands,
            sources,
        })
    }

    pub fn design(&self) -> Result<(Vec<C64>, DesignReport)> {
        let w = &self.config.waveform;
        let problem = DesignProblem::new(self.reference.clone(), self.bands.clone(), w.block, w.overlap)?;
        let (sol, report) = design_with_report(&problem)?;
        Ok((sol.c.into_samples(), report))
    }

    pub fn analyze(
        &self,
        c: &[C64],
    ) -> Result<(
        crate::spectrum::PsdEstimate,
        crate::spectrum::AutocorrelationProfile,
        WaveformAnalysis,
    )> {
        let a = &self.config.analysis;
        let psd = welch_psd(c, &a.welch.fit_to(c.len()))?;
        let af = autocorrelation_interpolated(c, a.af_factor)?;
        let summary = WaveformAnalysis {
            notch_depths_db: notch_depths(&psd, &self.bands)?,
            psl_db: psl(&af)?,
            mainlobe_width_3db: mainlobe_width_3db(&af),
        };
        Ok((psd, af, summary))
    }

    /// Unmasked data for `case` transmitting `c`.
    pub fn simulate(&self, case: Case, c: &[C64]) -> Result<DataMatrix> {
        if case == Case::Gt {
            simulate_dwell(&self.scene, c, &[], f64::INFINITY, None)
        } else {
            simulate_dwell(
                &self.scene,
                c,
                &self.sources,
                self.config.snr_db,
                Some(self.config.seed),
            )
        }
    }

    /// Dwell gaps for every non-reference case, plus the notch columns when a designed waveform is sent.
    pub fn mask(&self, case: Case) -> Result<ObservationMask> {
        if case == Case::Gt {
            return Ok(ObservationMask::default());
        }
        let m = &self.config.masks;
        let mut mask = mask_from_dwell_fraction(
            m.dwell_fraction,
            m.pattern,
            self.scene.pulse_count(),
            self.config.seed,
        )?;
        if case.uses_design() {
            mask = mask.union(&mask_from_bands(&self.bands, self.scene.bin_count())?);
        }
        Ok(mask)
    }

    pub fn recover(&self, method: Method, masked: &DataMatrix) -> Result<Recovered> {
        recover_with(method, masked, &self.config.recovery)
    }

    pub fn image(&self, data: &DataMatrix) -> IsarImage {
        rd_image(data).with_range_bin(self.scene.range_resolution())
    }
}

/// Recovery with explicit parameters; `Method::None` images the masked data as is.
pub fn recover_with(method: Method, masked: &DataMatrix, params: &RecoveryConfig) -> Result<Recovered> {
    let (tx, ty) = operators_for(masked)?;
    let (image, trace) = match method {
        Method::None => (rd_image(masked), Vec::new()),
        Method::Sl0 => {
            let out = sl0_recover(masked.values(), &tx, &ty, &params.sl0)?;
            (out.image, out.trace)
        }
        Method::Rm => {
            let mut rm = params.rm;
            rm.sl0 = params.sl0;
            let out = rm_recover(masked.values(), &tx, &ty, &rm, None)?;
            (out.image, out.trace)
        }
    };
    if !image.is_finite() {
        return Err(Error::Divergence {
            iteration: trace.len(),
            what: "recovered image".into(),
        });
    }
    let data = reconstruct_data(&image);
    Ok(Recovered { data, image, trace })
}

/// What one case produced.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub case: Case,
    pub metrics: ImageMetrics,
    pub image: IsarImage,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to rerun a case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub case: Case,
    pub seed: u64,
    pub threads: usize,
    pub status: String,
    /// The scenario exactly as parsed, as a TOML document.
    pub config_toml: String,
    pub artifacts: Vec<String>,
    pub timings: Vec<StageTiming>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ImageMetrics>,
}

struct Recorder {
    dir: PathBuf,
    manifest: Manifest,
}

impl Recorder {
    fn new(dir: PathBuf, case: Case, config: &ScenarioConfig) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            manifest: Manifest {
                tool: "cisar".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                case,
                seed: config.seed,
                threads: rayon::current_num_threads(),
                status: "running".into(),
                config_toml: config.to_toml()?,
                artifacts: Vec::new(),
                timings: Vec::new(),
                metrics: None,
            },
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.artifacts.push(name.into());
        self.dir.join(name)
    }

    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        log::info!("{}: {name}", self.manifest.case);
        let out = f(self).map_err(|e| e.in_stage(name));
        self.manifest.timings.push(StageTiming {
            stage: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn finish(mut self, result: &Result<()>) -> Result<()> {
        self.manifest.status = match result {
            Ok(()) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        };
        let path = self.dir.join(artifact::MANIFEST);
        write_json(&self.manifest, &path)
    }
}

pub fn write_csv_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_metrics_row<W: Write>(w: &mut W, scenario: &str, case: &str, m: &ImageMetrics) -> Result<()> {
    writeln!(
        w,
        "{scenario},{case},{:.12e},{:.12e},{:.12e}",
        m.ic, m.coh, m.nmse
    )?;
    Ok(())
}

pub const METRICS_HEADER: &str = "scenario,case,ic,coh,nmse";

/// Shared inputs of several cases in one run.
pub struct Prepared {
    pub designed: Option<(Vec<C64>, DesignReport)>,
    pub gt_image: IsarImage,
}

impl Scenario {
    /// Designs the waveform if any case needs it and forms the reference image.
    pub fn prepare(&self, cases: &[Case]) -> Result<Prepared> {
        let designed = if cases.iter().any(|c| c.uses_design()) {
            Some(self.design().map_err(|e| e.in_stage("design"))?)
        } else {
            None
        };
        let gt = self
            .simulate(Case::Gt, self.reference.samples())
            .map_err(|e| e.in_stage("simulate"))?;
        Ok(Prepared {
            designed,
            gt_image: self.image(&gt),
        })
    }

    /// Runs one case into `dir`, writing every artifact and a manifest even on failure.
    pub fn run_case(&self, case: Case, prepared: &Prepared, dir: &Path) -> Result<CaseOutcome> {
        let mut rec = Recorder::new(dir.to_path_buf(), case, &self.config)?;
        let mut outcome = None;
        let result = self.run_case_inner(case, prepared, &mut rec, &mut outcome);
        rec.manifest.metrics = outcome.as_ref().map(|o: &CaseOutcome| o.metrics);
        rec.finish(&result)?;
        result.map(|()| outcome.expect("set on success"))
    }

    fn run_case_inner(
        &self,
        case: Case,
        prepared: &Prepared,
        rec: &mut Recorder,
        outcome: &mut Option<CaseOutcome>,
    ) -> Result<()> {
        let a = self.config.analysis;
        let c: Vec<C64> = rec.stage("design", |rec| {
            let c = match (&prepared.designed, case.uses_design()) {
                (Some((c, report)), true) => {
                    write_json(report, &rec.path(artifact::DESIGN_REPORT))?;
                    c.clone()
                }
                (None, true) => return Err(Error::invalid("case needs a designed waveform")),
                _ => self.reference.samples().to_vec(),
            };
            write_sequence(&c, &rec.path(artifact::WAVEFORM))?;
            Ok(c)
        })?;
        rec.stage("analyze", |rec| {
            let (psd, af, summary) = self.analyze(&c)?;
            write_csv_file(&rec.path(artifact::PSD), |w| psd.write_csv(w))?;
            write_csv_file(&rec.path(artifact::AF), |w| af.write_csv(w))?;
            write_json(&summary, &rec.path(artifact::ANALYSIS))
        })?;
        let raw = rec.stage("simulate", |rec| {
            let raw = self.simulate(case, &c)?;
            write_matrix(raw.values(), &rec.path(artifact::DATA_RAW))?;
            Ok(raw)
        })?;
        let masked = rec.stage("mask", |rec| {
            let mask = self.mask(case)?;
            write_json(&mask, &rec.path(artifact::MASK))?;
            let masked = apply_mask(&raw, &mask)?;
            write_matrix(masked.values(), &rec.path(artifact::DATA_MASKED))?;
            Ok(masked)
        })?;
        let image = rec.stage("recover", |rec| {
            let method = case.method();
            let out = self.recover(method, &masked)?;
            if method != Method::None {
                write_matrix(out.data.values(), &rec.path(artifact::DATA_RECOVERED))?;
                write_csv_file(&rec.path(artifact::TRACE), |w| write_trace_csv(&out.trace, w))?;
            }
            Ok(out.image)
        })?;
        let image = rec.stage("image", |rec| {
            let image = image.with_range_bin(self.scene.range_resolution());
            write_matrix(image.values(), &rec.path(artifact::IMAGE))?;
            write_heatmap(&image, a.heatmap_floor_db, &rec.path(artifact::HEATMAP))?;
            Ok(image)
        })?;
        let metrics = rec.stage("metrics", |rec| {
            let m = evaluate(&image, &prepared.gt_image, a.metric_mode)?;
            write_csv_file(&rec.path(artifact::METRICS), |w| {
                writeln!(w, "{METRICS_HEADER}")?;
                write_metrics_row(w, &self.config.name, case.label(), &m)
            })?;
            Ok(m)
        })?;
        *outcome = Some(CaseOutcome {
            case,
            metrics,
            image,
            dir: rec.dir.clone(),
        });
        Ok(())
    }
}

/// Runs `cases` under `out/<case>/`, sharing the design and the reference
/// image, and writes a combined `metrics.csv` in `out`.
pub fn run_pipeline(config: &ScenarioConfig, cases: &[Case], out: &Path) -> Result<Vec<CaseOutcome>> {
    let scenario = Scenario::new(config.clone()).map_err(|e| e.in_stage("config"))?;
    std::fs::create_dir_all(out)?;
    let prepared = scenario.prepare(cases)?;
    let mut outcomes = Vec::with_capacity(cases.len());
    for &case in cases {
        outcomes.push(scenario.run_case(case, &prepared, &out.join(case.label()))?);
    }
    write_csv_file(&out.join(artifact::METRICS), |w| {
        writeln!(w, "{METRICS_HEADER}")?;
        for o in &outcomes {
            write_metrics_row(w, &config.name, o.case.label(), &o.metrics)?;
        }
        Ok(())
    })?;
    Ok(outcomes)
}

/// Loads a config from a TOML file or from the `config_toml` of a manifest.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let m: Manifest = crate::io::read_json(path)?;
        ScenarioConfig::from_toml(&m.config_toml)
    } else {
        ScenarioConfig::load(path)
    }
}

/// Matrix read back from disk as data with its mask re-applied.
pub fn masked_data(values: CMatrix, mask: &ObservationMask) -> Result<DataMatrix> {
    apply_mask(&DataMatrix::new(values), mask)
}
