//! `cisar`: waveform design, dwell simulation, recovery and ISAR imaging.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cisar::imaging::{evaluate, rd_image, write_heatmap, IsarImage, MetricMode};
use cisar::io::{read_json, read_matrix, read_sequence, write_json, write_matrix, write_sequence};
use cisar::pipeline::{
    artifact, load_config, masked_data, recover_with, run_pipeline, write_csv_file, write_metrics_row, Case,
    Method, Scenario, ScenarioConfig, METRICS_HEADER,
};
use cisar::recovery::write_trace_csv;
use cisar::scene::{apply_mask, ObservationMask};

#[derive(Parser)]
#[command(
    name = "cisar",
    version,
    about = "Spectrally-notched waveform design and ISAR recovery"
)]
struct Cli {
    /// Worker threads for stage-internal parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)
                .map_err(|e| e.in_stage("config"))
                .with_context(|| format!("loading {}", p.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full chain for one or more cases.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Case label; repeatable. Defaults to all five.
        #[arg(long = "case")]
        cases: Vec<Case>,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize the notched waveform; also writes the reference chirp.
    Design {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Welch PSD, autocorrelation and notch summary of a waveform.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        waveform: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Acquire the dwell for a case with a given waveform and apply its mask.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        case: Case,
        #[arg(long)]
        waveform: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recover a masked data matrix and form its image.
    Recover {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Range-Doppler image of a data matrix.
    Image {
        #[arg(long)]
        data: PathBuf,
        /// Heatmap floor below the peak, dB.
        #[arg(long, default_value_t = cisar::imaging::DEFAULT_FLOOR_DB, allow_hyphen_values = true)]
        floor_db: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// IC, COH and NMSE of an image against a reference, as one CSV row.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "complex")]
        mode: String,
        #[arg(long, default_value = "")]
        scenario: String,
        #[arg(long, default_value = "")]
        case: String,
        /// Print the CSV header first.
        #[arg(long)]
        header: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}

/// Error chain on one line, skipping causes already quoted by their parent.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { scenario, cases, out } => {
            let cfg = scenario.load()?;
            let cases = if cases.is_empty() {
                Case::ALL.to_vec()
            } else {
                cases
            };
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let outcomes = run_pipeline(&cfg, &cases, &out)?;
            println!("{METRICS_HEADER}");
            let mut stdout = std::io::stdout().lock();
            for o in &outcomes {
                write_metrics_row(&mut stdout, &cfg.name, o.case.label(), &o.metrics)?;
            }
            Ok(())
        }
        Command::Design { scenario, out } => {
            let s = Scenario::new(scenario.load()?)?;
            fs::create_dir_all(&out)?;
            let (c, report) = s.design().map_err(|e| e.in_stage("design"))?;
            write_sequence(&c, &out.join(artifact::WAVEFORM))?;
            write_sequence(s.reference.samples(), &out.join(REFERENCE))?;
            write_json(&report, &out.join(artifact::DESIGN_REPORT))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Analyze {
            scenario,
            waveform,
            out,
        } => {
            let s = Scenario::new(scenario.load()?)?;
            let c = read_sequence(&waveform)?;
            fs::create_dir_all(&out)?;
            let (psd, af, summary) = s.analyze(&c).map_err(|e| e.in_stage("analyze"))?;
            write_csv_file(&out.join(artifact::PSD), |w| psd.write_csv(w))?;
            write_csv_file(&out.join(artifact::AF), |w| af.write_csv(w))?;
            write_json(&summary, &out.join(artifact::ANALYSIS))?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Simulate {
            scenario,
            case,
            waveform,
            out,
        } => {
            let s = Scenario::new(scenario.load()?)?;
            let c = read_sequence(&waveform)?;
            fs::create_dir_all(&out)?;
            let raw = s.simulate(case, &c).map_err(|e| e.in_stage("simulate"))?;
            write_matrix(raw.values(), &out.join(artifact::DATA_RAW))?;
            let mask = s.mask(case).map_err(|e| e.in_stage("mask"))?;
            write_json(&mask, &out.join(artifact::MASK))?;
            let masked = apply_mask(&raw, &mask).map_err(|e| e.in_stage("mask"))?;
            write_matrix(masked.values(), &out.join(artifact::DATA_MASKED))?;
            Ok(())
        }
        Command::Recover {
            scenario,
            method,
            data,
            mask,
            out,
        } => {
            let cfg = scenario.load()?;
            let mask: ObservationMask = read_json(&mask)?;
            let masked = masked_data(read_matrix(&data)?, &mask)?;
            fs::create_dir_all(&out)?;
            let r = recover_with(method, &masked, &cfg.recovery).map_err(|e| e.in_stage("recover"))?;
            if method != Method::None {
                write_matrix(r.data.values(), &out.join(artifact::DATA_RECOVERED))?;
                write_csv_file(&out.join(artifact::TRACE), |w| write_trace_csv(&r.trace, w))?;
            }
            write_image(&r.image, cfg.analysis.heatmap_floor_db, &out)
        }
        Command::Image { data, floor_db, out } => {
            let d = masked_data(read_matrix(&data)?, &ObservationMask::default())?;
            fs::create_dir_all(&out)?;
            write_image(&rd_image(&d), floor_db, &out)
        }
        Command::Metrics {
            reference,
            input,
            mode,
            scenario,
            case,
            header,
        } => {
            let mode = match mode.as_str() {
                "complex" => MetricMode::Complex,
                "magnitude" => MetricMode::Magnitude,
                other => bail!("unknown metric mode '{other}', expected complex|magnitude"),
            };
            let r = IsarImage::new(read_matrix(&reference)?);
            let i = IsarImage::new(read_matrix(&input)?);
            let m = evaluate(&i, &r, mode).map_err(|e| e.in_stage("metrics"))?;
            let mut stdout = std::io::stdout().lock();
            if header {
                writeln!(stdout, "{METRICS_HEADER}")?;
            }
            write_metrics_row(&mut stdout, &scenario, &case, &m)?;
            Ok(())
        }
    }
}

const REFERENCE: &str = "reference.bin";

fn write_image(image: &IsarImage, floor_db: f64, out: &Path) -> Result<()> {
    write_matrix(image.values(), &out.join(artifact::IMAGE))?;
    write_heatmap(image, floor_db, &out.join(artifact::HEATMAP))?;
    Ok(())
}
