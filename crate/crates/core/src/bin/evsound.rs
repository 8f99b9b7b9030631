use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evsound::pipeline::{self, OutputFormat, SynthConfig};
use evsound::signal::{stimulus_set, StimulusSpec};
use evsound::{io, Error, Result};

#[derive(Parser)]
#[command(name = "evsound", version, about = "Render, measure and analyse vehicle warning-sound stimuli")]
struct Cli {
    /// Root of all outputs; each command writes into its own subdirectory.
    #[arg(long, global = true, env = "EVSOUND_OUT_DIR", default_value = "evsound_out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render the stimulus set to mono metric and stereo listening WAVs.
    Synth {
        /// JSON array of stimulus specs; the built-in table when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 48_000)]
        sample_rate: u32,
        #[arg(long, default_value_t = 65.0)]
        target_dba: f64,
        /// Engine recording for the engine reference stimulus.
        #[arg(long)]
        engine_bed: Option<PathBuf>,
    },
    /// Compute every metric of a synthesized set.
    Metrics {
        /// Directory holding the synthesis manifest; `<out-dir>/stimuli` by default.
        #[arg(long)]
        audio_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Correlate metrics with ratings and emit table, box plots and scatter.
    Analyze {
        /// Metrics file (CSV or JSON); `<out-dir>/metrics.csv` by default.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Ratings CSV or runner result JSON.
        #[arg(long)]
        ratings: PathBuf,
        /// Comma-separated stimulus ids left out of the correlations, or `none`.
        #[arg(long, default_value = "14,15")]
        exclude: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Spectrogram CSV and image of a WAV file.
    Spectrogram {
        audio: PathBuf,
        /// Pascal per full-scale sample of the input.
        #[arg(long, default_value_t = io::FULL_SCALE_PA)]
        full_scale_pa: f64,
    },
    /// Package the stereo files and a session manifest for the runner.
    Session {
        #[arg(long)]
        audio_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        session_id: Option<String>,
    },
}

fn parse_exclude(s: &str) -> Result<BTreeSet<u8>> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("none") {
        return Ok(BTreeSet::new());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u8>()
                .map_err(|_| Error::InvalidParameter(format!("bad stimulus id '{v}' in --exclude")))
        })
        .collect()
}

fn load_specs(path: Option<&Path>) -> Result<Vec<StimulusSpec>> {
    match path {
        Some(p) => io::read_json(p),
        None => Ok(stimulus_set()),
    }
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    let out = cli.out_dir;
    let stimuli_dir = out.join("stimuli");
    match cli.command {
        Command::Synth {
            spec,
            seed,
            sample_rate,
            target_dba,
            engine_bed,
        } => {
            let cfg = SynthConfig {
                sample_rate,
                seed,
                target_dba,
                source_dba: target_dba,
                engine_bed,
                ..SynthConfig::default()
            };
            let specs = load_specs(spec.as_deref())?;
            let m = pipeline::cmd_synth(&specs, &cfg, &stimuli_dir)?;
            Ok(serde_json::json!({
                "dir": stimuli_dir,
                "stimuli": m.stimuli.iter().map(|s| s.id).collect::<Vec<_>>(),
                "skipped": m.skipped,
            }))
        }
        Command::Metrics { audio_dir, format } => {
            let format = OutputFormat::from(format);
            let report = pipeline::cmd_metrics(audio_dir.as_deref().unwrap_or(&stimuli_dir))?;
            let path = out.join(format!("metrics.{}", format.extension()));
            pipeline::write_metrics(&report, &path, format)?;
            Ok(serde_json::json!({ "file": path, "rows": report.metrics.len() }))
        }
        Command::Analyze {
            metrics,
            ratings,
            exclude,
            format,
        } => {
            let metrics = metrics.unwrap_or_else(|| {
                let csv = out.join("metrics.csv");
                if csv.exists() {
                    csv
                } else {
                    out.join("metrics.json")
                }
            });
            let exclude = parse_exclude(&exclude)?;
            let dir = out.join("analysis");
            let report = pipeline::cmd_analyze(&metrics, &ratings, &exclude, &dir, format.into())?;
            Ok(serde_json::json!({ "dir": dir, "correlations": report.correlations }))
        }
        Command::Spectrogram {
            audio,
            full_scale_pa,
        } => {
            let (csv, png) =
                pipeline::cmd_spectrogram(&audio, &out.join("spectrograms"), full_scale_pa)?;
            Ok(serde_json::json!({ "csv": csv, "image": png }))
        }
        Command::Session {
            audio_dir,
            seed,
            session_id,
        } => {
            let dir = out.join("session");
            let id = session_id.unwrap_or_else(|| format!("session-{seed}"));
            let m = pipeline::cmd_session(audio_dir.as_deref().unwrap_or(&stimuli_dir), &dir, seed, &id)?;
            let order: Vec<u8> = m.experimental().map(|t| t.stimulus_id).collect();
            Ok(serde_json::json!({ "dir": dir, "trial_order": order }))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
