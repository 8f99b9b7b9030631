//! End-to-end stages behind the command-line tool: stimulus rendering,
//! metric extraction, rating analysis, spectrograms and session bundles.
//! Every stage writes its outputs atomically and is deterministic for a
//! fixed configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, WavFormat, FULL_SCALE_PA};
use crate::levels::{self, SpectrogramParams, TimeWeighting, NOY_TABLE_VERSION, PNL_FRAME_S};
use crate::plot;
use crate::propagation::{self, RenderOptions, Trajectory};
use crate::session::{self, SessionManifest, SCHEMA_VERSION};
use crate::signal::{
    self, CalibratedSignal, RAMP_MS, NoiseBedKind, NoiseBedSpec, SourceSpec, StimulusSpec,
};
use crate::sqm::{SqmTraces, DEFAULT_WARMUP_S};
use crate::study::{self, BoxStats, CorrelationResult, Metric, MetricSet, Scatter};

pub const SYNTH_MANIFEST: &str = "synth_manifest.json";
pub const SESSION_MANIFEST: &str = "session_manifest.json";
pub const SESSION_SCHEMA: &str = "session_manifest.schema.json";

/// Extra source duration beyond the first wavefront, covering the
/// interpolation kernel, s.
const LEAD_MARGIN_S: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sample_rate: u32,
    pub seed: u64,
    /// A-weighted equivalent level of the normalized stimuli, dBA.
    pub target_dba: f64,
    /// Level of the warning sound alone before mixing, dBA.
    pub source_dba: f64,
    /// Level of the vehicle's tyre noise, dBA.
    pub tyre_dba: f64,
    /// Level of the static street background, dBA.
    pub background_dba: f64,
    pub trajectory: Trajectory,
    pub full_scale_pa: f64,
    /// Engine recording for stimuli whose source is a file bed without a
    /// path of its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine_bed: Option<PathBuf>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate: 48_000,
            seed: 1,
            target_dba: 65.0,
            source_dba: 65.0,
            tyre_dba: 55.0,
            background_dba: 45.0,
            trajectory: Trajectory::default(),
            full_scale_pa: FULL_SCALE_PA,
            engine_bed: None,
        }
    }
}

impl SynthConfig {
    fn bed(&self, kind: NoiseBedKind) -> NoiseBedSpec {
        let offset = match kind {
            NoiseBedKind::Tyre => 0,
            NoiseBedKind::Background => 1,
        };
        NoiseBedSpec {
            kind,
            seed: self.seed.wrapping_mul(2).wrapping_add(offset),
            gain: 0.01,
        }
    }
}

/// Observer signals of one stimulus.
#[derive(Clone, Debug)]
pub struct RenderedStimulus {
    pub id: u8,
    pub label: String,
    /// Single-microphone signal used for all metrics.
    pub mono: CalibratedSignal,
    /// Two-channel listening version.
    pub stereo: CalibratedSignal,
    /// Gain applied by the final normalization (1 when not normalized).
    pub gain: f64,
}

fn file_bed_source(path: &Path, cfg: &SynthConfig, len: usize) -> Result<CalibratedSignal> {
    let rec = io::read_wav(path, cfg.full_scale_pa)?;
    if rec.sample_rate() != cfg.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: cfg.sample_rate,
            found: rec.sample_rate(),
        });
    }
    let x = rec.downmix().into_channels().remove(0);
    if x.is_empty() || x.iter().all(|v| *v == 0.0) {
        return Err(Error::Silent);
    }
    // loop a short recording to the required length
    let looped = x.iter().copied().cycle().take(len).collect();
    CalibratedSignal::mono(cfg.sample_rate, looped)
}

/// A normalized file-bed stimulus without a recording of its own.
fn needs_engine_bed(spec: &StimulusSpec) -> bool {
    spec.normalize && matches!(&spec.source, SourceSpec::FileBed { bed_path: None })
}

/// Source at the emission point, starting `lead` seconds before reception
/// begins. `Ok(None)` means the vehicle carries tyre noise only.
fn emission_source(
    spec: &StimulusSpec,
    cfg: &SynthConfig,
    duration: f64,
) -> Result<Option<CalibratedSignal>> {
    if let Some(sig) = spec.synthesize(duration, cfg.sample_rate, 1.0)? {
        return Ok(Some(sig));
    }
    let SourceSpec::FileBed { bed_path } = &spec.source else {
        unreachable!("only file beds are left unsynthesized");
    };
    let len = (duration * cfg.sample_rate as f64).round() as usize;
    match (bed_path, spec.normalize) {
        (Some(p), _) => file_bed_source(p, cfg, len).map(Some),
        // the normalized reference without a recording needs the engine bed
        (None, true) => match &cfg.engine_bed {
            Some(p) => file_bed_source(p, cfg, len).map(Some),
            None => Err(Error::MissingFile(PathBuf::from(format!(
                "engine recording for stimulus {} (pass --engine-bed)",
                spec.id
            )))),
        },
        (None, false) => Ok(None),
    }
}

/// Renders one stimulus: source synthesis, pass-by propagation, tyre and
/// background beds, level normalization and 5 ms fades.
pub fn render_stimulus(spec: &StimulusSpec, cfg: &SynthConfig) -> Result<RenderedStimulus> {
    spec.validate()?;
    let traj = &cfg.trajectory;
    traj.validate()?;
    let lead = traj.emission_lead() + LEAD_MARGIN_S;
    let src_duration = traj.duration() + lead;
    let opts = RenderOptions {
        source_start: -lead,
        ..RenderOptions::default()
    };
    let sr = cfg.sample_rate;

    let tyre_src = signal::synth_noise_bed(&cfg.bed(NoiseBedKind::Tyre), src_duration, sr)?;
    let tyre = signal::normalize_to_level(
        &propagation::render_passby_with(&tyre_src, traj, &opts)?,
        cfg.tyre_dba,
    )?;
    let vehicle = match emission_source(spec, cfg, src_duration)? {
        Some(src) => {
            let moving = propagation::render_passby_with(&src, traj, &opts)?;
            let tone = signal::normalize_to_level(&moving, cfg.source_dba)?;
            signal::mix(&[tone, tyre], &[1.0, 1.0])?
        }
        None => tyre,
    };
    let n = vehicle.len();
    let background = signal::synth_noise_bed(&cfg.bed(NoiseBedKind::Background), traj.duration(), sr)?
        .truncated(n);
    let background = signal::normalize_to_level(&background, cfg.background_dba)?;

    let mono = signal::mix(&[vehicle.clone(), background.clone()], &[1.0, 1.0])?.with_fades(RAMP_MS);
    let gain = if spec.normalize {
        signal::normalization_gain(&mono, cfg.target_dba)?
    } else {
        1.0
    };
    let staged = propagation::stereo_stage(&vehicle, traj)?;
    let bg = background.channel(0);
    let stereo = CalibratedSignal::new(
        sr,
        staged
            .channels()
            .iter()
            .map(|c| c.iter().zip(bg).map(|(v, b)| v + b).collect())
            .collect(),
    )?;
    Ok(RenderedStimulus {
        id: spec.id,
        label: spec.label.clone(),
        mono: mono.scaled(gain),
        stereo: stereo.scaled(gain).with_fades(RAMP_MS),
        gain,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusEntry {
    pub id: u8,
    pub label: String,
    pub spec: StimulusSpec,
    pub mono_file: String,
    pub stereo_file: String,
    pub duration_s: f64,
    pub laeq_dba: f64,
    pub normalized: bool,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedStimulus {
    pub id: u8,
    pub reason: String,
}

/// Record of one synthesis run, written next to the audio files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub schema_version: u32,
    pub config: SynthConfig,
    pub stimuli: Vec<StimulusEntry>,
    #[serde(default)]
    pub skipped: Vec<SkippedStimulus>,
}

/// Renders `specs` in parallel and writes a float32 mono metric file and a
/// PCM24 stereo listening file per stimulus plus [`SYNTH_MANIFEST`].
///
/// A normalized file-bed stimulus without a recording is skipped and noted
/// in the manifest; any other failure aborts before a file is written.
pub fn cmd_synth(specs: &[StimulusSpec], cfg: &SynthConfig, out_dir: &Path) -> Result<SynthManifest> {
    let mut ids = BTreeSet::new();
    for s in specs {
        s.validate()?;
        if !ids.insert(s.id) {
            return Err(Error::invalid(format!("stimulus id {} appears twice", s.id)));
        }
    }
    let results: Vec<Result<Option<(StimulusEntry, Vec<u8>, Vec<u8>)>>> = specs
        .par_iter()
        .map(|spec| {
            if needs_engine_bed(spec) && cfg.engine_bed.is_none() {
                return Ok(None);
            }
            let r = render_stimulus(spec, cfg)?;
            let mono = io::encode_wav(&r.mono, WavFormat::Float32, cfg.full_scale_pa)?;
            let stereo = io::encode_wav(&r.stereo, WavFormat::Pcm24, cfg.full_scale_pa)?;
            let entry = StimulusEntry {
                id: r.id,
                label: r.label.clone(),
                spec: spec.clone(),
                mono_file: session::mono_file_name(r.id),
                stereo_file: session::stereo_file_name(r.id),
                duration_s: r.mono.duration(),
                laeq_dba: signal::laeq(&r.mono)?,
                normalized: spec.normalize,
                gain: r.gain,
            };
            Ok(Some((entry, mono, stereo)))
        })
        .collect();
    let mut manifest = SynthManifest {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        stimuli: Vec::new(),
        skipped: Vec::new(),
    };
    let mut files = Vec::new();
    for (spec, r) in specs.iter().zip(results) {
        match r? {
            Some((entry, mono, stereo)) => {
                files.push((out_dir.join(&entry.mono_file), mono));
                files.push((out_dir.join(&entry.stereo_file), stereo));
                manifest.stimuli.push(entry);
            }
            None => manifest.skipped.push(SkippedStimulus {
                id: spec.id,
                reason: "no engine recording supplied".into(),
            }),
        }
    }
    for (path, bytes) in files {
        io::atomic_write(&path, &bytes)?;
    }
    io::write_json(&out_dir.join(SYNTH_MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Every metric of one observer signal.
pub fn compute_metrics(stimulus_id: u8, mono: &CalibratedSignal) -> Result<MetricSet> {
    let frames = levels::third_octave_frames(mono, PNL_FRAME_S)?;
    let pnl = levels::pnl_chain(&frames)?;
    let sqm = SqmTraces::compute(mono)?.summarize(DEFAULT_WARMUP_S)?;
    Ok(MetricSet {
        stimulus_id,
        lp_max: levels::lp_max(mono, TimeWeighting::Fast)?,
        lpa_max: levels::lp_max(&levels::a_weight(mono), TimeWeighting::Fast)?,
        lpa_eq: signal::laeq(mono)?,
        pnlt_max: pnl.pnlt_max,
        epnl: pnl.epnl,
        n5: sqm.n5,
        s5: sqm.s5,
        k5: sqm.k5,
        r5: sqm.r5,
        fs5: sqm.fs5,
        pa: sqm.pa,
    })
}

/// Output of the metrics stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub noy_table_version: String,
    pub warmup_s: f64,
    pub metrics: Vec<MetricSet>,
}

/// Computes the metrics of every mono file listed in the synthesis
/// manifest of `audio_dir`, in stimulus order.
pub fn cmd_metrics(audio_dir: &Path) -> Result<MetricsReport> {
    let manifest: SynthManifest = io::read_json(&audio_dir.join(SYNTH_MANIFEST))?;
    let mut metrics = manifest
        .stimuli
        .par_iter()
        .map(|s| {
            let mono = io::read_wav(&audio_dir.join(&s.mono_file), manifest.config.full_scale_pa)?;
            if mono.sample_rate() != manifest.config.sample_rate {
                return Err(Error::SampleRateMismatch {
                    expected: manifest.config.sample_rate,
                    found: mono.sample_rate(),
                });
            }
            compute_metrics(s.id, &mono.downmix())
        })
        .collect::<Result<Vec<_>>>()?;
    metrics.sort_by_key(|m| m.stimulus_id);
    Ok(MetricsReport {
        schema_version: SCHEMA_VERSION,
        noy_table_version: NOY_TABLE_VERSION.into(),
        warmup_s: DEFAULT_WARMUP_S,
        metrics,
    })
}

pub fn write_metrics(report: &MetricsReport, path: &Path, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => io::write_json(path, report),
        OutputFormat::Csv => io::write_with(path, |buf| study::write_metrics_csv(&report.metrics, buf)),
    }
}

/// Reads metric sets from a metrics report (`.json`) or CSV table.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricSet>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let value: serde_json::Value = io::read_json(path)?;
        if value.is_array() {
            return Ok(serde_json::from_value(value)?);
        }
        let report: MetricsReport = serde_json::from_value(value)?;
        return Ok(report.metrics);
    }
    study::read_metrics_csv(fs::File::open(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusBox {
    pub stimulus_id: u8,
    #[serde(flatten)]
    pub stats: BoxStats,
}

/// Output of the analysis stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub excluded: Vec<u8>,
    pub correlations: Vec<CorrelationResult>,
    pub box_plots: Vec<StimulusBox>,
    pub scatter: Scatter,
}

/// Correlation table, per-stimulus box plots and the PA scatter.
pub fn analyze(
    metrics: &[MetricSet],
    records: &[study::RatingRecord],
    exclude: &BTreeSet<u8>,
) -> Result<AnalysisReport> {
    let summaries = study::mean_ratings(records);
    let metric_ids: BTreeSet<u8> = metrics.iter().map(|m| m.stimulus_id).collect();
    let rated_ids: BTreeSet<u8> = summaries.keys().copied().collect();
    if metric_ids != rated_ids {
        return Err(Error::Mismatch(format!(
            "metric stimuli {metric_ids:?} differ from rated stimuli {rated_ids:?}"
        )));
    }
    let means: BTreeMap<u8, f64> = summaries.iter().map(|(k, v)| (*k, v.mean)).collect();
    let correlations = study::correlation_table(metrics, &means, exclude)?;
    let box_plots = rated_ids
        .iter()
        .map(|&id| {
            Ok(StimulusBox {
                stimulus_id: id,
                stats: study::describe(records, id)?,
            })
        })
        .collect::<Result<_>>()?;
    let scatter = study::scatter(metrics, &summaries, exclude, Metric::PA)?;
    Ok(AnalysisReport {
        excluded: exclude.iter().copied().collect(),
        correlations,
        box_plots,
        scatter,
    })
}

/// Runs [`analyze`] on files and writes the correlation table, box-plot
/// statistics, scatter data and their plots into `out_dir`.
pub fn cmd_analyze(
    metrics_path: &Path,
    ratings_path: &Path,
    exclude: &BTreeSet<u8>,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<AnalysisReport> {
    let metrics = read_metrics(metrics_path)?;
    let records = study::load_ratings(ratings_path)?;
    let report = analyze(&metrics, &records, exclude)?;
    let table = out_dir.join(format!("correlation_table.{}", format.extension()));
    match format {
        OutputFormat::Csv => {
            io::write_with(&table, |b| study::write_table_csv(&report.correlations, b))?;
            io::write_with(&out_dir.join("scatter_PA.csv"), |b| report.scatter.write_csv(b))?;
        }
        OutputFormat::Json => {
            io::write_json(&table, &report.correlations)?;
            io::write_json(&out_dir.join("scatter_PA.json"), &report.scatter)?;
        }
    }
    io::write_json(&out_dir.join("box_plots.json"), &report.box_plots)?;
    let boxes: Vec<BoxStats> = report.box_plots.iter().map(|b| b.stats.clone()).collect();
    io::atomic_write(&out_dir.join("box_plots.png"), &plot::box_plot_png(&boxes)?)?;
    io::atomic_write(&out_dir.join("scatter_PA.png"), &plot::scatter_png(&report.scatter)?)?;
    Ok(report)
}

/// Highest frequency shown in spectrogram images, Hz.
pub const SPECTROGRAM_F_MAX: f64 = 5000.0;
/// Dynamic range of spectrogram images, dB.
pub const SPECTROGRAM_RANGE_DB: f64 = 80.0;

/// Spectrogram CSV and PNG of a WAV file (stereo files are downmixed).
/// Returns the paths written.
pub fn cmd_spectrogram(
    audio: &Path,
    out_dir: &Path,
    full_scale_pa: f64,
) -> Result<(PathBuf, PathBuf)> {
    let sig = io::read_wav(audio, full_scale_pa)?.downmix();
    let spec = levels::spectrogram(&sig, &SpectrogramParams::default())?;
    let stem = audio
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "audio".into());
    let csv = out_dir.join(format!("{stem}_spectrogram.csv"));
    let png = out_dir.join(format!("{stem}_spectrogram.png"));
    io::write_with(&csv, |b| spec.write_csv(b))?;
    io::atomic_write(
        &png,
        &plot::spectrogram_png(&spec, SPECTROGRAM_F_MAX, SPECTROGRAM_RANGE_DB)?,
    )?;
    Ok((csv, png))
}

/// Builds a runner bundle in `out_dir`: the stereo files of all fifteen
/// stimuli, the session manifest and its JSON schema.
pub fn cmd_session(audio_dir: &Path, out_dir: &Path, seed: u64, session_id: &str) -> Result<SessionManifest> {
    let synth: SynthManifest = io::read_json(&audio_dir.join(SYNTH_MANIFEST))?;
    let manifest = SessionManifest::new(
        session_id,
        seed,
        synth.config.sample_rate,
        synth.config.full_scale_pa,
        synth.config.trajectory,
    );
    let mut copies = Vec::new();
    for id in 1..=session::EXPERIMENTAL_TRIALS as u8 {
        let Some(entry) = synth.stimuli.iter().find(|s| s.id == id) else {
            return Err(Error::MissingFile(audio_dir.join(session::stereo_file_name(id))));
        };
        let src = audio_dir.join(&entry.stereo_file);
        if !src.exists() {
            return Err(Error::MissingFile(src));
        }
        copies.push((src, out_dir.join(session::stereo_file_name(id))));
    }
    manifest.validate()?;
    for (src, dst) in copies {
        let same = fs::canonicalize(&src).ok() == fs::canonicalize(&dst).ok();
        if !same {
            io::atomic_write(&dst, &fs::read(&src)?)?;
        }
    }
    io::write_json(&out_dir.join(SESSION_MANIFEST), &manifest)?;
    io::write_json(&out_dir.join(SESSION_SCHEMA), &session::manifest_schema())?;
    Ok(manifest)
}
