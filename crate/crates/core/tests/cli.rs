use std::path::Path;
use std::process::{Command, Output};

use evsound::io::{write_wav, WavFormat, FULL_SCALE_PA};
use evsound::study::{write_metrics_csv, write_ratings_csv, KeypressTimeline, MetricSet, RatingRecord};
use evsound::CalibratedSignal;

fn evsound(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsound"))
        .env_remove("EVSOUND_OUT_DIR")
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .unwrap()
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr)));
    v["error"].as_str().unwrap().to_string()
}

fn silence(path: &Path) {
    let s = CalibratedSignal::new(48_000, vec![vec![0.0; 48_000]]).unwrap();
    write_wav(path, &s, WavFormat::Float32, FULL_SCALE_PA).unwrap();
}

fn decode_png(path: &Path) -> (usize, usize, Vec<u8>) {
    let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(path).unwrap()));
    let mut reader = dec.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width as usize, info.height as usize, buf)
}

#[test]
fn tone_above_nyquist_exits_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"[{"id": 1, "kind": "pure", "principal_freq": 30000}]"#).unwrap();
    let out = evsound(
        dir.path(),
        &["synth", "--spec", spec.to_str().unwrap(), "--sample-rate", "48000"],
    );
    assert_eq!(error_kind(&out), "above_nyquist");
    assert!(!dir.path().join("stimuli").join("synth_manifest.json").exists());
}

#[test]
fn silent_file_gives_uniform_spectrogram_image() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("quiet.wav");
    silence(&wav);
    let out = evsound(dir.path(), &["spectrogram", wav.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, _, pixels) = decode_png(&dir.path().join("spectrograms/quiet_spectrogram.png"));
    assert!(pixels.chunks(3).all(|p| p == &pixels[..3]));
}

/// Colour ramp applied to `1 - (top - v) / range`.
fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [
        ((3.0 * t).min(1.0) * 255.0) as u8,
        ((3.0 * t - 1.0).clamp(0.0, 1.0) * 255.0) as u8,
        ((3.0 * t - 2.0).clamp(0.0, 1.0) * 255.0) as u8,
    ]
}

#[test]
fn spectrogram_csv_and_image_share_one_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("tone.wav");
    let n = 96_000;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / 48_000.0;
            0.2 * (2.0 * std::f64::consts::PI * (500.0 + 1000.0 * t) * t).sin()
        })
        .collect();
    write_wav(&wav, &CalibratedSignal::new(48_000, vec![x]).unwrap(), WavFormat::Float32, FULL_SCALE_PA).unwrap();
    let out = evsound(dir.path(), &["spectrogram", wav.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(dir.path().join("spectrograms/tone_spectrogram.csv")).unwrap();
    let frames = rdr.headers().unwrap().len() - 1;
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .filter(|r: &Vec<f64>| r[0] <= 5000.0)
        .collect();
    let (w, h, pixels) = decode_png(&dir.path().join("spectrograms/tone_spectrogram.png"));
    assert_eq!((w, h), (frames, rows.len()));
    let top = rows.iter().flat_map(|r| r[1..].iter()).copied().fold(f64::NEG_INFINITY, f64::max);
    let mut worst = 0i32;
    for (k, row) in rows.iter().enumerate() {
        let y = h - 1 - k;
        for x in 0..w {
            let want = ramp(1.0 - (top - row[x + 1]) / 80.0);
            let got = &pixels[3 * (y * w + x)..3 * (y * w + x) + 3];
            for c in 0..3 {
                worst = worst.max((want[c] as i32 - got[c] as i32).abs());
            }
        }
    }
    // CSV values carry two decimals
    assert!(worst <= 2, "largest channel difference {worst}");
}

#[test]
fn session_without_audio_is_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = evsound(dir.path(), &["session", "--audio-dir", empty.to_str().unwrap()]);
    assert_eq!(error_kind(&out), "missing_file");
    assert!(!dir.path().join("session").join("session_manifest.json").exists());
}

fn metrics_file(path: &Path, ids: impl Iterator<Item = u8>) {
    let sets: Vec<MetricSet> = ids
        .map(|id| MetricSet {
            stimulus_id: id,
            lp_max: 70.0 + id as f64,
            lpa_max: 68.0 + (id % 4) as f64,
            lpa_eq: 65.0,
            pnlt_max: 80.0 + (id % 5) as f64,
            epnl: 75.0 + (id % 3) as f64,
            n5: 10.0 + id as f64,
            s5: 1.0 + 0.05 * (id % 6) as f64,
            k5: 0.1 * (id % 4) as f64,
            r5: 0.01 * (id % 7) as f64,
            fs5: 0.02 * (id % 5) as f64,
            pa: 12.0 + 1.5 * id as f64,
        })
        .collect();
    let mut buf = Vec::new();
    write_metrics_csv(&sets, &mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

fn ratings_file(path: &Path, ids: impl Iterator<Item = u8> + Clone) {
    let records: Vec<RatingRecord> = (0..5)
        .flat_map(|p| {
            ids.clone().map(move |id| RatingRecord {
                participant_id: format!("P{p}"),
                stimulus_id: id,
                annoyance: ((id as usize + p) % 11) as u8,
                noticeability: 5,
                informativeness: 5,
                keypress_timeline: KeypressTimeline::default(),
            })
        })
        .collect();
    let mut buf = Vec::new();
    write_ratings_csv(&records, &mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

#[test]
fn analyze_rejects_mismatched_stimulus_ids() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (dir.path().join("metrics.csv"), dir.path().join("ratings.csv"));
    metrics_file(&m, 1..=15);
    ratings_file(&r, 1..=12);
    let out = evsound(
        dir.path(),
        &["analyze", "--metrics", m.to_str().unwrap(), "--ratings", r.to_str().unwrap()],
    );
    assert_eq!(error_kind(&out), "mismatch");
}

#[test]
fn analyze_writes_table_in_requested_format() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (dir.path().join("metrics.csv"), dir.path().join("ratings.csv"));
    metrics_file(&m, 1..=15);
    ratings_file(&r, 1..=15);
    let out = evsound(
        dir.path(),
        &[
            "analyze", "--metrics", m.to_str().unwrap(), "--ratings", r.to_str().unwrap(),
            "--exclude", "14,15", "--format", "json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("analysis/correlation_table.json")).unwrap()).unwrap();
    let rows = table.as_array().unwrap();
    assert!(rows.iter().all(|r| r["n"] == 13));
    assert!(dir.path().join("analysis/box_plots.png").exists());
    assert!(dir.path().join("analysis/scatter_PA.png").exists());

    let bad = evsound(
        dir.path(),
        &["analyze", "--metrics", m.to_str().unwrap(), "--ratings", r.to_str().unwrap(), "--exclude", "x"],
    );
    assert_eq!(error_kind(&bad), "invalid_parameter");
}

#[test]
fn environment_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("quiet.wav");
    silence(&wav);
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_evsound"))
        .current_dir(dir.path())
        .env("EVSOUND_OUT_DIR", &target)
        .args(["spectrogram", wav.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("spectrograms/quiet_spectrogram.csv").exists());
    assert!(!dir.path().join("evsound_out").exists());
}
