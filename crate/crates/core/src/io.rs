//! Calibrated WAV files and atomic output writes.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

/// Pascal represented by a full-scale sample (114 dB SPL).
pub const FULL_SCALE_PA: f64 = 20.0;

const PCM24_MAX: f64 = 8_388_607.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavFormat {
    /// 32-bit IEEE float, used for metric files.
    #[default]
    Float32,
    /// 24-bit integer PCM, used for listening files.
    Pcm24,
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Renders into a buffer with `f`, then writes it atomically.
pub fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    atomic_write(path, &buf)
}

/// Fails with the missing headroom when the signal peak exceeds
/// `full_scale_pa`.
pub fn check_headroom(signal: &CalibratedSignal, full_scale_pa: f64) -> Result<()> {
    let peak = signal.peak();
    if peak > full_scale_pa {
        return Err(Error::Clipping {
            peak_pa: peak,
            full_scale_pa,
            headroom_db: 20.0 * (peak / full_scale_pa).log10(),
        });
    }
    Ok(())
}

/// WAV bytes of `signal`, with `full_scale_pa` mapped to full scale.
pub fn encode_wav(signal: &CalibratedSignal, format: WavFormat, full_scale_pa: f64) -> Result<Vec<u8>> {
    if !(full_scale_pa > 0.0) {
        return Err(Error::invalid("full scale must be positive"));
    }
    check_headroom(signal, full_scale_pa)?;
    let spec = WavSpec {
        channels: signal.num_channels() as u16,
        sample_rate: signal.sample_rate(),
        bits_per_sample: match format {
            WavFormat::Float32 => 32,
            WavFormat::Pcm24 => 24,
        },
        sample_format: match format {
            WavFormat::Float32 => SampleFormat::Float,
            WavFormat::Pcm24 => SampleFormat::Int,
        },
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cursor, spec)?;
        let chans = signal.channels();
        for i in 0..signal.len() {
            for c in chans {
                let v = c[i] / full_scale_pa;
                match format {
                    WavFormat::Float32 => w.write_sample(v as f32)?,
                    WavFormat::Pcm24 => w.write_sample((v * PCM24_MAX).round() as i32)?,
                }
            }
        }
        w.finalize()?;
    }
    Ok(cursor.into_inner())
}

pub fn write_wav(
    path: &Path,
    signal: &CalibratedSignal,
    format: WavFormat,
    full_scale_pa: f64,
) -> Result<()> {
    atomic_write(path, &encode_wav(signal, format, full_scale_pa)?)
}

/// Reads a WAV file as pressure, with full scale equal to `full_scale_pa`.
pub fn read_wav(path: &Path, full_scale_pa: f64) -> Result<CalibratedSignal> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = hound::WavReader::open(path)?;
    let spec = r.spec();
    let n_ch = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()?,
        SampleFormat::Int => {
            let max = (1i64 << (spec.bits_per_sample - 1)) as f64 - 1.0;
            r.samples::<i32>()
                .map(|s| s.map(|v| v as f64 / max))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n_ch.max(1)); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (c, v) in channels.iter_mut().zip(frame) {
            c.push(v * full_scale_pa);
        }
    }
    CalibratedSignal::new(spec.sample_rate, channels)
}
