use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dsp::{self, RealFft, LEVEL_FLOOR_DB, P_REF};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramParams {
    /// Window length in samples.
    pub window: usize,
    /// Fraction of the window shared by consecutive frames, in [0, 1).
    pub overlap: f64,
}

impl Default for SpectrogramParams {
    fn default() -> Self {
        SpectrogramParams {
            window: 4096,
            overlap: 0.75,
        }
    }
}

impl SpectrogramParams {
    pub fn hop(&self) -> usize {
        ((self.window as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }
}

/// Power spectral density over time, dB re (20 µPa)²/Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// Frame centres, s.
    pub times: Vec<f64>,
    /// Bin frequencies, Hz (0 to Nyquist).
    pub freqs: Vec<f64>,
    /// `db[frame][bin]`
    pub db: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Frequency of the strongest bin in `frame` within `[f_lo, f_hi]`,
    /// refined by a parabola through the dB values of it and its neighbours.
    pub fn peak_frequency(&self, frame: usize, f_lo: f64, f_hi: f64) -> Option<f64> {
        let row = &self.db[frame];
        let k = (0..self.freqs.len())
            .filter(|&k| self.freqs[k] >= f_lo && self.freqs[k] <= f_hi)
            .max_by(|&a, &b| row[a].total_cmp(&row[b]))?;
        if k == 0 || k + 1 >= row.len() {
            return Some(self.freqs[k]);
        }
        let (a, b, c) = (row[k - 1], row[k], row[k + 1]);
        let denom = a - 2.0 * b + c;
        let offset = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        let df = self.freqs[1] - self.freqs[0];
        Some(self.freqs[k] + offset.clamp(-0.5, 0.5) * df)
    }

    /// CSV with one row per frequency bin; the header lists the frame times.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["freq_hz".to_string()];
        header.extend(self.times.iter().map(|t| format!("t={t:.4}")));
        w.write_record(&header)?;
        for (k, f) in self.freqs.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.times.len() + 1);
            rec.push(format!("{f:.3}"));
            rec.extend(self.db.iter().map(|frame| format!("{:.2}", frame[k])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Short-time power spectral density of a mono signal (Hann window).
pub fn spectrogram(signal: &CalibratedSignal, params: &SpectrogramParams) -> Result<Spectrogram> {
    let x = signal.mono_samples()?;
    let n = params.window;
    if n < 2 {
        return Err(Error::invalid("spectrogram window must be at least 2 samples"));
    }
    if !(0.0..1.0).contains(&params.overlap) {
        return Err(Error::invalid("overlap must lie in [0, 1)"));
    }
    if x.len() < n {
        return Err(Error::TooFewSamples {
            needed: n,
            have: x.len(),
        });
    }
    let fs = signal.sample_rate() as f64;
    let hop = params.hop();
    let window = dsp::hann(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    // one-sided PSD scale
    let scale = 2.0 / (fs * window_power * P_REF * P_REF);
    let fft = RealFft::new(n);
    let bins = n / 2 + 1;
    let freqs = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    let mut times = Vec::new();
    let mut db = Vec::new();
    let mut buf = vec![0.0; n];
    let mut start = 0;
    while start + n <= x.len() {
        for ((b, &v), &w) in buf.iter_mut().zip(&x[start..start + n]).zip(&window) {
            *b = v * w;
        }
        let spec = fft.forward(&buf);
        let row = spec[..bins]
            .iter()
            .map(|c| {
                let p = c.norm_sqr() * scale;
                if p > 0.0 {
                    (10.0 * p.log10()).max(LEVEL_FLOOR_DB)
                } else {
                    LEVEL_FLOOR_DB
                }
            })
            .collect();
        db.push(row);
        times.push((start as f64 + n as f64 / 2.0) / fs);
        start += hop;
    }
    Ok(Spectrogram { times, freqs, db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::synth_pure_tone;

    #[test]
    fn sine_gives_single_ridge() {
        let s = synth_pure_tone(1000.0, 1.0, 48_000, 0.1).unwrap();
        let sg = spectrogram(&s, &SpectrogramParams::default()).unwrap();
        let bin = 48_000.0 / 4096.0;
        for k in 0..sg.times.len() {
            let f = sg.peak_frequency(k, 0.0, 24_000.0).unwrap();
            assert!((f - 1000.0).abs() <= 0.05 * bin, "{f}");
        }
        assert_eq!(sg.times.len(), (48_000 - 4096) / 1024 + 1);
    }

    #[test]
    fn csv_shape() {
        let s = synth_pure_tone(1000.0, 0.2, 8_000, 0.1).unwrap();
        let p = SpectrogramParams {
            window: 256,
            overlap: 0.5,
        };
        let sg = spectrogram(&s, &p).unwrap();
        let mut out = Vec::new();
        sg.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 129 + 1);
        assert_eq!(lines[0].split(',').count(), sg.times.len() + 1);
    }

    #[test]
    fn window_longer_than_signal() {
        let s = synth_pure_tone(1000.0, 0.01, 8_000, 0.1).unwrap();
        assert!(spectrogram(&s, &SpectrogramParams::default()).is_err());
    }
}
