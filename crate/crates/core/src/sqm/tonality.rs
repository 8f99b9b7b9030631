//! Aures tonality.
//!
//! Per frame: pick spectral peaks, measure how far each one stands out
//! above the masking from the other tones, the noise in its critical band
//! and the threshold in quiet, weight by frequency and excess level, and
//! scale by the share of loudness that is not noise.

use serde::{Deserialize, Serialize};

use crate::dsp::{self, RealFft};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

use super::loudness::{band_centres, loudness_from_band_levels, N_THIRD_OCTAVES};
use super::{SqmMetric, SqmTrace};

/// Scale giving 1 t.u. for a 1 kHz tone at 60 dB.
const CALIBRATION: f64 = 1.4868;
/// Lines on each side of a peak that belong to the component.
const COMPONENT_HALF_WIDTH: usize = 3;
const PEAK_PROMINENCE_DB: f64 = 7.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TonalityParams {
    /// Frame length in seconds (8192 samples at 48 kHz).
    pub frame_s: f64,
    /// Hop as a fraction of the frame.
    pub hop_fraction: f64,
}

impl Default for TonalityParams {
    fn default() -> Self {
        TonalityParams {
            frame_s: 8192.0 / 48_000.0,
            hop_fraction: 0.5,
        }
    }
}

struct Component {
    freq: f64,
    bark: f64,
    level: f64,
    power: f64,
    first: usize,
    last: usize,
}

pub(crate) fn band_levels_from_power(power: &[f64], df: f64) -> [f64; N_THIRD_OCTAVES] {
    let mut out = [-100.0; N_THIRD_OCTAVES];
    for (o, fc) in out.iter_mut().zip(band_centres()) {
        let (lo, hi) = dsp::third_octave_edges(fc);
        let a = ((lo / df).ceil() as usize).min(power.len());
        let b = ((hi / df).ceil() as usize).min(power.len());
        *o = dsp::power_to_db(power[a..b].iter().sum());
    }
    out
}

struct FrameAnalyzer {
    n: usize,
    fft: RealFft,
    window: Vec<f64>,
    scale: f64,
    df: f64,
    bark: Vec<f64>,
    threshold: Vec<f64>,
    max_bin: usize,
}

impl FrameAnalyzer {
    fn new(n: usize, fs: f64) -> Self {
        let window = dsp::hann(n);
        let wp: f64 = window.iter().map(|w| w * w).sum();
        let df = fs / n as f64;
        let bins = n / 2 + 1;
        let bark = (0..bins).map(|k| dsp::hz_to_bark(k as f64 * df)).collect();
        let threshold = (0..bins)
            .map(|k| dsp::db_to_power(dsp::threshold_in_quiet_db((k as f64 * df).max(20.0))))
            .collect();
        FrameAnalyzer {
            n,
            fft: RealFft::new(n),
            window,
            scale: 2.0 / (n as f64 * wp),
            df,
            bark,
            threshold,
            max_bin: ((16_000.0f64.min(0.45 * fs)) / df) as usize,
        }
    }

    /// Bin range `[a, b)` within ±0.5 Bark of `z`.
    fn band_bins(&self, z: f64) -> (usize, usize) {
        let a = self.bark.partition_point(|&b| b < z - 0.5);
        let b = self.bark.partition_point(|&b| b <= z + 0.5);
        (a, b)
    }

    fn analyse(&self, frame: &[f64]) -> f64 {
        let buf: Vec<f64> = frame.iter().zip(&self.window).map(|(x, w)| x * w).collect();
        let spec = self.fft.forward(&buf);
        let power: Vec<f64> = spec[..self.n / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr() * self.scale)
            .collect();
        let level: Vec<f64> = power.iter().map(|&p| dsp::power_to_db(p)).collect();

        let mut prefix = vec![0.0; power.len() + 1];
        for (i, p) in power.iter().enumerate() {
            prefix[i + 1] = prefix[i] + p;
        }
        let h = COMPONENT_HALF_WIDTH;
        let lo_bin = ((20.0 / self.df).ceil() as usize).max(h);
        let hi_bin = self.max_bin.min(power.len() - h - 1);

        // candidates: local maxima standing 7 dB above the lines two and
        // three bins away, and above the rest of their critical band
        let mut comps = Vec::new();
        for k in lo_bin..hi_bin {
            let l = level[k];
            if !(l > level[k - 1] && l >= level[k + 1]) {
                continue;
            }
            if [2, 3].iter().any(|&j| {
                l - level[k - j] < PEAK_PROMINENCE_DB || l - level[k + j] < PEAK_PROMINENCE_DB
            }) {
                continue;
            }
            let (first, last) = (k - h, k + h);
            let p: f64 = power[first..=last].iter().sum();
            let fc: f64 = power[first..=last]
                .iter()
                .enumerate()
                .map(|(j, &pj)| pj * (first + j) as f64 * self.df)
                .sum::<f64>()
                / p;
            let z = dsp::hz_to_bark(fc);
            let (a, b) = self.band_bins(z);
            let rest = prefix[b] - prefix[a] - p;
            if p <= rest.max(0.0) {
                continue;
            }
            comps.push(Component {
                freq: fc,
                bark: z,
                level: dsp::power_to_db(p),
                power: p,
                first,
                last,
            });
        }
        if comps.is_empty() {
            return 0.0;
        }

        let mut noise = power.clone();
        for c in &comps {
            noise[c.first..=c.last].fill(0.0);
        }
        let mut noise_prefix = vec![0.0; noise.len() + 1];
        for (i, p) in noise.iter().enumerate() {
            noise_prefix[i + 1] = noise_prefix[i] + p;
        }

        let mut sum_sq = 0.0;
        for (i, c) in comps.iter().enumerate() {
            let (a, b) = self.band_bins(c.bark);
            let mut mask = noise_prefix[b] - noise_prefix[a];
            let kc = ((c.freq / self.df).round() as usize).min(self.threshold.len() - 1);
            mask += self.threshold[kc];
            for (j, o) in comps.iter().enumerate() {
                if i == j {
                    continue;
                }
                let dz = c.bark - o.bark;
                let slope = if dz < 0.0 {
                    27.0
                } else {
                    (24.0 + 230.0 / o.freq - 0.2 * o.level).max(0.0)
                };
                mask += o.power * 10f64.powf(-slope * dz.abs() / 10.0);
            }
            let excess = c.level - dsp::power_to_db(mask);
            if excess <= 0.0 {
                continue;
            }
            let r = c.freq / 700.0 + 700.0 / c.freq;
            let w2 = (1.0 + 0.2 * r * r).powf(-0.5);
            let w3 = 1.0 - (-excess / 15.0).exp();
            let w = (w2 * w3).powf(1.0 / 0.29);
            sum_sq += w * w;
        }
        if sum_sq == 0.0 {
            return 0.0;
        }
        let w_t = sum_sq.sqrt();

        let (n_total, _) = loudness_from_band_levels(&band_levels_from_power(&power, self.df));
        if n_total <= 0.0 {
            return 0.0;
        }
        let (n_noise, _) = loudness_from_band_levels(&band_levels_from_power(&noise, self.df));
        let w_gr = (1.0 - n_noise / n_total).clamp(0.0, 1.0);
        CALIBRATION * w_t.powf(0.29) * w_gr.powf(0.79)
    }
}

/// Tonality over time, one value per frame (frame centre times).
pub fn tonality_tv(signal: &CalibratedSignal, params: &TonalityParams) -> Result<SqmTrace> {
    if !signal.is_calibrated() {
        return Err(Error::Uncalibrated);
    }
    let x = signal.mono_samples()?;
    let fs = signal.sample_rate() as f64;
    let n = (params.frame_s * fs).round() as usize;
    if n < 64 {
        return Err(Error::invalid("tonality frame too short"));
    }
    if !(params.hop_fraction > 0.0 && params.hop_fraction <= 1.0) {
        return Err(Error::invalid("hop fraction must lie in (0, 1]"));
    }
    if x.len() < n {
        return Err(Error::TooFewSamples {
            needed: n,
            have: x.len(),
        });
    }
    let hop = ((n as f64 * params.hop_fraction).round() as usize).max(1);
    let analyzer = FrameAnalyzer::new(n, fs);
    let mut trace = SqmTrace::new(SqmMetric::Tonality);
    let mut start = 0;
    while start + n <= x.len() {
        trace.times.push((start as f64 + n as f64 / 2.0) / fs);
        trace.values.push(analyzer.analyse(&x[start..start + n]));
        start += hop;
    }
    Ok(trace)
}
