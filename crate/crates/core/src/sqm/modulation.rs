//! Roughness and fluctuation strength from critical-band envelopes.
//!
//! Both metrics share one auditory filter bank: 47 fourth-order gammatone
//! channels half a Bark apart whose bandwidth equals the critical
//! bandwidth. In each analysis frame the envelope of every channel is
//! weighted by a modulation transfer function (band-pass around 70 Hz for
//! roughness, around 4 Hz for fluctuation strength), turned into a
//! modulation depth, and scaled by how well the envelope correlates with
//! its neighbours one Bark away. The channel contributions are summed with
//! a critical-band-rate weighting.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, InverseFft, RealFft};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

use super::{SqmMetric, SqmTrace};

const CHANNELS: usize = 47;
const CHANNEL_SPACING_BARK: f64 = 0.5;
const ENVELOPE_RATE: f64 = 2000.0;
/// Further envelope decimation for fluctuation strength (to 200 Hz).
const FLUCTUATION_DECIMATION: usize = 10;

/// Scale giving 1 asper for a 1 kHz tone at 60 dB, 100 % modulated at 70 Hz.
const ROUGHNESS_CALIBRATION: f64 = 0.08934;
/// Scale giving 1 vacil for a 1 kHz tone at 60 dB, 100 % modulated at 4 Hz.
const FLUCTUATION_CALIBRATION: f64 = 0.031377;

// Critical-band-rate weighting of roughness contributions.
const ROUGHNESS_G_Z: [f64; 14] = [
    0.0, 1.0, 2.5, 4.9, 6.5, 8.0, 9.0, 10.0, 11.0, 11.5, 13.0, 17.5, 21.0, 24.0,
];
const ROUGHNESS_G: [f64; 14] = [
    0.0, 0.35, 0.7, 0.7, 1.1, 1.25, 1.26, 1.18, 1.08, 1.0, 0.66, 0.46, 0.38, 0.3,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub roughness_frame_s: f64,
    pub roughness_hop_s: f64,
    pub fluctuation_frame_s: f64,
    pub fluctuation_hop_s: f64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        ModulationParams {
            roughness_frame_s: 8192.0 / 48_000.0,
            roughness_hop_s: 4096.0 / 48_000.0,
            fluctuation_frame_s: 2.0,
            fluctuation_hop_s: 0.25,
        }
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    for i in 1..xs.len() {
        if x <= xs[i] {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + t * (ys[i] - ys[i - 1]);
        }
    }
    ys[ys.len() - 1]
}

/// Channel envelopes at `rate` Hz.
struct Envelopes {
    rate: f64,
    bark: Vec<f64>,
    freq: Vec<f64>,
    env: Vec<Vec<f64>>,
}

impl Envelopes {
    fn compute(x: &[f64], fs: f64) -> Envelopes {
        let decim = ((fs / ENVELOPE_RATE).round() as usize).max(1);
        let rate = fs / decim as f64;
        let n_out = x.len() / decim;
        let mut bark = Vec::new();
        let mut freq = Vec::new();
        let mut env = Vec::new();
        for i in 1..=CHANNELS {
            let z = CHANNEL_SPACING_BARK * i as f64;
            let f = dsp::bark_to_hz(z);
            if f >= 0.45 * fs {
                break;
            }
            let b = dsp::critical_bandwidth(f) / 0.9817;
            let a = (-2.0 * std::f64::consts::PI * b / fs).exp();
            let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f / fs);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut s = [Complex64::new(0.0, 0.0); 4];
            let mut out = Vec::with_capacity(n_out);
            let mut acc = 0.0;
            for (n, &v) in x.iter().enumerate() {
                let mut y = rot * v;
                for st in s.iter_mut() {
                    *st = *st * a + y * (1.0 - a);
                    y = *st;
                }
                acc += 2.0 * y.norm();
                if (n + 1) % decim == 0 {
                    out.push(acc / decim as f64);
                    acc = 0.0;
                }
                rot *= step;
                if n % 1024 == 1023 {
                    rot /= rot.norm();
                }
            }
            bark.push(z);
            freq.push(f);
            env.push(out);
        }
        Envelopes {
            rate,
            bark,
            freq,
            env,
        }
    }

    fn decimated(&self, factor: usize) -> Envelopes {
        Envelopes {
            rate: self.rate / factor as f64,
            bark: self.bark.clone(),
            freq: self.freq.clone(),
            env: self
                .env
                .iter()
                .map(|e| {
                    e.chunks_exact(factor)
                        .map(|c| c.iter().sum::<f64>() / factor as f64)
                        .collect()
                })
                .collect(),
        }
    }

    fn len(&self) -> usize {
        self.env.first().map_or(0, Vec::len)
    }
}

/// Per-frame modulation analysis with a given modulation weighting.
struct FrameWeighting<'a> {
    len: usize,
    fft: RealFft,
    ifft: InverseFft,
    window: Vec<f64>,
    window_power: f64,
    gain: Vec<f64>,
    envelopes: &'a Envelopes,
}

impl<'a> FrameWeighting<'a> {
    fn new(envelopes: &'a Envelopes, len: usize, weighting: impl Fn(f64) -> f64) -> Self {
        let fft_len = len.next_power_of_two() * 2;
        let df = envelopes.rate / fft_len as f64;
        let gain = (0..fft_len)
            .map(|k| {
                let f = if k <= fft_len / 2 { k } else { fft_len - k } as f64 * df;
                if f == 0.0 {
                    0.0
                } else {
                    weighting(f)
                }
            })
            .collect();
        let window = dsp::hann(len);
        let window_power = window.iter().map(|w| w * w).sum();
        FrameWeighting {
            len,
            fft: RealFft::new(fft_len),
            ifft: InverseFft::new(fft_len),
            window,
            window_power,
            gain,
            envelopes,
        }
    }

    /// Weighted envelopes, modulation depths and mean envelopes of one
    /// frame starting at `start`.
    fn analyse(&self, start: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut weighted = Vec::with_capacity(self.envelopes.env.len());
        let mut depth = Vec::with_capacity(self.envelopes.env.len());
        for (ch, e) in self.envelopes.env.iter().enumerate() {
            let seg = &e[start..start + self.len];
            let h0 = seg.iter().sum::<f64>() / self.len as f64;
            let rms_level = dsp::power_to_db(h0 * h0 / 2.0);
            if h0 <= 0.0 || rms_level < dsp::threshold_in_quiet_db(self.envelopes.freq[ch]) {
                weighted.push(vec![0.0; self.len]);
                depth.push(0.0);
                continue;
            }
            let ac: Vec<f64> = seg
                .iter()
                .zip(&self.window)
                .map(|(v, w)| (v - h0) * w)
                .collect();
            let mut spec = self.fft.forward(&ac);
            for (s, g) in spec.iter_mut().zip(&self.gain) {
                *s *= g;
            }
            self.ifft.inverse(&mut spec);
            let w: Vec<f64> = spec[..self.len].iter().map(|c| c.re).collect();
            let rms = (w.iter().map(|v| v * v).sum::<f64>() / self.window_power).sqrt();
            depth.push((std::f64::consts::SQRT_2 * rms / h0).min(1.0));
            weighted.push(w);
        }
        (weighted, depth)
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa <= 0.0 || bb <= 0.0 {
        return 0.0;
    }
    (ab / (aa * bb).sqrt()).max(0.0)
}

/// Channel contributions `m_i · k_{i-2,i} · k_{i,i+2}`.
fn contributions(weighted: &[Vec<f64>], depth: &[f64]) -> Vec<f64> {
    let n = depth.len();
    let k: Vec<f64> = (0..n)
        .map(|i| {
            if i + 2 < n {
                correlation(&weighted[i], &weighted[i + 2])
            } else {
                0.0
            }
        })
        .collect();
    (0..n)
        .map(|i| {
            let lo = if i >= 2 { k[i - 2] } else { k[i] };
            let hi = if i + 2 < n { k[i] } else { lo };
            depth[i] * lo * hi
        })
        .collect()
}

fn envelopes(signal: &CalibratedSignal) -> Result<Envelopes> {
    if !signal.is_calibrated() {
        return Err(Error::Uncalibrated);
    }
    let x = signal.mono_samples()?;
    Ok(Envelopes::compute(x, signal.sample_rate() as f64))
}

fn frames(
    env: &Envelopes,
    frame_s: f64,
    hop_s: f64,
    mut per_frame: impl FnMut(usize) -> f64,
    metric: SqmMetric,
) -> Result<SqmTrace> {
    let len = (frame_s * env.rate).round() as usize;
    let hop = ((hop_s * env.rate).round() as usize).max(1);
    if len < 8 {
        return Err(Error::invalid("modulation frame too short"));
    }
    if env.len() < len {
        return Err(Error::TooFewSamples {
            needed: (frame_s * env.rate).ceil() as usize,
            have: env.len(),
        });
    }
    let mut trace = SqmTrace::new(metric);
    let mut start = 0;
    while start + len <= env.len() {
        trace.times.push((start as f64 + len as f64 / 2.0) / env.rate);
        trace.values.push(per_frame(start));
        start += hop;
    }
    Ok(trace)
}

/// Roughness weighting of modulation frequency: band-pass peaking at 70 Hz.
fn roughness_weighting(fm: f64) -> f64 {
    let r = fm / 70.0 - 70.0 / fm;
    (1.0 + 0.64 * r * r).powf(-0.5)
}

/// Fluctuation weighting of modulation frequency: band-pass peaking at 4 Hz.
fn fluctuation_weighting(fm: f64) -> f64 {
    2.0 / (fm / 4.0 + 4.0 / fm)
}

/// Roughness over time, asper.
pub fn roughness_tv(signal: &CalibratedSignal, params: &ModulationParams) -> Result<SqmTrace> {
    roughness_from(&envelopes(signal)?, params)
}

/// Fluctuation strength over time, vacil.
pub fn fluctuation_tv(signal: &CalibratedSignal, params: &ModulationParams) -> Result<SqmTrace> {
    fluctuation_from(&envelopes(signal)?, params)
}

/// Both modulation metrics from a single pass of the filter bank.
pub fn modulation_tv(
    signal: &CalibratedSignal,
    params: &ModulationParams,
) -> Result<(SqmTrace, SqmTrace)> {
    let env = envelopes(signal)?;
    Ok((roughness_from(&env, params)?, fluctuation_from(&env, params)?))
}

fn roughness_from(env: &Envelopes, params: &ModulationParams) -> Result<SqmTrace> {
    let len = (params.roughness_frame_s * env.rate).round() as usize;
    let weighting = FrameWeighting::new(env, len.max(8), roughness_weighting);
    let g: Vec<f64> = env
        .bark
        .iter()
        .map(|&z| interp(&ROUGHNESS_G_Z, &ROUGHNESS_G, z))
        .collect();
    frames(
        env,
        params.roughness_frame_s,
        params.roughness_hop_s,
        |start| {
            let (w, m) = weighting.analyse(start);
            let c = contributions(&w, &m);
            ROUGHNESS_CALIBRATION * c.iter().zip(&g).map(|(c, g)| (g * c).powi(2)).sum::<f64>()
        },
        SqmMetric::Roughness,
    )
}

fn fluctuation_from(env: &Envelopes, params: &ModulationParams) -> Result<SqmTrace> {
    let env = env.decimated(FLUCTUATION_DECIMATION);
    let len = (params.fluctuation_frame_s * env.rate).round() as usize;
    let weighting = FrameWeighting::new(&env, len.max(8), fluctuation_weighting);
    frames(
        &env,
        params.fluctuation_frame_s,
        params.fluctuation_hop_s,
        |start| {
            let (w, m) = weighting.analyse(start);
            FLUCTUATION_CALIBRATION * contributions(&w, &m).iter().sum::<f64>()
        },
        SqmMetric::FluctuationStrength,
    )
}
