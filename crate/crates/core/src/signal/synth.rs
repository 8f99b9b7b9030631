use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stimulus::{BeepSegment, NoiseBedKind, NoiseBedSpec};
use super::CalibratedSignal;
use crate::dsp::{self, Sos};
use crate::error::{Error, Result};

/// Length of the raised-cosine ramp applied at every gate and beep boundary.
pub const RAMP_MS: f64 = 5.0;

// Discarded from the start of filtered noise so the bed starts in steady state.
const NOISE_PREROLL_S: f64 = 0.25;

pub(crate) fn raised_cosine(k: usize, n: usize) -> f64 {
    if k >= n {
        1.0
    } else {
        0.5 * (1.0 - (PI * k as f64 / n as f64).cos())
    }
}

fn sample_count(duration: f64, sample_rate: u32) -> Result<usize> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::invalid(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if sample_rate == 0 {
        return Err(Error::invalid("sample rate must be positive"));
    }
    Ok((duration * sample_rate as f64).round() as usize)
}

fn check_tone(freq: f64, sample_rate: u32, amplitude: f64) -> Result<()> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(freq > 0.0) {
        return Err(Error::invalid(format!("frequency must be positive, got {freq}")));
    }
    if freq >= nyquist {
        return Err(Error::AboveNyquist { freq, nyquist });
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid(format!(
            "amplitude must be non-negative, got {amplitude}"
        )));
    }
    Ok(())
}

fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    (ms / 1000.0 * sample_rate as f64).round() as usize
}

/// Gain of sample `k` inside a gated segment of `len` samples.
fn gate_gain(k: usize, len: usize, ramp: usize) -> f64 {
    let ramp = ramp.min(len / 2).max(1);
    raised_cosine(k, ramp) * raised_cosine(len - 1 - k, ramp)
}

/// Continuous sine of amplitude `amplitude` Pa, starting at phase 0.
pub fn synth_pure_tone(
    freq: f64,
    duration: f64,
    sample_rate: u32,
    amplitude: f64,
) -> Result<CalibratedSignal> {
    check_tone(freq, sample_rate, amplitude)?;
    let n = sample_count(duration, sample_rate)?;
    let w = 2.0 * PI * freq / sample_rate as f64;
    let samples = (0..n).map(|i| amplitude * (w * i as f64).sin()).collect();
    CalibratedSignal::mono(sample_rate, samples)
}

/// Tone gated on for `on_ms` and off for `off_ms`, starting ON at t = 0 and
/// repeating until `duration`. Each ON segment is ramped at both ends.
pub fn synth_intermittent(
    freq: f64,
    on_ms: f64,
    off_ms: f64,
    duration: f64,
    sample_rate: u32,
    amplitude: f64,
) -> Result<CalibratedSignal> {
    check_tone(freq, sample_rate, amplitude)?;
    if !(on_ms > 0.0) || !(off_ms > 0.0) {
        return Err(Error::invalid("on/off durations must be positive"));
    }
    let n = sample_count(duration, sample_rate)?;
    let on = ms_to_samples(on_ms, sample_rate).max(1);
    let cycle = on + ms_to_samples(off_ms, sample_rate).max(1);
    let ramp = ms_to_samples(RAMP_MS, sample_rate);
    let w = 2.0 * PI * freq / sample_rate as f64;
    let samples = (0..n)
        .map(|i| {
            let k = i % cycle;
            if k < on {
                amplitude * gate_gain(k, on, ramp) * (w * i as f64).sin()
            } else {
                0.0
            }
        })
        .collect();
    CalibratedSignal::mono(sample_rate, samples)
}

/// Principal sine plus two secondaries at `freq ± offset` with amplitude
/// `amplitude · secondary_gain` each.
pub fn synth_combined(
    freq: f64,
    offset: f64,
    secondary_gain: f64,
    duration: f64,
    sample_rate: u32,
    amplitude: f64,
) -> Result<CalibratedSignal> {
    if !(offset > 0.0) || offset >= freq {
        return Err(Error::invalid(format!(
            "secondary offset must lie in (0, {freq}) Hz, got {offset}"
        )));
    }
    if !(secondary_gain >= 0.0) {
        return Err(Error::invalid("secondary gain must be non-negative"));
    }
    check_tone(freq + offset, sample_rate, amplitude)?;
    let principal = synth_pure_tone(freq, duration, sample_rate, amplitude)?;
    if secondary_gain == 0.0 {
        return Ok(principal);
    }
    let sr = sample_rate as f64;
    let (wl, wh) = (2.0 * PI * (freq - offset) / sr, 2.0 * PI * (freq + offset) / sr);
    let a2 = amplitude * secondary_gain;
    let samples = principal
        .channel(0)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = i as f64;
            p + a2 * ((wl * t).sin() + (wh * t).sin())
        })
        .collect();
    CalibratedSignal::mono(sample_rate, samples)
}

/// 240 ms @ 1800 Hz, 10 ms pause, 240 ms @ 1900 Hz, 1000 ms pause.
pub fn default_double_beep() -> Vec<BeepSegment> {
    vec![
        BeepSegment::beep(240.0, 1800.0),
        BeepSegment::pause(10.0),
        BeepSegment::beep(240.0, 1900.0),
        BeepSegment::pause(1000.0),
    ]
}

/// Repeats a beep pattern from t = 0. With `repetitions = None` the pattern
/// continues cyclically to the end; otherwise silence follows the last
/// repetition. Every beep starts at phase 0 and is ramped at both ends.
pub fn synth_double_beep(
    pattern: &[BeepSegment],
    repetitions: Option<usize>,
    duration: f64,
    sample_rate: u32,
    amplitude: f64,
) -> Result<CalibratedSignal> {
    if pattern.is_empty() {
        return Err(Error::Empty("beep pattern".into()));
    }
    for seg in pattern {
        if !(seg.duration_ms > 0.0) {
            return Err(Error::invalid("beep segment durations must be positive"));
        }
        if let Some(f) = seg.freq_hz {
            check_tone(f, sample_rate, amplitude)?;
        }
    }
    let n = sample_count(duration, sample_rate)?;
    let lens: Vec<usize> = pattern
        .iter()
        .map(|s| ms_to_samples(s.duration_ms, sample_rate).max(1))
        .collect();
    let period: usize = lens.iter().sum();
    let ramp = ms_to_samples(RAMP_MS, sample_rate);
    let sr = sample_rate as f64;
    let mut samples = vec![0.0; n];
    let mut start = 0usize;
    let mut rep = 0usize;
    while start < n && repetitions.map_or(true, |r| rep < r) {
        let mut seg_start = start;
        for (seg, &len) in pattern.iter().zip(&lens) {
            if let Some(f) = seg.freq_hz {
                let w = 2.0 * PI * f / sr;
                for k in 0..len {
                    let i = seg_start + k;
                    if i >= n {
                        break;
                    }
                    samples[i] = amplitude * gate_gain(k, len, ramp) * (w * k as f64).sin();
                }
            }
            seg_start += len;
        }
        start += period;
        rep += 1;
    }
    CalibratedSignal::mono(sample_rate, samples)
}

/// Deterministic shaped noise with RMS `spec.gain` Pa.
pub fn synth_noise_bed(spec: &NoiseBedSpec, duration: f64, sample_rate: u32) -> Result<CalibratedSignal> {
    if !(spec.gain >= 0.0) {
        return Err(Error::invalid("noise gain must be non-negative"));
    }
    let n = sample_count(duration, sample_rate)?;
    let fs = sample_rate as f64;
    let preroll = (NOISE_PREROLL_S * fs) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = (0..n + preroll)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let (hp, lp) = match spec.kind {
        NoiseBedKind::Tyre => (60.0, 1000.0),
        NoiseBedKind::Background => (25.0, 450.0),
    };
    Sos::butter_highpass(2, hp, fs).filter_in_place(&mut x);
    Sos::butter_lowpass(4, lp, fs).filter_in_place(&mut x);
    let mut x = x.split_off(preroll);
    let rms = dsp::mean_square(&x).sqrt();
    let g = if rms > 0.0 { spec.gain / rms } else { 0.0 };
    for v in &mut x {
        *v *= g;
    }
    CalibratedSignal::mono(sample_rate, x)
}
