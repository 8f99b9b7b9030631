//! Conventional level metrics.

mod octave;
mod pnl;
mod spectrogram;

pub use octave::{third_octave_frames, ThirdOctaveFrame, PNL_BAND_COUNT, PNL_FRAME_S};
pub use pnl::{noy, pnl_chain, pnl_frame, tone_correction, PnlResult, NOY_TABLE_VERSION};
pub use spectrogram::{spectrogram, Spectrogram, SpectrogramParams};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dsp::{self, Biquad, Sos, P_REF};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

/// Level (or other dB quantity) sampled over time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl LevelTrace {
    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeWeighting {
    /// 125 ms
    #[default]
    Fast,
    /// 1 s
    Slow,
}

impl TimeWeighting {
    pub fn tau(self) -> f64 {
        match self {
            TimeWeighting::Fast => 0.125,
            TimeWeighting::Slow => 1.0,
        }
    }
}

// IEC 61672 pole frequencies, Hz.
const A_F1: f64 = 20.598_997;
const A_F2: f64 = 107.652_65;
const A_F3: f64 = 737.862_23;
const A_F4: f64 = 12_194.217;

/// A-weighting filter for sample rate `fs`.
///
/// The four low poles and one of the two 12.2 kHz poles are bilinear
/// mapped; the other 12.2 kHz pole is matched-z mapped. The two mappings err
/// in opposite directions near the top of the band and cancel to < 0.1 dB up
/// to 10 kHz at 48 kHz. Normalised to 0 dB at 1 kHz.
pub fn a_weighting_filter(fs: f64) -> Sos {
    use rustfft::num_complex::Complex64 as C;
    let bilinear = |f: f64| {
        let w = 2.0 * PI * f / (2.0 * fs);
        C::new((1.0 - w) / (1.0 + w), 0.0)
    };
    let matched = C::new((-2.0 * PI * A_F4 / fs).exp(), 0.0);
    let one = C::new(1.0, 0.0);
    let section = |zeros: [C; 2], poles: [C; 2]| Biquad {
        b0: 1.0,
        b1: -(zeros[0] + zeros[1]).re,
        b2: (zeros[0] * zeros[1]).re,
        a1: -(poles[0] + poles[1]).re,
        a2: (poles[0] * poles[1]).re,
    };
    let mut sos = Sos {
        sections: vec![
            section([one, one], [bilinear(A_F1), bilinear(A_F1)]),
            section([one, one], [bilinear(A_F2), bilinear(A_F3)]),
            section([C::new(-1.0, 0.0), C::new(0.0, 0.0)], [bilinear(A_F4), matched]),
        ],
    };
    let g = sos.response(1000.0, fs).norm();
    let first = &mut sos.sections[0];
    first.b0 /= g;
    first.b1 /= g;
    first.b2 /= g;
    sos
}

/// Applies A-weighting to every channel.
pub fn a_weight(signal: &CalibratedSignal) -> CalibratedSignal {
    let filter = a_weighting_filter(signal.sample_rate() as f64);
    let channels = signal.channels().iter().map(|c| filter.filter(c)).collect();
    CalibratedSignal::new(signal.sample_rate(), channels)
        .expect("filtering preserves shape")
        .with_calibration_of(signal)
}

/// Equivalent level `10·log10(mean(p²)/p0²)` over the whole signal.
pub fn lp_eq(signal: &CalibratedSignal) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::Empty("level of an empty signal".into()));
    }
    let ms = signal
        .channels()
        .iter()
        .map(|c| dsp::mean_square(c))
        .sum::<f64>()
        / signal.num_channels() as f64;
    if ms <= 0.0 {
        return Err(Error::Silent);
    }
    Ok(10.0 * (ms / (P_REF * P_REF)).log10())
}

/// Exponentially time-weighted mean square of one channel.
fn time_weighted_power(x: &[f64], tw: TimeWeighting, fs: f64) -> Vec<f64> {
    let a = dsp::one_pole_coefficient(tw.tau(), fs);
    let mut y = 0.0;
    x.iter()
        .map(|v| {
            y = a * y + (1.0 - a) * v * v;
            y
        })
        .collect()
}

/// Time-weighted level sampled every `step_s` seconds.
pub fn level_trace(signal: &CalibratedSignal, tw: TimeWeighting, step_s: f64) -> Result<LevelTrace> {
    let x = signal.mono_samples()?;
    let fs = signal.sample_rate() as f64;
    let step = ((step_s * fs).round() as usize).max(1);
    let p = time_weighted_power(x, tw, fs);
    let mut trace = LevelTrace::default();
    for i in (step - 1..p.len()).step_by(step) {
        trace.times.push((i + 1) as f64 / fs);
        trace.values.push(dsp::power_to_db(p[i]));
    }
    Ok(trace)
}

/// Maximum of the time-weighted level.
pub fn lp_max(signal: &CalibratedSignal, tw: TimeWeighting) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::Empty("level of an empty signal".into()));
    }
    let fs = signal.sample_rate() as f64;
    let max = signal
        .channels()
        .iter()
        .map(|c| {
            time_weighted_power(c, tw, fs)
                .into_iter()
                .fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::Silent);
    }
    Ok(10.0 * (max / (P_REF * P_REF)).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::synth_pure_tone;

    const SR: u32 = 48_000;

    fn gain_db(freq: f64) -> f64 {
        20.0 * a_weighting_filter(SR as f64).response(freq, SR as f64).norm().log10()
    }

    #[test]
    fn a_weighting_reference_points() {
        assert!(gain_db(1000.0).abs() < 0.05);
        assert!((gain_db(100.0) + 19.1).abs() < 0.3);
        assert!((gain_db(10_000.0) + 2.5).abs() < 0.3);
    }

    #[test]
    fn a_weighting_measured_on_sines() {
        for (f, expected) in [(1000.0, 0.0), (100.0, -19.1), (10_000.0, -2.5)] {
            let s = synth_pure_tone(f, 2.0, SR, 1.0).unwrap();
            let w = a_weight(&s);
            // skip the filter transient
            let tail = CalibratedSignal::mono(SR, w.channel(0)[SR as usize..].to_vec()).unwrap();
            let g = lp_eq(&tail).unwrap() - s.leq_db();
            assert!((g - expected).abs() < 0.3, "{f} Hz: {g}");
        }
    }

    #[test]
    fn lp_eq_calibration_and_scaling() {
        let a = 2f64.sqrt() * 0.02;
        let s = synth_pure_tone(1000.0, 1.0, SR, a).unwrap();
        assert!((lp_eq(&s).unwrap() - 60.0).abs() < 0.01);
        let d = lp_eq(&s.scaled(2.0)).unwrap() - lp_eq(&s).unwrap();
        assert!((d - 6.02).abs() < 0.01);
        let silent = CalibratedSignal::silence(SR, 10).unwrap();
        assert!(matches!(lp_eq(&silent), Err(Error::Silent)));
    }

    #[test]
    fn lp_max_of_stationary_sine() {
        let a = 2f64.sqrt() * 0.02;
        let s = synth_pure_tone(1000.0, 8.0, SR, a).unwrap();
        for tw in [TimeWeighting::Fast, TimeWeighting::Slow] {
            let l = lp_max(&s, tw).unwrap();
            assert!((l - 60.0).abs() < 0.1, "{tw:?}: {l}");
            // the exponential average starts from zero, so it approaches
            // the mean from below on a stationary signal
            assert!(l >= lp_eq(&s).unwrap() - 0.01);
        }
    }

    #[test]
    fn level_trace_is_increasing_in_time() {
        let s = synth_pure_tone(1000.0, 1.0, SR, 0.1).unwrap();
        let t = level_trace(&s, TimeWeighting::Fast, 0.01).unwrap();
        assert_eq!(t.times.len(), 100);
        assert!(t.times.windows(2).all(|w| w[1] > w[0]));
    }
}
