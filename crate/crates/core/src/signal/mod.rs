//! Calibrated pressure signals and the parametric source waveforms.
//!
//! A sample value `p` is a sound pressure of `p` pascal. Everything
//! downstream (levels, loudness, annoyance) relies on that convention, so a
//! signal read from disk without a known calibration factor is flagged as
//! uncalibrated and rejected by level-dependent metrics.

mod stimulus;
mod synth;

pub use stimulus::{stimulus_set, BeepSegment, NoiseBedKind, NoiseBedSpec, SourceSpec, StimulusSpec};
pub use synth::{
    default_double_beep, synth_combined, synth_double_beep, synth_intermittent, synth_noise_bed,
    synth_pure_tone, RAMP_MS,
};

use crate::dsp::{self, P_REF};
use crate::error::{Error, Result};
use crate::levels;

/// Sampled acoustic pressure at a point, in pascal.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedSignal {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
    calibrated: bool,
}

impl CalibratedSignal {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(Error::invalid(format!(
                "1 or 2 channels supported, got {}",
                channels.len()
            )));
        }
        let len = channels[0].len();
        if let Some(other) = channels.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch(len, other.len()));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("signal contains non-finite samples"));
        }
        Ok(CalibratedSignal {
            sample_rate,
            channels,
            calibrated: true,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn silence(sample_rate: u32, len: usize) -> Result<Self> {
        Self::mono(sample_rate, vec![0.0; len])
    }

    /// Marks the samples as relative units with unknown pressure scaling.
    pub fn into_uncalibrated(mut self) -> Self {
        self.calibrated = false;
        self
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibrated
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of frames (samples per channel).
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Samples of a mono signal; errors for stereo.
    pub fn mono_samples(&self) -> Result<&[f64]> {
        if self.channels.len() != 1 {
            return Err(Error::NotMono(self.channels.len()));
        }
        Ok(&self.channels[0])
    }

    /// Largest absolute sample value over all channels, Pa.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_silent(&self) -> bool {
        self.channels.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, gain: f64) -> Self {
        CalibratedSignal {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|v| v * gain).collect())
                .collect(),
            calibrated: self.calibrated,
        }
    }

    /// Channel average; identity for mono input.
    pub fn downmix(&self) -> Self {
        if self.channels.len() == 1 {
            return self.clone();
        }
        let n = self.channels.len() as f64;
        let samples = (0..self.len())
            .map(|i| self.channels.iter().map(|c| c[i]).sum::<f64>() / n)
            .collect();
        CalibratedSignal {
            sample_rate: self.sample_rate,
            channels: vec![samples],
            calibrated: self.calibrated,
        }
    }

    /// First `len` frames (or fewer if the signal is shorter).
    pub fn truncated(&self, len: usize) -> Self {
        CalibratedSignal {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c[..len.min(c.len())].to_vec())
                .collect(),
            calibrated: self.calibrated,
        }
    }

    /// Applies raised-cosine fades of `ms` milliseconds at both ends.
    pub fn with_fades(&self, ms: f64) -> Self {
        let n = ((ms / 1000.0) * self.sample_rate as f64).round() as usize;
        let n = n.min(self.len() / 2);
        let mut out = self.clone();
        for c in &mut out.channels {
            let len = c.len();
            for k in 0..n {
                let g = synth::raised_cosine(k, n);
                c[k] *= g;
                c[len - 1 - k] *= g;
            }
        }
        out
    }

    /// Equivalent level of all channels together, dB re 20 µPa.
    pub fn leq_db(&self) -> f64 {
        let ms = self.channels.iter().map(|c| dsp::mean_square(c)).sum::<f64>()
            / self.channels.len() as f64;
        dsp::power_to_db(ms)
    }

    pub(crate) fn with_calibration_of(mut self, other: &CalibratedSignal) -> Self {
        self.calibrated = other.calibrated;
        self
    }
}

/// Sample-wise weighted sum; shorter inputs are zero-padded at the tail.
pub fn mix(signals: &[CalibratedSignal], gains: &[f64]) -> Result<CalibratedSignal> {
    let first = signals
        .first()
        .ok_or_else(|| Error::Empty("mix needs at least one signal".into()))?;
    if signals.len() != gains.len() {
        return Err(Error::LengthMismatch(signals.len(), gains.len()));
    }
    for s in signals {
        if s.sample_rate != first.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: first.sample_rate,
                found: s.sample_rate,
            });
        }
        if s.num_channels() != first.num_channels() {
            return Err(Error::ChannelMismatch {
                expected: first.num_channels(),
                found: s.num_channels(),
            });
        }
    }
    let len = signals.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut channels = vec![vec![0.0; len]; first.num_channels()];
    for (s, &g) in signals.iter().zip(gains) {
        for (acc, src) in channels.iter_mut().zip(&s.channels) {
            for (a, v) in acc.iter_mut().zip(src) {
                *a += g * v;
            }
        }
    }
    let mut out = CalibratedSignal::new(first.sample_rate, channels)?;
    out.calibrated = signals.iter().all(|s| s.calibrated);
    Ok(out)
}

/// A-weighted equivalent level over the full duration, dBA.
pub fn laeq(signal: &CalibratedSignal) -> Result<f64> {
    let mut ms = 0.0;
    for c in signal.channels() {
        let mono = CalibratedSignal::mono(signal.sample_rate, c.clone())?;
        ms += dsp::mean_square(levels::a_weight(&mono).channel(0));
    }
    ms /= signal.num_channels() as f64;
    if ms <= 0.0 {
        return Err(Error::Silent);
    }
    Ok(10.0 * (ms / (P_REF * P_REF)).log10())
}

/// Scale factor that brings the full-duration L_A,eq to `target_dba`.
pub fn normalization_gain(signal: &CalibratedSignal, target_dba: f64) -> Result<f64> {
    if signal.is_silent() {
        return Err(Error::Silent);
    }
    let level = laeq(signal)?;
    Ok(10f64.powf((target_dba - level) / 20.0))
}

/// Returns the signal scaled by one scalar so its full-duration A-weighted
/// equivalent level equals `target_dba`.
pub fn normalize_to_level(signal: &CalibratedSignal, target_dba: f64) -> Result<CalibratedSignal> {
    let gain = normalization_gain(signal, target_dba)?;
    Ok(signal.scaled(gain))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, secs: f64) -> CalibratedSignal {
        synth_pure_tone(freq, secs, 48_000, amp).unwrap()
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(CalibratedSignal::new(48_000, vec![vec![0.0; 3], vec![0.0; 2]]).is_err());
        assert!(CalibratedSignal::mono(48_000, vec![f64::NAN]).is_err());
        assert!(CalibratedSignal::mono(0, vec![0.0]).is_err());
    }

    #[test]
    fn mix_identity_and_cancellation() {
        let x = sine(440.0, 0.1, 0.1);
        assert_eq!(mix(&[x.clone()], &[1.0]).unwrap(), x);
        let zero = mix(&[x.clone(), x.clone()], &[1.0, -1.0]).unwrap();
        assert!(zero.is_silent());
    }

    #[test]
    fn mix_pads_shorter_inputs() {
        let a = sine(440.0, 0.1, 0.2);
        let b = sine(440.0, 0.1, 0.1);
        let m = mix(&[a.clone(), b], &[1.0, 1.0]).unwrap();
        assert_eq!(m.len(), a.len());
        assert_eq!(m.channel(0)[a.len() - 1], a.channel(0)[a.len() - 1]);
    }

    #[test]
    fn mix_rejects_rate_mismatch() {
        let a = sine(440.0, 0.1, 0.1);
        let b = synth_pure_tone(440.0, 0.1, 44_100, 0.1).unwrap();
        assert!(matches!(
            mix(&[a, b], &[1.0, 1.0]),
            Err(Error::SampleRateMismatch { .. })
        ));
    }

    #[test]
    fn normalize_hits_target_and_is_idempotent() {
        let x = sine(1000.0, 0.05, 1.0);
        let y = normalize_to_level(&x, 65.0).unwrap();
        assert!((laeq(&y).unwrap() - 65.0).abs() < 0.01);
        let gain = normalization_gain(&y, 65.0).unwrap();
        assert!((gain - 1.0).abs() < 1e-6);
        // Unweighted level of a 1 kHz tone matches the A-weighted one.
        assert!((y.leq_db() - 65.0).abs() < 0.02);
    }

    #[test]
    fn normalize_rejects_silence() {
        let s = CalibratedSignal::silence(48_000, 100).unwrap();
        assert!(matches!(normalize_to_level(&s, 65.0), Err(Error::Silent)));
    }

    #[test]
    fn uncorrelated_beds_add_three_db() {
        let spec = |seed| NoiseBedSpec {
            kind: NoiseBedKind::Tyre,
            seed,
            gain: 0.02,
        };
        let a = synth_noise_bed(&spec(1), 5.0, 48_000).unwrap();
        let b = synth_noise_bed(&spec(2), 5.0, 48_000).unwrap();
        assert!((a.leq_db() - 60.0).abs() < 0.01);
        let m = mix(&[a, b], &[1.0, 1.0]).unwrap();
        assert!((m.leq_db() - 63.0).abs() < 0.3, "{}", m.leq_db());
    }
}
