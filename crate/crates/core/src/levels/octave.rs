use serde::{Deserialize, Serialize};

use crate::dsp::{self, RealFft};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

pub const PNL_BAND_COUNT: usize = 24;
pub const PNL_FRAME_S: f64 = 0.5;

/// Band numbers of the 50 Hz and 10 kHz third octaves (1 kHz is band 30).
const FIRST_BAND: i32 = 17;

/// Third-octave band levels of one analysis frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirdOctaveFrame {
    /// Frame centre, s.
    pub time: f64,
    /// dB re 20 µPa, bands 50 Hz to 10 kHz.
    pub band_levels: [f64; PNL_BAND_COUNT],
}

impl ThirdOctaveFrame {
    pub fn band_centres() -> [f64; PNL_BAND_COUNT] {
        std::array::from_fn(|i| dsp::third_octave_centre(FIRST_BAND + i as i32))
    }
}

/// Consecutive non-overlapping frames of `frame_s` seconds, Hann weighted,
/// with band powers integrated from the FFT bins falling in each band.
pub fn third_octave_frames(signal: &CalibratedSignal, frame_s: f64) -> Result<Vec<ThirdOctaveFrame>> {
    let x = signal.mono_samples()?;
    let fs = signal.sample_rate() as f64;
    if !(frame_s > 0.0) {
        return Err(Error::invalid("frame length must be positive"));
    }
    let n = (frame_s * fs).round() as usize;
    if n < 16 || x.len() < n {
        return Err(Error::TooFewSamples {
            needed: n.max(16),
            have: x.len(),
        });
    }
    let window = dsp::hann(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = RealFft::new(n);
    let df = fs / n as f64;
    let bands: Vec<(usize, usize)> = ThirdOctaveFrame::band_centres()
        .iter()
        .map(|&fc| {
            let (lo, hi) = dsp::third_octave_edges(fc);
            ((lo / df).ceil() as usize, ((hi / df).ceil() as usize).min(n / 2 + 1))
        })
        .collect();

    let mut frames = Vec::with_capacity(x.len() / n);
    let mut buf = vec![0.0; n];
    for (k, chunk) in x.chunks_exact(n).enumerate() {
        for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = v * w;
        }
        let spec = fft.forward(&buf);
        let scale = 2.0 / (n as f64 * window_power);
        let mut band_levels = [0.0; PNL_BAND_COUNT];
        for (level, &(lo, hi)) in band_levels.iter_mut().zip(&bands) {
            let p: f64 = spec[lo..hi].iter().map(|c| c.norm_sqr()).sum::<f64>() * scale;
            *level = dsp::power_to_db(p);
        }
        frames.push(ThirdOctaveFrame {
            time: (k as f64 + 0.5) * n as f64 / fs,
            band_levels,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::LEVEL_FLOOR_DB;
    use crate::signal::synth_pure_tone;

    #[test]
    fn sine_lands_in_its_band() {
        let amp = 2f64.sqrt() * dsp::P_REF * 10f64.powf(70.0 / 20.0);
        let s = synth_pure_tone(1000.0, 2.0, 48_000, amp).unwrap();
        let frames = third_octave_frames(&s, PNL_FRAME_S).unwrap();
        assert_eq!(frames.len(), 4);
        let b = &frames[1].band_levels;
        // 1 kHz is the 14th band
        assert!((b[13] - 70.0).abs() < 0.5, "{}", b[13]);
        assert!(b[12] <= 40.0 && b[14] <= 40.0);
        assert!((frames[1].time - 0.75).abs() < 1e-12);
    }

    #[test]
    fn silence_is_floor() {
        let s = CalibratedSignal::silence(48_000, 48_000).unwrap();
        let frames = third_octave_frames(&s, PNL_FRAME_S).unwrap();
        assert!(frames
            .iter()
            .all(|f| f.band_levels.iter().all(|&l| l == LEVEL_FLOOR_DB)));
    }

    #[test]
    fn too_short() {
        let s = CalibratedSignal::silence(48_000, 1000).unwrap();
        assert!(third_octave_frames(&s, PNL_FRAME_S).is_err());
    }
}
