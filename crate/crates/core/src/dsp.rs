//! Small DSP building blocks shared by the analysis modules.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reference sound pressure, 20 µPa.
pub const P_REF: f64 = 20e-6;

/// Level returned for zero energy, instead of -inf.
pub const LEVEL_FLOOR_DB: f64 = -100.0;

/// `10·log10(power / p0²)`, clamped at [`LEVEL_FLOOR_DB`].
pub fn power_to_db(mean_square: f64) -> f64 {
    if mean_square <= 0.0 {
        return LEVEL_FLOOR_DB;
    }
    (10.0 * (mean_square / (P_REF * P_REF)).log10()).max(LEVEL_FLOOR_DB)
}

pub fn db_to_power(level_db: f64) -> f64 {
    P_REF * P_REF * 10f64.powf(level_db / 10.0)
}

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Second-order section in transposed direct form II.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }

    fn from_poles_zeros(zeros: [Complex64; 2], poles: [Complex64; 2]) -> Self {
        let b1 = -(zeros[0] + zeros[1]).re;
        let b2 = (zeros[0] * zeros[1]).re;
        let a1 = -(poles[0] + poles[1]).re;
        let a2 = (poles[0] * poles[1]).re;
        Biquad {
            b0: 1.0,
            b1,
            b2,
            a1,
            a2,
        }
    }

    fn lowpass(fc: f64, q: f64, fs: f64) -> Self {
        let w0 = 2.0 * PI * fc / fs;
        let alpha = w0.sin() / (2.0 * q);
        let cw = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cw) / 2.0 / a0,
            b1: (1.0 - cw) / a0,
            b2: (1.0 - cw) / 2.0 / a0,
            a1: -2.0 * cw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn highpass(fc: f64, q: f64, fs: f64) -> Self {
        let w0 = 2.0 * PI * fc / fs;
        let alpha = w0.sin() / (2.0 * q);
        let cw = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 + cw) / 2.0 / a0,
            b1: -(1.0 + cw) / a0,
            b2: (1.0 + cw) / 2.0 / a0,
            a1: -2.0 * cw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }
}

/// Cascade of second-order sections.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

impl Sos {
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.filter_in_place(&mut y);
        y
    }

    pub fn filter_in_place(&self, y: &mut [f64]) {
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in y.iter_mut() {
                let x = *v;
                let out = s.b0 * x + z1;
                z1 = s.b1 * x - s.a1 * out + z2;
                z2 = s.b2 * x - s.a2 * out;
                *v = out;
            }
        }
    }

    pub fn response(&self, freq: f64, fs: f64) -> Complex64 {
        let omega = 2.0 * PI * freq / fs;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(omega))
    }

    fn scale(&mut self, gain: f64) {
        if let Some(first) = self.sections.first_mut() {
            first.b0 *= gain;
            first.b1 *= gain;
            first.b2 *= gain;
        }
    }

    pub fn butter_lowpass(order: usize, fc: f64, fs: f64) -> Self {
        Sos {
            sections: butter_qs(order)
                .into_iter()
                .map(|q| Biquad::lowpass(fc, q, fs))
                .collect(),
        }
    }

    pub fn butter_highpass(order: usize, fc: f64, fs: f64) -> Self {
        Sos {
            sections: butter_qs(order)
                .into_iter()
                .map(|q| Biquad::highpass(fc, q, fs))
                .collect(),
        }
    }

    /// Butterworth band-pass of `order` (2·order poles) between `f_lo` and
    /// `f_hi`, bilinear-mapped with edge prewarping; unit gain at the
    /// geometric centre.
    pub fn butter_bandpass(order: usize, f_lo: f64, f_hi: f64, fs: f64) -> Self {
        let w1 = 2.0 * fs * (PI * f_lo / fs).tan();
        let w2 = 2.0 * fs * (PI * f_hi / fs).tan();
        let w0sq = w1 * w2;
        let bw = w2 - w1;
        let mut poles = Vec::with_capacity(order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0sq).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                if s.im > 0.0 {
                    poles.push(s);
                }
            }
        }
        let k2 = 2.0 * fs;
        let mut sos = Sos {
            sections: poles
                .into_iter()
                .map(|s| {
                    let z = (k2 + s) / (k2 - s);
                    Biquad::from_poles_zeros(
                        [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
                        [z, z.conj()],
                    )
                })
                .collect(),
        };
        let centre = fs / PI * (w0sq.sqrt() / k2).atan();
        let g = sos.response(centre, fs).norm();
        sos.scale(1.0 / g);
        sos
    }
}

fn butter_qs(order: usize) -> Vec<f64> {
    assert!(order % 2 == 0 && order > 0, "even Butterworth order expected");
    (0..order / 2)
        .map(|k| 1.0 / (2.0 * (PI * (2 * k + 1) as f64 / (2 * order) as f64).cos()))
        .collect()
}

/// First-order recursive smoother `y += (1-a)(x-y)` with time constant `tau`.
pub fn one_pole_coefficient(tau: f64, fs: f64) -> f64 {
    (-1.0 / (fs * tau)).exp()
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Cached forward FFT of a fixed length.
#[derive(Clone)]
pub struct RealFft {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl RealFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        RealFft {
            fft: planner.plan_fft_forward(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Transforms `x` (zero-padded or truncated to the plan length) and
    /// returns the full complex spectrum.
    pub fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x
            .iter()
            .take(self.len)
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        buf.resize(self.len, Complex64::new(0.0, 0.0));
        self.fft.process(&mut buf);
        buf
    }
}

/// Cached inverse FFT, normalised by 1/N.
#[derive(Clone)]
pub struct InverseFft {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl InverseFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        InverseFft {
            fft: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn inverse(&self, spectrum: &mut [Complex64]) {
        self.fft.process(spectrum);
        let norm = 1.0 / self.len as f64;
        for v in spectrum.iter_mut() {
            *v *= norm;
        }
    }
}

/// Critical-band rate in Bark.
pub fn hz_to_bark(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

pub fn bark_to_hz(z: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 40_000.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hz_to_bark(mid) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Critical bandwidth in Hz around `f`.
pub fn critical_bandwidth(f: f64) -> f64 {
    25.0 + 75.0 * (1.0 + 1.4 * (f / 1000.0).powi(2)).powf(0.69)
}

/// Threshold in quiet (free field), dB SPL.
pub fn threshold_in_quiet_db(f: f64) -> f64 {
    let k = f.max(20.0) / 1000.0;
    3.64 * k.powf(-0.8) - 6.5 * (-0.6 * (k - 3.3).powi(2)).exp() + 1e-3 * k.powi(4)
}

/// Nominal-exact one-third-octave centre frequency for band number `n`
/// (band 30 is 1 kHz).
pub fn third_octave_centre(n: i32) -> f64 {
    1000.0 * 10f64.powf((n - 30) as f64 / 10.0)
}

/// Lower and upper edges of the one-third-octave band around `centre`.
pub fn third_octave_edges(centre: f64) -> (f64, f64) {
    let k = 10f64.powf(1.0 / 20.0);
    (centre / k, centre * k)
}

/// Linear-interpolated quantile of already sorted data (`q` in [0, 1]).
pub fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandpass_has_unit_gain_at_centre_and_skirts() {
        let fs = 48_000.0;
        let (lo, hi) = third_octave_edges(1000.0);
        let bp = Sos::butter_bandpass(3, lo, hi, fs);
        assert_eq!(bp.sections.len(), 3);
        let centre = (lo * hi).sqrt();
        assert!((bp.response(centre, fs).norm() - 1.0).abs() < 0.01);
        // -3 dB at the edges, like the analog prototype.
        let edge = 20.0 * bp.response(hi, fs).norm().log10();
        assert!((edge + 3.01).abs() < 0.1, "edge gain {edge}");
        assert!(bp.response(2000.0, fs).norm() < 0.01);
    }

    #[test]
    fn butterworth_lowpass_is_3db_down_at_cutoff() {
        let fs = 48_000.0;
        let lp = Sos::butter_lowpass(4, 1000.0, fs);
        let g = 20.0 * lp.response(1000.0, fs).norm().log10();
        assert!((g + 3.01).abs() < 0.05);
        assert!((lp.response(10.0, fs).norm() - 1.0).abs() < 1e-6);
        let hp = Sos::butter_highpass(2, 100.0, fs);
        assert!((hp.response(10_000.0, fs).norm() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bark_round_trip() {
        for f in [50.0, 440.0, 1000.0, 4000.0, 12_000.0] {
            assert!((bark_to_hz(hz_to_bark(f)) - f).abs() < 1e-6 * f);
        }
        assert!((hz_to_bark(1000.0) - 8.5).abs() < 0.1);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&v, 0.5), 2.0);
        assert!((sorted_quantile(&v, 0.95) - 3.8).abs() < 1e-12);
    }
}
