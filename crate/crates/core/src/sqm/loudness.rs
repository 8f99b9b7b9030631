//! Zwicker loudness of time-varying sounds, free field.
//!
//! Third-octave filter bank, squaring and smoothing, decimation to 2 kHz,
//! core loudness per approximated critical band, the nonlinear decay of
//! the core loudness, upper spectral slopes, and finally the temporal
//! weighting of total loudness. Output hop is 2 ms.

use crate::dsp::{self, Sos, P_REF};
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

use super::{SqmMetric, SqmTrace};

/// Specific loudness resolution: 240 bins of 0.1 Bark.
pub const BARK_BINS: usize = 240;
pub const BARK_STEP: f64 = 0.1;

pub(crate) const N_THIRD_OCTAVES: usize = 28;
/// Band number of the 25 Hz third octave (1 kHz is 30).
const FIRST_BAND: i32 = 14;

const INTERNAL_RATE: f64 = 2000.0;
/// 2 kHz internal rate down to the 500 Hz output rate.
const OUTPUT_DECIMATION: usize = 4;

// Level ranges for the low-frequency equal-loudness reduction.
const RAP: [f64; 8] = [45.0, 55.0, 65.0, 71.0, 80.0, 90.0, 100.0, 120.0];

// Reduction of the 25 Hz to 250 Hz band levels, one row per level range.
const DLL: [[f64; 11]; 8] = [
    [-32.0, -24.0, -16.0, -10.0, -5.0, 0.0, -7.0, -3.0, 0.0, -2.0, 0.0],
    [-29.0, -22.0, -15.0, -10.0, -4.0, 0.0, -7.0, -2.0, 0.0, -2.0, 0.0],
    [-27.0, -19.0, -14.0, -9.0, -4.0, 0.0, -6.0, -2.0, 0.0, -2.0, 0.0],
    [-25.0, -17.0, -12.0, -9.0, -3.0, 0.0, -5.0, -2.0, 0.0, -2.0, 0.0],
    [-23.0, -16.0, -11.0, -7.0, -3.0, 0.0, -4.0, -1.0, 0.0, -1.0, 0.0],
    [-20.0, -14.0, -10.0, -6.0, -3.0, 0.0, -4.0, -1.0, 0.0, -1.0, 0.0],
    [-18.0, -12.0, -9.0, -6.0, -2.0, 0.0, -3.0, -1.0, 0.0, -1.0, 0.0],
    [-15.0, -10.0, -8.0, -4.0, -2.0, 0.0, -3.0, -1.0, 0.0, -1.0, 0.0],
];

// Threshold in quiet per approximated critical band.
const LTQ: [f64; 20] = [
    30.0, 18.0, 12.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0,
    3.0, 3.0,
];

// Free-field transmission to the eardrum.
const A0: [f64; 20] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5, -1.6, -3.2, -5.4, -5.6, -4.0, -1.5,
    2.0, 5.0, 12.0,
];

// Level correction for critical band versus third-octave bandwidth.
const DCB: [f64; 20] = [
    -0.25, -0.6, -0.8, -0.8, -0.5, 0.0, 0.5, 1.1, 1.5, 1.7, 1.8, 1.8, 1.7, 1.6, 1.4, 1.2, 0.8,
    0.5, 0.0, -0.5,
];

// Upper limits of the approximated critical bands, Bark.
const ZUP: [f64; 21] = [
    0.9, 1.8, 2.8, 3.5, 4.4, 5.4, 6.6, 7.9, 9.2, 10.6, 12.3, 13.8, 15.2, 16.7, 18.1, 19.3, 20.6,
    21.8, 22.7, 23.6, 24.0,
];

// Specific loudness ranges selecting the upper slope.
const RNS: [f64; 18] = [
    21.5, 18.0, 15.1, 11.5, 9.0, 6.1, 4.4, 3.1, 2.13, 1.36, 0.82, 0.42, 0.30, 0.22, 0.15, 0.10,
    0.035, 0.0,
];

// Upper slopes in sone/Bark by specific loudness range (rows) and critical
// band (columns). Rows from 2.13 sone/Bark down were fitted so that a
// 1 kHz tone through the filter bank gives 1, 2, 4 and 8 sone at 40, 50,
// 60 and 70 dB; across columns they keep the proportions of the row above.
const USL: [[f64; 8]; 18] = [
    [13.0, 8.2, 5.7, 5.0, 5.0, 5.0, 5.0, 5.0],
    [9.0, 7.5, 6.0, 5.1, 4.5, 4.5, 4.5, 4.5],
    [7.8, 6.7, 5.6, 4.9, 4.4, 3.9, 3.9, 3.9],
    [6.5, 6.0, 5.1, 4.5, 3.9, 3.2, 3.2, 3.2],
    [5.6, 5.0, 4.5, 4.3, 3.5, 2.7, 2.7, 2.7],
    [4.2, 3.5, 3.3, 3.3, 2.9, 2.4, 2.4, 2.4],
    [3.2, 2.9, 2.6, 2.6, 2.4, 2.0, 2.0, 2.0],
    [2.8, 2.5, 2.2, 2.2, 1.8, 1.6, 1.6, 1.6],
    [2.578, 2.381, 2.019, 1.791, 1.549, 1.27, 1.27, 1.27],
    [1.725, 1.594, 1.351, 1.198, 1.037, 0.85, 0.85, 0.85],
    [1.462, 1.35, 1.145, 1.015, 0.878, 0.72, 0.72, 0.72],
    [0.832, 0.769, 0.652, 0.578, 0.5, 0.41, 0.41, 0.41],
    [0.528, 0.488, 0.413, 0.367, 0.317, 0.26, 0.26, 0.26],
    [0.345, 0.319, 0.27, 0.24, 0.207, 0.17, 0.17, 0.17],
    [0.244, 0.225, 0.191, 0.169, 0.146, 0.12, 0.12, 0.12],
    [0.164, 0.152, 0.129, 0.114, 0.099, 0.081, 0.081, 0.081],
    [0.104, 0.096, 0.081, 0.072, 0.062, 0.051, 0.051, 0.051],
    [0.041, 0.037, 0.032, 0.028, 0.024, 0.02, 0.02, 0.02],
];

/// Specific loudness over Bark, sone/Bark.
pub type SpecificLoudness = [f64; BARK_BINS];

/// Loudness trace together with the specific loudness at each time step.
#[derive(Clone, Debug)]
pub struct LoudnessResult {
    pub trace: SqmTrace,
    pub specific: Vec<SpecificLoudness>,
}

/// Centre frequencies of the 28 filter-bank bands, 25 Hz to 12.5 kHz.
pub(crate) fn band_centres() -> [f64; N_THIRD_OCTAVES] {
    std::array::from_fn(|i| dsp::third_octave_centre(FIRST_BAND + i as i32))
}

/// Core loudness of the 20 approximated critical bands plus the empty 21st.
fn core_loudness(levels: &[f64; N_THIRD_OCTAVES]) -> [f64; 21] {
    // lowest eleven bands: equal-loudness reduction, then grouping into the
    // first three critical bands
    let mut ti = [0.0; 11];
    for (i, t) in ti.iter_mut().enumerate() {
        let mut j = 0;
        while j < 7 && levels[i] > RAP[j] - DLL[j][i] {
            j += 1;
        }
        *t = 10f64.powf((levels[i] + DLL[j][i]) / 10.0);
    }
    let gi = [
        ti[0..6].iter().sum::<f64>(),
        ti[6..9].iter().sum::<f64>(),
        ti[9..11].iter().sum::<f64>(),
    ];
    let mut nm = [0.0; 21];
    for i in 0..20 {
        let le = if i < 3 {
            if gi[i] > 0.0 {
                10.0 * gi[i].log10()
            } else {
                f64::NEG_INFINITY
            }
        } else {
            levels[i + 8]
        } - A0[i];
        if le > LTQ[i] {
            let le = le - DCB[i];
            let s = 0.25;
            let mp1 = 0.0635 * 10f64.powf(0.025 * LTQ[i]);
            let mp2 = (1.0 - s + s * 10f64.powf((le - LTQ[i]) / 10.0)).powf(0.25) - 1.0;
            nm[i] = (mp1 * mp2).max(0.0);
        }
    }
    let korry = (0.4 + 0.32 * nm[0].powf(0.2)).min(1.0);
    nm[0] *= korry;
    nm
}

/// Total loudness and specific loudness from (decayed) core loudness.
fn spectral_slopes(nm: &[f64; 21]) -> (f64, SpecificLoudness) {
    let mut ns = [0.0; BARK_BINS];
    let mut n = 0.0;
    let (mut z1, mut n1) = (0.0f64, 0.0f64);
    let mut iz = 0usize;
    let mut j = 0usize;
    // fills bins whose centre z = 0.1·(iz+1) does not exceed `z2`
    let fill = |ns: &mut SpecificLoudness, iz: &mut usize, z2: f64, f: &dyn Fn(f64) -> f64| {
        while *iz < BARK_BINS && BARK_STEP * (*iz + 1) as f64 <= z2 + 1e-9 {
            ns[*iz] = f(BARK_STEP * (*iz + 1) as f64).max(0.0);
            *iz += 1;
        }
    };
    for i in 0..21 {
        let zup = ZUP[i] + 1e-4;
        let ig = i.saturating_sub(1).min(7);
        loop {
            let (z2, n2);
            if n1 > nm[i] {
                let mut nn2 = RNS[j].max(nm[i]);
                let slope = USL[j][ig];
                let mut dz = (n1 - nn2) / slope;
                let mut zz2 = z1 + dz;
                if zz2 > zup {
                    zz2 = zup;
                    dz = zz2 - z1;
                    nn2 = n1 - dz * slope;
                }
                n += dz * (n1 + nn2) / 2.0;
                let (zs, ns1) = (z1, n1);
                fill(&mut ns, &mut iz, zz2, &|z| ns1 - (z - zs) * slope);
                z2 = zz2;
                n2 = nn2;
            } else {
                if n1 < nm[i] {
                    j = RNS.iter().position(|&r| r < nm[i]).unwrap_or(17);
                }
                z2 = zup;
                n2 = nm[i];
                n += n2 * (z2 - z1);
                fill(&mut ns, &mut iz, z2, &|_| n2);
            }
            if n2 <= RNS[j] && j < 17 {
                j += 1;
            }
            n1 = n2;
            z1 = z2;
            if z1 >= zup {
                break;
            }
        }
    }
    (n.max(0.0), ns)
}

/// Stationary loudness of a third-octave spectrum (25 Hz to 12.5 kHz).
pub fn loudness_from_band_levels(levels: &[f64; N_THIRD_OCTAVES]) -> (f64, SpecificLoudness) {
    spectral_slopes(&core_loudness(levels))
}

/// Coefficients of the two-time-constant decay applied to core loudness.
struct DecayFilter {
    b: [f64; 6],
}

impl DecayFilter {
    fn new(rate: f64) -> Self {
        let (t_short, t_long, t_var): (f64, f64, f64) = (0.005, 0.015, 0.075);
        let dt = 1.0 / rate;
        let p = (t_var + t_long) / (t_var * t_short);
        let q = 1.0 / (t_short * t_var);
        let root = (p * p / 4.0 - q).sqrt();
        let (l1, l2) = (-p / 2.0 + root, -p / 2.0 - root);
        let den = t_var * (l1 - l2);
        let (e1, e2) = ((l1 * dt).exp(), (l2 * dt).exp());
        DecayFilter {
            b: [
                (e1 - e2) / den,
                ((t_var * l2 + 1.0) * e1 - (t_var * l1 + 1.0) * e2) / den,
                ((t_var * l1 + 1.0) * e1 - (t_var * l2 + 1.0) * e2) / den,
                (t_var * l1 + 1.0) * (t_var * l2 + 1.0) * (e1 - e2) / den,
                (-dt / t_long).exp(),
                (-dt / t_var).exp(),
            ],
        }
    }

    /// Rises follow the input; falls decay with a memory-dependent rate.
    fn apply(&self, x: &mut [f64]) {
        let b = &self.b;
        let (mut uo, mut u2) = (0.0f64, 0.0f64);
        for v in x.iter_mut() {
            let ui = *v;
            if ui < uo {
                if uo > u2 {
                    let new_u2 = uo * b[0] - u2 * b[1];
                    uo = uo * b[2] - u2 * b[3];
                    u2 = new_u2;
                    if ui > uo {
                        uo = ui;
                    }
                    if u2 > uo {
                        u2 = uo;
                    }
                } else {
                    uo *= b[4];
                    if ui > uo {
                        uo = ui;
                    }
                    u2 = uo;
                }
            } else if ui == uo {
                if uo > u2 {
                    u2 = (u2 - ui) * b[5] + ui;
                } else {
                    u2 = ui;
                }
            } else {
                uo = ui;
                u2 = (u2 - ui) * b[5] + ui;
            }
            *v = uo;
        }
    }
}

/// Band levels (dB) of the filter bank, sampled at 2 kHz.
fn band_level_series(x: &[f64], fs: f64) -> Vec<[f64; N_THIRD_OCTAVES]> {
    let step = fs / INTERNAL_RATE;
    let n_out = (x.len() as f64 / step).floor() as usize;
    let mut out = vec![[0.0; N_THIRD_OCTAVES]; n_out];
    let mut buf = vec![0.0; x.len()];
    for (b, &fc) in band_centres().iter().enumerate() {
        let (lo, hi) = dsp::third_octave_edges(fc);
        let filter = Sos::butter_bandpass(3, lo, hi, fs);
        buf.copy_from_slice(x);
        filter.filter_in_place(&mut buf);
        let tau = if fc <= 1000.0 { 2.0 / (3.0 * fc) } else { 2.0 / 3000.0 };
        let a = dsp::one_pole_coefficient(tau, fs);
        let (mut y1, mut y2, mut y3) = (0.0, 0.0, 0.0);
        let mut next = 0usize;
        for (i, v) in buf.iter().enumerate() {
            y1 = a * y1 + (1.0 - a) * v * v;
            y2 = a * y2 + (1.0 - a) * y1;
            y3 = a * y3 + (1.0 - a) * y2;
            if next < n_out && i == (next as f64 * step).round() as usize {
                out[next][b] = if y3 > 0.0 {
                    10.0 * (y3 / (P_REF * P_REF)).log10()
                } else {
                    -100.0
                };
                next += 1;
            }
        }
    }
    out
}

/// Time-varying loudness of a calibrated mono signal.
pub fn loudness_tv(signal: &CalibratedSignal) -> Result<LoudnessResult> {
    if !signal.is_calibrated() {
        return Err(Error::Uncalibrated);
    }
    let x = signal.mono_samples()?;
    let fs = signal.sample_rate() as f64;
    if fs < 32_000.0 {
        return Err(Error::invalid(format!(
            "loudness needs a sample rate of at least 32 kHz, got {fs} Hz"
        )));
    }
    let levels = band_level_series(x, fs);
    if levels.is_empty() {
        return Err(Error::TooFewSamples {
            needed: (fs / INTERNAL_RATE).ceil() as usize,
            have: x.len(),
        });
    }
    let core: Vec<[f64; 21]> = levels.iter().map(core_loudness).collect();

    let decay = DecayFilter::new(INTERNAL_RATE);
    let mut band = vec![0.0; core.len()];
    let mut decayed = vec![[0.0; 21]; core.len()];
    for i in 0..21 {
        for (b, c) in band.iter_mut().zip(&core) {
            *b = c[i];
        }
        decay.apply(&mut band);
        for (d, b) in decayed.iter_mut().zip(&band) {
            d[i] = *b;
        }
    }

    let mut total = Vec::with_capacity(core.len());
    let mut specific = Vec::with_capacity(core.len() / OUTPUT_DECIMATION + 1);
    for (k, nm) in decayed.iter().enumerate() {
        let (n, ns) = spectral_slopes(nm);
        total.push(n);
        if k % OUTPUT_DECIMATION == 0 {
            specific.push(ns);
        }
    }

    // temporal weighting of total loudness
    let a_short = dsp::one_pole_coefficient(0.0035, INTERNAL_RATE);
    let a_long = dsp::one_pole_coefficient(0.070, INTERNAL_RATE);
    let (mut s, mut l) = (0.0, 0.0);
    let mut trace = SqmTrace::new(SqmMetric::Loudness);
    for (k, n) in total.iter().enumerate() {
        s = a_short * s + (1.0 - a_short) * n;
        l = a_long * l + (1.0 - a_long) * n;
        if k % OUTPUT_DECIMATION == 0 {
            trace.times.push(k as f64 / INTERNAL_RATE);
            trace.values.push((0.47 * s + 0.53 * l).max(0.0));
        }
    }
    Ok(LoudnessResult { trace, specific })
}
