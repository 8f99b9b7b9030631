//! Perceived noise level with tone correction, and its time integral.
//!
//! Follows the aircraft noise certification procedure: 24 third-octave
//! bands in 0.5 s frames, band levels converted to noys, tone correction
//! from the ten-step spectral irregularity search, and a 10 s reference
//! duration for the effective level.

use serde::{Deserialize, Serialize};

use super::octave::{ThirdOctaveFrame, PNL_BAND_COUNT, PNL_FRAME_S};
use super::LevelTrace;
use crate::dsp::LEVEL_FLOOR_DB;
use crate::error::{Error, Result};

/// Noy table revision, recorded in metric manifests.
pub const NOY_TABLE_VERSION: &str = "icao-annex16-v1";

const EPNL_REFERENCE_S: f64 = 10.0;
const EPNL_WINDOW_DB: f64 = 10.0;

struct NoyRow {
    spl_a: f64,
    spl_b: f64,
    spl_c: f64,
    spl_d: f64,
    spl_e: f64,
    m_b: f64,
    m_c: f64,
    m_d: f64,
    m_e: f64,
}

const fn row(v: [f64; 9]) -> NoyRow {
    NoyRow {
        spl_a: v[0],
        spl_b: v[1],
        spl_c: v[2],
        spl_d: v[3],
        spl_e: v[4],
        m_b: v[5],
        m_c: v[6],
        m_d: v[7],
        m_e: v[8],
    }
}

const INF: f64 = f64::INFINITY;

// SPL(a) SPL(b) SPL(c) SPL(d) SPL(e) M(b) M(c) M(d) M(e), bands 50 Hz to 10 kHz
const NOY_TABLE: [NoyRow; PNL_BAND_COUNT] = [
    row([91.0, 64.0, 52.0, 49.0, 55.0, 0.043478, 0.030103, 0.079520, 0.058098]),
    row([85.9, 60.0, 51.0, 44.0, 51.0, 0.040570, 0.030103, 0.068160, 0.058098]),
    row([87.3, 56.0, 49.0, 39.0, 46.0, 0.036831, 0.030103, 0.068160, 0.052288]),
    row([79.9, 53.0, 47.0, 34.0, 42.0, 0.036831, 0.030103, 0.059640, 0.047534]),
    row([79.8, 51.0, 46.0, 30.0, 39.0, 0.035336, 0.030103, 0.053013, 0.043573]),
    row([76.0, 48.0, 45.0, 27.0, 36.0, 0.033333, 0.030103, 0.053013, 0.043573]),
    row([74.0, 46.0, 43.0, 24.0, 33.0, 0.033333, 0.030103, 0.053013, 0.040221]),
    row([74.9, 44.0, 42.0, 21.0, 30.0, 0.032051, 0.030103, 0.053013, 0.037349]),
    row([94.6, 42.0, 41.0, 18.0, 27.0, 0.030675, 0.030103, 0.053013, 0.034859]),
    row([INF, 40.0, 40.0, 16.0, 25.0, 0.030103, INF, 0.053013, 0.034859]),
    row([INF, 40.0, 40.0, 16.0, 25.0, 0.030103, INF, 0.053013, 0.034859]),
    row([INF, 40.0, 40.0, 16.0, 25.0, 0.030103, INF, 0.053013, 0.034859]),
    row([INF, 40.0, 40.0, 16.0, 25.0, 0.030103, INF, 0.053013, 0.034859]),
    row([INF, 40.0, 40.0, 16.0, 25.0, 0.030103, INF, 0.053013, 0.034859]),
    row([INF, 38.0, 38.0, 15.0, 23.0, 0.030103, INF, 0.059640, 0.034859]),
    row([INF, 34.0, 34.0, 12.0, 21.0, 0.029960, INF, 0.053013, 0.040221]),
    row([INF, 32.0, 32.0, 9.0, 18.0, 0.029960, INF, 0.053013, 0.037349]),
    row([INF, 30.0, 30.0, 5.0, 15.0, 0.029960, INF, 0.047712, 0.034859]),
    row([INF, 29.0, 29.0, 4.0, 14.0, 0.029960, INF, 0.047712, 0.034859]),
    row([INF, 29.0, 29.0, 5.0, 14.0, 0.029960, INF, 0.053013, 0.034859]),
    row([INF, 30.0, 30.0, 6.0, 15.0, 0.029960, INF, 0.053013, 0.034859]),
    row([INF, 31.0, 31.0, 10.0, 17.0, 0.029960, INF, 0.068160, 0.037349]),
    row([44.3, 37.0, 34.0, 17.0, 23.0, 0.042285, 0.029960, 0.079520, 0.037349]),
    row([50.7, 41.0, 37.0, 21.0, 29.0, 0.042285, 0.029960, 0.059640, 0.043573]),
];

/// Perceived noisiness of band `band` (0 = 50 Hz) at level `spl`, noy.
pub fn noy(band: usize, spl: f64) -> f64 {
    let r = &NOY_TABLE[band];
    if spl >= r.spl_a {
        10f64.powf(r.m_c * (spl - r.spl_c))
    } else if spl >= r.spl_b {
        10f64.powf(r.m_b * (spl - r.spl_b))
    } else if spl >= r.spl_e {
        0.3 * 10f64.powf(r.m_e * (spl - r.spl_e))
    } else if spl >= r.spl_d {
        0.1 * 10f64.powf(r.m_d * (spl - r.spl_d))
    } else {
        0.0
    }
}

fn tone_correction_from_excess(band: usize, f: f64) -> f64 {
    if f < 1.5 {
        return 0.0;
    }
    // 500 Hz is band index 10, 5 kHz index 20
    let mid = (10..=20).contains(&band);
    match (mid, f) {
        (false, f) if f < 3.0 => f / 3.0 - 0.5,
        (false, f) if f < 20.0 => f / 6.0,
        (false, _) => 10.0 / 3.0,
        (true, f) if f < 3.0 => 2.0 * f / 3.0 - 1.0,
        (true, f) if f < 20.0 => f / 3.0,
        (true, _) => 20.0 / 3.0,
    }
}

/// Tone correction of one spectrum, dB.
pub fn tone_correction(levels: &[f64; PNL_BAND_COUNT]) -> f64 {
    // 1-based band numbering as in the procedure; index 0 unused
    let n = PNL_BAND_COUNT;
    let l = |i: usize| levels[i - 1];

    // step 1: slopes from band 4 up
    let mut s = vec![0.0; n + 2];
    for i in 4..=n {
        s[i] = l(i) - l(i - 1);
    }
    // steps 2 and 3: mark irregular slopes
    let mut marked = vec![false; n + 1];
    for i in 5..=n {
        if (s[i] - s[i - 1]).abs() > 5.0 {
            if s[i] > 0.0 && s[i] > s[i - 1] {
                marked[i] = true;
            } else if s[i] <= 0.0 && s[i - 1] > 0.0 {
                marked[i - 1] = true;
            }
        }
    }
    // step 4: replace marked levels
    let mut adj = vec![0.0; n + 1];
    for i in 1..=n {
        adj[i] = l(i);
    }
    for i in 1..n {
        if marked[i] {
            adj[i] = 0.5 * (l(i - 1) + l(i + 1));
        }
    }
    if marked[n] {
        adj[n] = l(n - 1) + s[n - 1];
    }
    // step 5: slopes of the adjusted spectrum with an imaginary 25th band
    let mut sp = vec![0.0; n + 2];
    for i in 4..=n {
        sp[i] = adj[i] - adj[i - 1];
    }
    sp[3] = sp[4];
    sp[n + 1] = sp[n];
    // step 6: three-band average slopes
    let mut sbar = vec![0.0; n + 1];
    for i in 3..n {
        sbar[i] = (sp[i] + sp[i + 1] + sp[i + 2]) / 3.0;
    }
    // step 7: background spectrum
    let mut bg = vec![0.0; n + 1];
    bg[3] = l(3);
    for i in 3..n {
        bg[i + 1] = bg[i] + sbar[i];
    }
    // steps 8 to 10: excesses, corrections, maximum
    (3..=n)
        .map(|i| tone_correction_from_excess(i - 1, l(i) - bg[i]))
        .fold(0.0, f64::max)
}

/// PNL and tone correction of one spectrum.
pub fn pnl_frame(levels: &[f64; PNL_BAND_COUNT]) -> (f64, f64) {
    let noys: Vec<f64> = levels.iter().enumerate().map(|(i, &l)| noy(i, l)).collect();
    let total: f64 = noys.iter().sum();
    let n_max = noys.iter().copied().fold(0.0, f64::max);
    let nn = n_max + 0.15 * (total - n_max);
    if nn <= 0.0 {
        return (LEVEL_FLOOR_DB, 0.0);
    }
    let pnl = 40.0 + 33.22 * nn.log10();
    (pnl, tone_correction(levels))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PnlResult {
    /// PNLT per frame.
    pub pnlt: LevelTrace,
    pub pnl: Vec<f64>,
    pub tone_correction: Vec<f64>,
    pub pnlt_max: f64,
    pub epnl: f64,
}

/// Runs the PNL chain over frames spaced [`PNL_FRAME_S`] apart.
///
/// EPNL sums the frames whose PNLT lies within 10 dB of the maximum.
pub fn pnl_chain(frames: &[ThirdOctaveFrame]) -> Result<PnlResult> {
    if frames.is_empty() {
        return Err(Error::Empty("PNL chain needs at least one frame".into()));
    }
    let mut pnlt = LevelTrace::default();
    let mut pnl = Vec::with_capacity(frames.len());
    let mut tone = Vec::with_capacity(frames.len());
    for f in frames {
        let (p, c) = pnl_frame(&f.band_levels);
        pnl.push(p);
        tone.push(c);
        pnlt.times.push(f.time);
        pnlt.values.push(p + c);
    }
    let pnlt_max = pnlt.max().expect("non-empty");
    let threshold = pnlt_max - EPNL_WINDOW_DB;
    let sum: f64 = pnlt
        .values
        .iter()
        .filter(|&&v| v >= threshold)
        .map(|v| 10f64.powf(v / 10.0))
        .sum();
    let epnl = 10.0 * (sum * PNL_FRAME_S / EPNL_REFERENCE_S).log10();
    Ok(PnlResult {
        pnlt,
        pnl,
        tone_correction: tone,
        pnlt_max,
        epnl,
    })
}
