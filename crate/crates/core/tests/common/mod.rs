//! Reference signals shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use evsound::dsp::{self, InverseFft, RealFft, P_REF};
use evsound::CalibratedSignal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const SR: u32 = 48_000;

/// Scales `s` so its unweighted equivalent level is `db`.
pub fn at_level(s: CalibratedSignal, db: f64) -> CalibratedSignal {
    let target = P_REF * P_REF * 10f64.powf(db / 10.0);
    let g = (target / dsp::mean_square(s.channel(0))).sqrt();
    s.scaled(g)
}

/// Sine of `freq` at `db` SPL.
pub fn sine(freq: f64, db: f64, secs: f64) -> CalibratedSignal {
    let n = (secs * SR as f64) as usize;
    let x = (0..n)
        .map(|i| (2.0 * PI * freq * i as f64 / SR as f64).sin())
        .collect();
    at_level(CalibratedSignal::mono(SR, x).unwrap(), db)
}

/// 100 % amplitude-modulated sine at `db` SPL.
pub fn am_tone(fc: f64, fm: f64, db: f64, secs: f64) -> CalibratedSignal {
    let n = (secs * SR as f64) as usize;
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / SR as f64;
            (1.0 + (2.0 * PI * fm * t).cos()) * (2.0 * PI * fc * t).sin()
        })
        .collect();
    at_level(CalibratedSignal::mono(SR, x).unwrap(), db)
}

/// Gaussian noise band-limited to `[lo, hi]` Hz by zeroing FFT bins.
pub fn band_noise(lo: f64, hi: f64, db: f64, secs: f64, seed: u64) -> CalibratedSignal {
    let n = (secs * SR as f64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut spec = RealFft::new(n).forward(&x);
    for (k, c) in spec.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * SR as f64 / n as f64;
        if f < lo || f > hi {
            *c = 0.0.into();
        }
    }
    InverseFft::new(n).inverse(&mut spec);
    let y = spec.iter().map(|c| c.re).collect();
    at_level(CalibratedSignal::mono(SR, y).unwrap(), db)
}

/// Median of a trace after its warm-up.
pub fn median_after(trace: &evsound::sqm::SqmTrace, t0: f64) -> f64 {
    evsound::sqm::percentile_exceeded(&trace.after(t0), 0.5).unwrap()
}
