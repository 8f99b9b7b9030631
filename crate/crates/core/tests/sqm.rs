mod common;

use common::{am_tone, band_noise, median_after, sine};
use evsound::sqm::{
    loudness_tv, modulation_tv, psychoacoustic_annoyance, sharpness_tv, tonality_tv,
    ModulationParams, SqmTraces, TonalityParams, BARK_STEP,
};
use evsound::Error;

#[test]
fn loudness_doubles_per_ten_decibels() {
    let n = |db| median_after(&loudness_tv(&sine(1000.0, db, 1.5)).unwrap().trace, 0.5);
    let (a, b, c) = (n(50.0), n(60.0), n(70.0));
    assert!((b / a - 2.0).abs() < 0.2, "{a} {b}");
    assert!((c / b - 2.0).abs() < 0.2, "{b} {c}");
}

#[test]
fn specific_loudness_peaks_at_the_tone_bark() {
    for (f, z) in [(1000.0, 8.5), (4000.0, 17.3)] {
        let r = loudness_tv(&sine(f, 60.0, 1.0)).unwrap();
        let frame = &r.specific[r.specific.len() - 1];
        let peak = (0..frame.len()).max_by(|&a, &b| frame[a].total_cmp(&frame[b])).unwrap();
        let bark = (peak + 1) as f64 * BARK_STEP;
        // third-octave input resolves about one Bark
        assert!((bark - z).abs() < 1.0, "{f} Hz peaks at {bark} Bark");
    }
}

#[test]
fn sharpness_rises_with_band_centre() {
    let s = |lo, hi| {
        let r = loudness_tv(&band_noise(lo, hi, 60.0, 1.5, 3)).unwrap();
        median_after(&sharpness_tv(&r), 0.5)
    };
    let (low, mid, high) = (s(200.0, 300.0), s(920.0, 1080.0), s(3700.0, 4300.0));
    assert!(low < mid && mid < high, "{low} {mid} {high}");
}

#[test]
fn tonality_separates_tone_and_noise() {
    let p = TonalityParams::default();
    let tone = median_after(&tonality_tv(&sine(1000.0, 60.0, 1.5), &p).unwrap(), 0.5);
    let noise = median_after(&tonality_tv(&band_noise(20.0, 20_000.0, 60.0, 1.5, 5), &p).unwrap(), 0.5);
    assert!(tone > 0.9 && noise < 0.1, "tone {tone} noise {noise}");
}

#[test]
fn modulation_rate_selects_roughness_or_fluctuation() {
    let p = ModulationParams::default();
    let (r70, f70) = modulation_tv(&am_tone(1000.0, 70.0, 60.0, 4.0), &p).unwrap();
    let (r4, f4) = modulation_tv(&am_tone(1000.0, 4.0, 60.0, 4.0), &p).unwrap();
    assert!(median_after(&r70, 0.5) > 5.0 * median_after(&r4, 0.5));
    assert!(median_after(&f4, 0.5) > 5.0 * median_after(&f70, 0.5));
}

#[test]
fn level_metrics_reject_uncalibrated_input() {
    let s = sine(1000.0, 60.0, 1.0).into_uncalibrated();
    assert!(matches!(loudness_tv(&s), Err(Error::Uncalibrated)));
    assert!(matches!(tonality_tv(&s, &TonalityParams::default()), Err(Error::Uncalibrated)));
    assert!(matches!(modulation_tv(&s, &ModulationParams::default()), Err(Error::Uncalibrated)));
}

#[test]
fn summary_combines_percentiles_into_annoyance() {
    let traces = SqmTraces::compute(&am_tone(2000.0, 70.0, 65.0, 3.0)).unwrap();
    let s = traces.summarize(0.5).unwrap();
    let pa = psychoacoustic_annoyance(s.n5, s.s5, s.k5, s.r5, s.fs5).unwrap();
    assert_eq!(s.pa, pa);
    assert!(s.pa > s.n5, "a rough tone carries an annoyance penalty");
}
