//! Sharpness with the DIN 45692 weighting.

use super::loudness::{LoudnessResult, SpecificLoudness, BARK_STEP};
use super::{SqmMetric, SqmTrace};

const K: f64 = 0.11;

fn weighting(z: f64) -> f64 {
    if z <= 15.8 {
        1.0
    } else {
        0.15 * (0.42 * (z - 15.8)).exp() + 0.85
    }
}

/// Sharpness of one specific loudness pattern, acum; zero for a silent
/// pattern.
pub fn sharpness(ns: &SpecificLoudness) -> f64 {
    let total: f64 = ns.iter().sum::<f64>() * BARK_STEP;
    if total <= 1e-12 {
        return 0.0;
    }
    let moment: f64 = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let z = BARK_STEP * (i + 1) as f64;
            n * weighting(z) * z
        })
        .sum::<f64>()
        * BARK_STEP;
    K * moment / total
}

/// Sharpness over time from the specific loudness frames of a loudness run.
pub fn sharpness_tv(loudness: &LoudnessResult) -> SqmTrace {
    let mut trace = SqmTrace::new(SqmMetric::Sharpness);
    trace.times = loudness.trace.times.clone();
    trace.values = loudness.specific.iter().map(sharpness).collect();
    trace
}

#[cfg(test)]
mod tests {
    use super::super::loudness::BARK_BINS;
    use super::*;

    #[test]
    fn silence_is_zero() {
        assert_eq!(sharpness(&[0.0; BARK_BINS]), 0.0);
    }

    #[test]
    fn higher_pattern_is_sharper() {
        let mut low = [0.0; BARK_BINS];
        let mut high = [0.0; BARK_BINS];
        low[80..90].fill(1.0);
        high[180..190].fill(1.0);
        assert!(sharpness(&high) > sharpness(&low));
        // below 15.8 Bark the weighting is flat: sharpness is 0.11 · centroid
        assert!((sharpness(&low) - 0.11 * 8.55).abs() < 1e-9);
    }
}
