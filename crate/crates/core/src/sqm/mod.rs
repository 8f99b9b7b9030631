//! Sound quality metrics: loudness, sharpness, tonality, roughness and
//! fluctuation strength as time series, their 5 % exceeded values, and the
//! psychoacoustic annoyance model built on top of them.

mod loudness;
mod modulation;
mod sharpness;
mod tonality;

pub use loudness::{
    loudness_from_band_levels, loudness_tv, LoudnessResult, SpecificLoudness, BARK_BINS, BARK_STEP,
};
pub use modulation::{fluctuation_tv, modulation_tv, roughness_tv, ModulationParams};
pub use sharpness::{sharpness, sharpness_tv};
pub use tonality::{tonality_tv, TonalityParams};

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

/// Start of each trace left out of percentile statistics, s.
pub const DEFAULT_WARMUP_S: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqmMetric {
    Loudness,
    Sharpness,
    Tonality,
    Roughness,
    FluctuationStrength,
}

impl SqmMetric {
    pub fn unit(self) -> &'static str {
        match self {
            SqmMetric::Loudness => "sone",
            SqmMetric::Sharpness => "acum",
            SqmMetric::Tonality => "t.u.",
            SqmMetric::Roughness => "asper",
            SqmMetric::FluctuationStrength => "vacil",
        }
    }
}

impl fmt::Display for SqmMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SqmMetric::Loudness => "loudness",
            SqmMetric::Sharpness => "sharpness",
            SqmMetric::Tonality => "tonality",
            SqmMetric::Roughness => "roughness",
            SqmMetric::FluctuationStrength => "fluctuation_strength",
        };
        f.write_str(s)
    }
}

/// One metric over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqmTrace {
    pub metric: SqmMetric,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SqmTrace {
    pub fn new(metric: SqmMetric) -> Self {
        SqmTrace {
            metric,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy without the samples before `t0`. Keeps everything if that would
    /// leave the trace empty.
    pub fn after(&self, t0: f64) -> SqmTrace {
        let start = self.times.iter().position(|&t| t >= t0).unwrap_or(self.len());
        if start >= self.len() {
            return self.clone();
        }
        SqmTrace {
            metric: self.metric,
            times: self.times[start..].to_vec(),
            values: self.values[start..].to_vec(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", &format!("{} ({})", self.metric, self.metric.unit())])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([format!("{t:.4}"), format!("{v:.6}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Value exceeded by `fraction` of the samples, interpolating linearly
/// between order statistics.
pub fn percentile_exceeded(trace: &SqmTrace, fraction: f64) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Empty(format!("{} trace", trace.metric)));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid("exceedance fraction must lie in [0, 1]"));
    }
    let mut v = trace.values.clone();
    v.sort_by(f64::total_cmp);
    Ok(dsp::sorted_quantile(&v, 1.0 - fraction))
}

/// 5 % exceeded values of the five metrics and the annoyance built on them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqmSummary {
    #[serde(rename = "N5")]
    pub n5: f64,
    #[serde(rename = "S5")]
    pub s5: f64,
    #[serde(rename = "K5")]
    pub k5: f64,
    #[serde(rename = "R5")]
    pub r5: f64,
    #[serde(rename = "FS5")]
    pub fs5: f64,
    #[serde(rename = "PA")]
    pub pa: f64,
}

/// All five traces of one signal.
#[derive(Clone, Debug)]
pub struct SqmTraces {
    pub loudness: SqmTrace,
    pub sharpness: SqmTrace,
    pub tonality: SqmTrace,
    pub roughness: SqmTrace,
    pub fluctuation: SqmTrace,
}

impl SqmTraces {
    pub fn compute(signal: &CalibratedSignal) -> Result<Self> {
        let loud = loudness_tv(signal)?;
        let sharpness = sharpness_tv(&loud);
        let tonality = tonality_tv(signal, &TonalityParams::default())?;
        let (roughness, fluctuation) = modulation_tv(signal, &ModulationParams::default())?;
        Ok(SqmTraces {
            loudness: loud.trace,
            sharpness,
            tonality,
            roughness,
            fluctuation,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &SqmTrace> {
        [
            &self.loudness,
            &self.sharpness,
            &self.tonality,
            &self.roughness,
            &self.fluctuation,
        ]
        .into_iter()
    }

    pub fn summarize(&self, warmup_s: f64) -> Result<SqmSummary> {
        let p = |t: &SqmTrace| percentile_exceeded(&t.after(warmup_s), 0.05);
        let (n5, s5, k5, r5, fs5) = (
            p(&self.loudness)?,
            p(&self.sharpness)?,
            p(&self.tonality)?,
            p(&self.roughness)?,
            p(&self.fluctuation)?,
        );
        let pa = psychoacoustic_annoyance(n5, s5, k5, r5, fs5)?;
        Ok(SqmSummary {
            n5,
            s5,
            k5,
            r5,
            fs5,
            pa,
        })
    }
}

/// Psychoacoustic annoyance from 5 % exceeded loudness (sone), sharpness
/// (acum), tonality (t.u.), roughness (asper) and fluctuation strength
/// (vacil).
///
/// Zwicker's model extended with a tonality term:
/// `PA = N5 · (1 + sqrt(-0.16 + 11.48·wS² + 0.84·wFR² + 1.25·wT²))`.
/// The radicand is clamped at zero so that PA falls back to N5 when no
/// penalty applies.
pub fn psychoacoustic_annoyance(n5: f64, s5: f64, k5: f64, r5: f64, fs5: f64) -> Result<f64> {
    for (name, v) in [("N5", n5), ("S5", s5), ("K5", k5), ("R5", r5), ("FS5", fs5)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if n5 == 0.0 {
        return Ok(0.0);
    }
    let ws = if s5 > 1.75 {
        (s5 - 1.75) * 0.25 * (n5 + 10.0).log10()
    } else {
        0.0
    };
    let wfr = 2.18 / n5.powf(0.4) * (0.4 * fs5 + 0.6 * r5);
    let wt = (1.0 - (-0.29 * n5).exp()) * (1.0 - (-5.49 * k5).exp());
    let radicand = -0.16 + 11.48 * ws * ws + 0.84 * wfr * wfr + 1.25 * wt * wt;
    Ok(n5 * (1.0 + radicand.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: Vec<f64>) -> SqmTrace {
        SqmTrace {
            metric: SqmMetric::Loudness,
            times: (0..values.len()).map(|i| i as f64).collect(),
            values,
        }
    }

    #[test]
    fn percentile_of_constant_and_ramp() {
        assert_eq!(percentile_exceeded(&trace(vec![5.0; 10]), 0.05).unwrap(), 5.0);
        let ramp = trace((0..=1000).map(|i| i as f64 / 100.0).collect());
        assert!((percentile_exceeded(&ramp, 0.05).unwrap() - 9.5).abs() < 1e-12);
        assert!(percentile_exceeded(&trace(vec![]), 0.05).is_err());
    }

    #[test]
    fn annoyance_without_penalties_is_loudness() {
        assert_eq!(psychoacoustic_annoyance(7.0, 1.2, 0.0, 0.0, 0.0).unwrap(), 7.0);
        assert!(psychoacoustic_annoyance(-1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn annoyance_increases_with_loudness() {
        let mut last = 0.0;
        for n in 1..40 {
            let pa = psychoacoustic_annoyance(n as f64, 2.0, 0.3, 0.1, 0.2).unwrap();
            assert!(pa > last);
            last = pa;
        }
    }

    #[test]
    fn after_drops_warmup() {
        let t = trace(vec![1.0, 2.0, 3.0]);
        assert_eq!(t.after(0.5).values, vec![2.0, 3.0]);
        assert_eq!(t.after(10.0).values, vec![1.0, 2.0, 3.0]);
    }
}
