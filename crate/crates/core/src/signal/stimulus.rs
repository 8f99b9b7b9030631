use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::synth::{self, default_double_beep};
use super::CalibratedSignal;
use crate::error::{Error, Result};

/// One segment of a beep pattern; `freq_hz = None` is a pause.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeepSegment {
    pub duration_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
}

impl BeepSegment {
    pub fn beep(duration_ms: f64, freq_hz: f64) -> Self {
        BeepSegment {
            duration_ms,
            freq_hz: Some(freq_hz),
        }
    }

    pub fn pause(duration_ms: f64) -> Self {
        BeepSegment {
            duration_ms,
            freq_hz: None,
        }
    }
}

fn default_offset() -> f64 {
    90.0
}
fn default_secondary_gain() -> f64 {
    0.5
}
fn default_gate_ms() -> f64 {
    500.0
}
fn default_true() -> bool {
    true
}

/// What the vehicle emits in addition to its tyre noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Pure {
        principal_freq: f64,
    },
    Intermittent {
        principal_freq: f64,
        #[serde(default = "default_gate_ms")]
        on_ms: f64,
        #[serde(default = "default_gate_ms")]
        off_ms: f64,
    },
    Combined {
        principal_freq: f64,
        #[serde(default = "default_offset")]
        secondary_offset: f64,
        #[serde(default = "default_secondary_gain")]
        secondary_gain: f64,
    },
    DoubleBeep {
        beep_pattern: Vec<BeepSegment>,
        /// `None` continues the pattern to the end of the signal.
        #[serde(default)]
        repetitions: Option<usize>,
    },
    /// A recording carried by the vehicle (e.g. an engine). Without a path
    /// the vehicle carries tyre noise only.
    FileBed {
        #[serde(default)]
        bed_path: Option<PathBuf>,
    },
}

/// Declarative description of one stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub id: u8,
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub source: SourceSpec,
    /// Scale the final observer signal to the target L_A,eq.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

impl StimulusSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=15).contains(&self.id) {
            return Err(Error::invalid(format!(
                "stimulus id must be in 1..=15, got {}",
                self.id
            )));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "stimulus {}: {name} must be positive, got {v}",
                    self.id
                )))
            }
        };
        match &self.source {
            SourceSpec::Pure { principal_freq } => positive("principal_freq", *principal_freq),
            SourceSpec::Intermittent {
                principal_freq,
                on_ms,
                off_ms,
            } => {
                positive("principal_freq", *principal_freq)?;
                positive("on_ms", *on_ms)?;
                positive("off_ms", *off_ms)
            }
            SourceSpec::Combined {
                principal_freq,
                secondary_offset,
                ..
            } => {
                positive("principal_freq", *principal_freq)?;
                positive("secondary_offset", *secondary_offset)
            }
            SourceSpec::DoubleBeep { beep_pattern, .. } => {
                if beep_pattern.is_empty() {
                    return Err(Error::Empty(format!("stimulus {}: beep pattern", self.id)));
                }
                beep_pattern
                    .iter()
                    .try_for_each(|s| positive("beep duration_ms", s.duration_ms))
            }
            SourceSpec::FileBed { .. } => Ok(()),
        }
    }

    /// Synthesizes the parametric source at the emission point. Returns
    /// `None` for file beds, which are loaded by the caller.
    pub fn synthesize(
        &self,
        duration: f64,
        sample_rate: u32,
        amplitude: f64,
    ) -> Result<Option<CalibratedSignal>> {
        let sig = match &self.source {
            SourceSpec::Pure { principal_freq } => {
                synth::synth_pure_tone(*principal_freq, duration, sample_rate, amplitude)?
            }
            SourceSpec::Intermittent {
                principal_freq,
                on_ms,
                off_ms,
            } => synth::synth_intermittent(
                *principal_freq,
                *on_ms,
                *off_ms,
                duration,
                sample_rate,
                amplitude,
            )?,
            SourceSpec::Combined {
                principal_freq,
                secondary_offset,
                secondary_gain,
            } => synth::synth_combined(
                *principal_freq,
                *secondary_offset,
                *secondary_gain,
                duration,
                sample_rate,
                amplitude,
            )?,
            SourceSpec::DoubleBeep {
                beep_pattern,
                repetitions,
            } => synth::synth_double_beep(beep_pattern, *repetitions, duration, sample_rate, amplitude)?,
            SourceSpec::FileBed { .. } => return Ok(None),
        };
        Ok(Some(sig))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseBedKind {
    /// Vehicle-borne rolling noise surrogate (moves with the vehicle).
    Tyre,
    /// Quiet-street ambience surrogate (static at the observer).
    Background,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBedSpec {
    pub kind: NoiseBedKind,
    pub seed: u64,
    /// RMS of the generated bed in pascal.
    pub gain: f64,
}

/// The fifteen experiment stimuli. Stimulus 14 expects an engine recording
/// to be supplied through `bed_path`.
pub fn stimulus_set() -> Vec<StimulusSpec> {
    let mut out = Vec::with_capacity(15);
    let freqs = [350.0, 500.0, 1000.0, 2000.0];
    for (i, &f) in freqs.iter().enumerate() {
        out.push(StimulusSpec {
            id: 1 + i as u8,
            label: format!("Pure tone, continuous, {f} Hz"),
            source: SourceSpec::Pure { principal_freq: f },
            normalize: true,
        });
    }
    for (i, &f) in freqs.iter().enumerate() {
        out.push(StimulusSpec {
            id: 5 + i as u8,
            label: format!("Pure tone, intermittent (500 ms on, 500 ms off), {f} Hz"),
            source: SourceSpec::Intermittent {
                principal_freq: f,
                on_ms: 500.0,
                off_ms: 500.0,
            },
            normalize: true,
        });
    }
    for (i, &f) in freqs.iter().enumerate() {
        out.push(StimulusSpec {
            id: 9 + i as u8,
            label: format!("Combined tone, continuous, {f} Hz (±90 Hz)"),
            source: SourceSpec::Combined {
                principal_freq: f,
                secondary_offset: default_offset(),
                secondary_gain: default_secondary_gain(),
            },
            normalize: true,
        });
    }
    out.push(StimulusSpec {
        id: 13,
        label: "Double beeps (240 ms beep, 10 ms pause, 240 ms beep, 1000 ms pause), 1800-1900 Hz"
            .into(),
        source: SourceSpec::DoubleBeep {
            beep_pattern: default_double_beep(),
            repetitions: None,
        },
        normalize: true,
    });
    out.push(StimulusSpec {
        id: 14,
        label: "Diesel engine".into(),
        source: SourceSpec::FileBed { bed_path: None },
        normalize: true,
    });
    out.push(StimulusSpec {
        id: 15,
        label: "Tyres on asphalt".into(),
        source: SourceSpec::FileBed { bed_path: None },
        normalize: false,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_fifteen_unique_ids() {
        let t = stimulus_set();
        assert_eq!(t.len(), 15);
        for (i, s) in t.iter().enumerate() {
            assert_eq!(s.id as usize, i + 1);
            s.validate().unwrap();
        }
        assert!(!t[14].normalize);
    }

    #[test]
    fn json_mirrors_fields() {
        let spec = &stimulus_set()[9];
        let json = serde_json::to_value(spec).unwrap();
        assert_eq!(json["kind"], "combined");
        assert_eq!(json["principal_freq"], 500.0);
        assert_eq!(json["secondary_offset"], 90.0);
        let back: StimulusSpec = serde_json::from_value(json).unwrap();
        assert_eq!(&back, spec);

        let minimal: StimulusSpec =
            serde_json::from_str(r#"{"id": 3, "kind": "intermittent", "principal_freq": 700}"#).unwrap();
        assert_eq!(
            minimal.source,
            SourceSpec::Intermittent {
                principal_freq: 700.0,
                on_ms: 500.0,
                off_ms: 500.0
            }
        );
        assert!(minimal.normalize);
    }

    #[test]
    fn validation_rejects_bad_ids() {
        let mut s = stimulus_set()[0].clone();
        s.id = 16;
        assert!(s.validate().is_err());
    }
}
