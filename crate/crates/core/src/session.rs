//! Listening-session bundle handed to the browser runner: the manifest
//! type, its question texts and its JSON schema.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::propagation::Trajectory;

/// Version shared by the session manifest and the runner's result files.
pub const SCHEMA_VERSION: u32 = 1;
/// Number of experimental (non-training) trials.
pub const EXPERIMENTAL_TRIALS: usize = 15;
/// Stimulus played in the training trial (tyre noise only).
pub const TRAINING_STIMULUS: u8 = 15;

pub const SESSION_INSTRUCTION: &str = "Imagine that you are a pedestrian standing on the side of the road. You will experience 15 audiovisual scenarios of a vehicle driving by you. During each scenario, press and HOLD the trigger when you feel safe to cross the road in front of the car. You can release the button and then press it again multiple times during the scenario. After each scenario, you will be asked to answer a few questions. Press the button to proceed. The experiment will start with a training scenario to familiarise yourself with the environment. During this scenario, press and HOLD the trigger when you feel safe crossing the road in front of the car. You can release the button and then press it again multiple times during the scenario. Press the button to start.";
pub const TRAINING_INSTRUCTION: &str = "During this scenario, press and HOLD the trigger when you feel safe crossing the road in front of the car. You can release the button and then press it again multiple times during the scenario.";
pub const TRIAL_INSTRUCTION: &str = "Start by HOLDING the trigger button. Release the trigger button when it becomes unsafe to cross; press it again when safe to cross";

/// Rating question ids in presentation order.
pub const QUESTION_IDS: [&str; 3] = ["noticeability", "informativeness", "annoyance"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub min: u8,
    pub max: u8,
}

/// The three slider questions asked after every trial.
pub fn questions() -> Vec<Question> {
    let texts = [
        "The vehicle sound was easy to notice (0 = not easy to notice, 10 = easy to notice)",
        "The sound gave me enough information to realise that a vehicle was approaching (0 = not enough information, 10 = enough information)",
        "The vehicle sound was annoying (0 = not annoying, 10 = extremely annoying)",
    ];
    QUESTION_IDS
        .iter()
        .zip(texts)
        .map(|(id, text)| Question {
            id: id.to_string(),
            text: text.to_string(),
            min: 0,
            max: 10,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instructions {
    pub session: String,
    pub training: String,
    pub trial: String,
}

impl Default for Instructions {
    fn default() -> Self {
        Instructions {
            session: SESSION_INSTRUCTION.into(),
            training: TRAINING_INSTRUCTION.into(),
            trial: TRIAL_INSTRUCTION.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub stimulus_id: u8,
    /// Stereo WAV file name relative to the manifest.
    pub file: String,
    pub duration_s: f64,
    pub training: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub schema_version: u32,
    pub session_id: String,
    pub sample_rate: u32,
    /// Pascal represented by a full-scale WAV sample.
    pub calibration_pa_per_fs: f64,
    pub trajectory: Trajectory,
    /// Training trial first, then the experimental trials in playback order.
    pub trials: Vec<TrialEntry>,
    pub instructions: Instructions,
    pub questions: Vec<Question>,
    pub seed: u64,
}

/// Experimental presentation order for `seed`: a permutation of 1..=15.
pub fn trial_order(seed: u64) -> Vec<u8> {
    let mut ids: Vec<u8> = (1..=EXPERIMENTAL_TRIALS as u8).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids
}

/// File name of the stereo listening file of a stimulus.
pub fn stereo_file_name(stimulus_id: u8) -> String {
    format!("stimulus_{stimulus_id:02}_stereo.wav")
}

/// File name of the mono metric file of a stimulus.
pub fn mono_file_name(stimulus_id: u8) -> String {
    format!("stimulus_{stimulus_id:02}_mono.wav")
}

impl SessionManifest {
    /// Manifest with the training trial and the seeded trial order.
    pub fn new(
        session_id: impl Into<String>,
        seed: u64,
        sample_rate: u32,
        calibration_pa_per_fs: f64,
        trajectory: Trajectory,
    ) -> Self {
        let duration_s = trajectory.duration();
        let entry = |id: u8, training| TrialEntry {
            stimulus_id: id,
            file: stereo_file_name(id),
            duration_s,
            training,
        };
        let mut trials = vec![entry(TRAINING_STIMULUS, true)];
        trials.extend(trial_order(seed).into_iter().map(|id| entry(id, false)));
        SessionManifest {
            schema_version: SCHEMA_VERSION,
            session_id: session_id.into(),
            sample_rate,
            calibration_pa_per_fs,
            trajectory,
            trials,
            instructions: Instructions::default(),
            questions: questions(),
            seed,
        }
    }

    /// Experimental trials in playback order.
    pub fn experimental(&self) -> impl Iterator<Item = &TrialEntry> {
        self.trials.iter().filter(|t| !t.training)
    }

    /// Structural checks mirroring [`manifest_schema`] plus the order
    /// invariant: experimental trials are the seeded permutation of 1..=15.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Mismatch(format!("session manifest: {m}")));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.session_id.is_empty() {
            return fail("empty session_id".into());
        }
        if self.sample_rate == 0 || !(self.calibration_pa_per_fs > 0.0) {
            return fail("sample rate and calibration must be positive".into());
        }
        self.trajectory.validate()?;
        let training: Vec<_> = self.trials.iter().filter(|t| t.training).collect();
        if training.len() != 1 || !self.trials[0].training {
            return fail("exactly one training trial, placed first, is required".into());
        }
        let order: Vec<u8> = self.experimental().map(|t| t.stimulus_id).collect();
        let unique: BTreeSet<u8> = order.iter().copied().collect();
        if order.len() != EXPERIMENTAL_TRIALS
            || unique.len() != EXPERIMENTAL_TRIALS
            || unique.iter().any(|id| !(1..=15).contains(id))
        {
            return fail("experimental trials must be a permutation of stimuli 1-15".into());
        }
        if order != trial_order(self.seed) {
            return fail(format!("trial order does not follow seed {}", self.seed));
        }
        for t in &self.trials {
            if t.file.is_empty() || !(t.duration_s > 0.0) {
                return fail(format!("trial for stimulus {} lacks file or duration", t.stimulus_id));
            }
        }
        let ids: Vec<&str> = self.questions.iter().map(|q| q.id.as_str()).collect();
        if ids != QUESTION_IDS || self.questions.iter().any(|q| q.min != 0 || q.max != 10) {
            return fail("questions must be noticeability, informativeness, annoyance on 0-10".into());
        }
        Ok(())
    }
}

/// JSON Schema (draft 2020-12) of [`SessionManifest`], shipped with each
/// bundle for the runner.
pub fn manifest_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "evsound session manifest",
        "type": "object",
        "required": ["schema_version", "session_id", "sample_rate", "calibration_pa_per_fs",
                     "trajectory", "trials", "instructions", "questions", "seed"],
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "session_id": { "type": "string", "minLength": 1 },
            "sample_rate": { "type": "integer", "minimum": 1 },
            "calibration_pa_per_fs": { "type": "number", "exclusiveMinimum": 0 },
            "trajectory": {
                "type": "object",
                "required": ["x_start", "x_end", "y_s", "v_x", "c"],
                "properties": {
                    "x_start": { "type": "number" },
                    "x_end": { "type": "number" },
                    "y_s": { "type": "number" },
                    "v_x": { "type": "number" },
                    "c": { "type": "number" },
                    "hold_s": { "type": "number" }
                }
            },
            "trials": {
                "type": "array",
                "minItems": EXPERIMENTAL_TRIALS + 1,
                "maxItems": EXPERIMENTAL_TRIALS + 1,
                "items": {
                    "type": "object",
                    "required": ["stimulus_id", "file", "duration_s", "training"],
                    "properties": {
                        "stimulus_id": { "type": "integer", "minimum": 1, "maximum": 15 },
                        "file": { "type": "string", "minLength": 1 },
                        "duration_s": { "type": "number", "exclusiveMinimum": 0 },
                        "training": { "type": "boolean" }
                    }
                }
            },
            "instructions": {
                "type": "object",
                "required": ["session", "training", "trial"],
                "properties": {
                    "session": { "type": "string" },
                    "training": { "type": "string" },
                    "trial": { "type": "string" }
                }
            },
            "questions": {
                "type": "array",
                "minItems": 3,
                "maxItems": 3,
                "items": {
                    "type": "object",
                    "required": ["id", "text", "min", "max"],
                    "properties": {
                        "id": { "enum": QUESTION_IDS },
                        "text": { "type": "string" },
                        "min": { "const": 0 },
                        "max": { "const": 10 }
                    }
                }
            },
            "seed": { "type": "integer", "minimum": 0 }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(seed: u64) -> SessionManifest {
        SessionManifest::new("s1", seed, 48_000, 20.0, Trajectory::default())
    }

    #[test]
    fn order_is_seeded_permutation() {
        let a = trial_order(42);
        assert_eq!(a, trial_order(42));
        assert_ne!(a, trial_order(43));
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=15).collect::<Vec<u8>>());
    }

    #[test]
    fn new_manifest_validates() {
        let m = manifest(7);
        m.validate().unwrap();
        assert_eq!(m.trials.len(), 16);
        assert!(m.trials[0].training);
        assert_eq!(
            m.questions[2].text,
            "The vehicle sound was annoying (0 = not annoying, 10 = extremely annoying)"
        );
    }

    #[test]
    fn tampered_order_is_rejected() {
        let mut m = manifest(7);
        m.trials.swap(1, 2);
        assert!(m.validate().is_err());
        let mut m = manifest(7);
        m.schema_version = 99;
        assert!(m.validate().is_err());
    }

    #[test]
    fn schema_requires_every_serialized_field() {
        let value = serde_json::to_value(manifest(1)).unwrap();
        let schema = manifest_schema();
        let required: BTreeSet<&str> = schema["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        let present: BTreeSet<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(required, present);
    }
}
