//! Rating records and their ingestion from CSV tables and runner result
//! files.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue};
use crate::session::SCHEMA_VERSION;

/// Header of the ratings CSV format.
pub const CSV_HEADER: [&str; 6] = [
    "participant_id",
    "stimulus_id",
    "annoyance",
    "noticeability",
    "informativeness",
    "keypress_timeline",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyAction {
    Press,
    Release,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyEvent {
    pub event: KeyAction,
    /// Seconds from the start of the trial audio.
    pub time: f64,
}

/// Press/release log of one trial. Written as `press@1.20;release@3.40`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeypressTimeline(pub Vec<KeyEvent>);

impl KeypressTimeline {
    /// Times must not decrease and actions must alternate, starting with a
    /// press.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut expect = KeyAction::Press;
        let mut last = f64::NEG_INFINITY;
        for e in &self.0 {
            if !(e.time >= 0.0) || !e.time.is_finite() {
                return Err(format!("event time {} is not a non-negative number", e.time));
            }
            if e.time < last {
                return Err(format!("event at {} s precedes the one before it", e.time));
            }
            if e.event != expect {
                return Err(format!("expected {expect:?} at {} s", e.time).to_lowercase());
            }
            last = e.time;
            expect = match expect {
                KeyAction::Press => KeyAction::Release,
                KeyAction::Release => KeyAction::Press,
            };
        }
        Ok(())
    }
}

impl fmt::Display for KeypressTimeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            let name = match e.event {
                KeyAction::Press => "press",
                KeyAction::Release => "release",
            };
            write!(f, "{name}@{}", e.time)?;
        }
        Ok(())
    }
}

impl FromStr for KeypressTimeline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(KeypressTimeline::default());
        }
        s.split(';')
            .map(|item| {
                let (name, time) = item
                    .trim()
                    .split_once('@')
                    .ok_or_else(|| format!("'{item}' is not of the form action@seconds"))?;
                let event = match name {
                    "press" => KeyAction::Press,
                    "release" => KeyAction::Release,
                    other => return Err(format!("unknown key action '{other}'")),
                };
                let time = time
                    .parse()
                    .map_err(|_| format!("'{time}' is not a time in seconds"))?;
                Ok(KeyEvent { event, time })
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(KeypressTimeline)
    }
}

/// One participant's answers for one stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub participant_id: String,
    pub stimulus_id: u8,
    pub annoyance: u8,
    pub noticeability: u8,
    pub informativeness: u8,
    pub keypress_timeline: KeypressTimeline,
}

/// Ratings of one trial in a runner result file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRatings {
    pub noticeability: i64,
    pub informativeness: i64,
    pub annoyance: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub stimulus_id: i64,
    #[serde(default)]
    pub training: bool,
    #[serde(default)]
    pub events: Vec<KeyEvent>,
    pub ratings: TrialRatings,
}

/// File exported by the listening-test runner at the end of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub schema_version: u32,
    pub session_id: String,
    /// Free-form demographics; `id` names the participant when present.
    #[serde(default)]
    pub participant: serde_json::Map<String, serde_json::Value>,
    pub trials: Vec<TrialResult>,
    #[serde(default)]
    pub partial: bool,
}

impl SessionResult {
    /// Participant id, falling back to the session id.
    pub fn participant_id(&self) -> String {
        match self.participant.get("id") {
            Some(serde_json::Value::String(s)) if !s.is_empty() => s.clone(),
            Some(v @ serde_json::Value::Number(_)) => v.to_string(),
            _ => self.session_id.clone(),
        }
    }
}

/// Raw, unvalidated fields of one record.
struct RawRecord {
    line: usize,
    participant_id: String,
    stimulus_id: i64,
    ratings: [(&'static str, i64); 3],
    timeline: std::result::Result<KeypressTimeline, String>,
}

fn validate(raw: Vec<RawRecord>, mut issues: Vec<ValidationIssue>) -> Result<Vec<RatingRecord>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        let issue = |field: &str, message: String| ValidationIssue {
            line: r.line,
            field: field.to_string(),
            message,
        };
        let before = issues.len();
        if r.participant_id.trim().is_empty() {
            issues.push(issue("participant_id", "empty participant id".into()));
        }
        if !(1..=15).contains(&r.stimulus_id) {
            issues.push(issue(
                "stimulus_id",
                format!("unknown stimulus id {}", r.stimulus_id),
            ));
        }
        for (field, v) in r.ratings {
            if !(0..=10).contains(&v) {
                issues.push(issue(field, format!("rating {v} outside 0-10")));
            }
        }
        let timeline = match r.timeline {
            Ok(t) => match t.check() {
                Ok(()) => t,
                Err(m) => {
                    issues.push(issue("keypress_timeline", m));
                    continue;
                }
            },
            Err(m) => {
                issues.push(issue("keypress_timeline", m));
                continue;
            }
        };
        if !seen.insert((r.participant_id.clone(), r.stimulus_id)) {
            issues.push(issue(
                "stimulus_id",
                format!(
                    "duplicate rating of stimulus {} by participant {}",
                    r.stimulus_id, r.participant_id
                ),
            ));
        }
        if issues.len() > before {
            continue;
        }
        out.push(RatingRecord {
            participant_id: r.participant_id,
            stimulus_id: r.stimulus_id as u8,
            annoyance: r.ratings[0].1 as u8,
            noticeability: r.ratings[1].1 as u8,
            informativeness: r.ratings[2].1 as u8,
            keypress_timeline: timeline,
        });
    }
    if issues.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(issues))
    }
}

/// Parses and validates a ratings CSV with the [`CSV_HEADER`] columns.
/// Every problem is reported with its 1-based file line.
pub fn parse_ratings_csv<R: Read>(input: R) -> Result<Vec<RatingRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut cols = [0usize; 6];
    let mut issues = Vec::new();
    for (slot, name) in cols.iter_mut().zip(CSV_HEADER) {
        match column(name) {
            Some(i) => *slot = i,
            None if name == "keypress_timeline" => *slot = usize::MAX,
            None => issues.push(ValidationIssue {
                line: 1,
                field: name.into(),
                message: "missing column".into(),
            }),
        }
    }
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    let mut raw = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(i).unwrap_or("");
        let mut int = |name: &'static str, i: usize| -> i64 {
            let s = field(i);
            match s.parse::<i64>() {
                Ok(v) => v,
                Err(_) => {
                    issues.push(ValidationIssue {
                        line,
                        field: name.into(),
                        message: format!("'{s}' is not an integer"),
                    });
                    i64::MIN
                }
            }
        };
        let stimulus_id = int("stimulus_id", cols[1]);
        let ratings = [
            ("annoyance", int("annoyance", cols[2])),
            ("noticeability", int("noticeability", cols[3])),
            ("informativeness", int("informativeness", cols[4])),
        ];
        if stimulus_id == i64::MIN || ratings.iter().any(|r| r.1 == i64::MIN) {
            continue;
        }
        let timeline = if cols[5] == usize::MAX {
            Ok(KeypressTimeline::default())
        } else {
            field(cols[5]).parse()
        };
        raw.push(RawRecord {
            line,
            participant_id: field(cols[0]).to_string(),
            stimulus_id,
            ratings,
            timeline,
        });
    }
    validate(raw, issues)
}

/// Experimental trials of a runner result as validated records. Training
/// trials are dropped; issue lines are 1-based trial indices.
pub fn ratings_from_session(result: &SessionResult) -> Result<Vec<RatingRecord>> {
    if result.schema_version != SCHEMA_VERSION {
        return Err(Error::Mismatch(format!(
            "result schema_version {} but this build reads {SCHEMA_VERSION}",
            result.schema_version
        )));
    }
    let participant = result.participant_id();
    let raw = result
        .trials
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.training)
        .map(|(i, t)| RawRecord {
            line: i + 1,
            participant_id: participant.clone(),
            stimulus_id: t.stimulus_id,
            ratings: [
                ("annoyance", t.ratings.annoyance),
                ("noticeability", t.ratings.noticeability),
                ("informativeness", t.ratings.informativeness),
            ],
            timeline: Ok(KeypressTimeline(t.events.clone())),
        })
        .collect();
    validate(raw, Vec::new())
}

/// Loads ratings from a CSV table or, for `.json` files, a runner result
/// (a single session or an array of sessions).
pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return parse_ratings_csv(std::fs::File::open(path)?);
    }
    let value: serde_json::Value = serde_json::from_reader(std::fs::File::open(path)?)?;
    let sessions: Vec<SessionResult> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    let mut out = Vec::new();
    for s in &sessions {
        out.extend(ratings_from_session(s)?);
    }
    let raw = out
        .into_iter()
        .enumerate()
        .map(|(i, r)| RawRecord {
            line: i + 1,
            participant_id: r.participant_id,
            stimulus_id: r.stimulus_id as i64,
            ratings: [
                ("annoyance", r.annoyance as i64),
                ("noticeability", r.noticeability as i64),
                ("informativeness", r.informativeness as i64),
            ],
            timeline: Ok(r.keypress_timeline),
        })
        .collect();
    // re-check duplicates across sessions of the same participant
    validate(raw, Vec::new())
}

/// Writes records in the CSV format read by [`parse_ratings_csv`].
pub fn write_ratings_csv<W: Write>(records: &[RatingRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.participant_id.clone(),
            r.stimulus_id.to_string(),
            r.annoyance.to_string(),
            r.noticeability.to_string(),
            r.informativeness.to_string(),
            r.keypress_timeline.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "participant_id,stimulus_id,annoyance,noticeability,informativeness,keypress_timeline\n\
        p1,1,5,7,6,press@0.5;release@3.25\n\
        p1,2,3,4,4,\n";

    fn issues(err: Error) -> Vec<ValidationIssue> {
        match err {
            Error::Validation(v) => v,
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn parses_good_csv() {
        let r = parse_ratings_csv(GOOD.as_bytes()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].keypress_timeline.0.len(), 2);
        assert_eq!(r[0].keypress_timeline.0[1].time, 3.25);
        assert!(r[1].keypress_timeline.0.is_empty());
    }

    #[test]
    fn out_of_range_rating_names_field_and_line() {
        let csv = GOOD.replace("p1,2,3,4,4", "p1,2,11,4,4");
        let v = issues(parse_ratings_csv(csv.as_bytes()).unwrap_err());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "annoyance");
        assert_eq!(v[0].line, 3);
    }

    #[test]
    fn unknown_stimulus_and_duplicates() {
        let csv = format!("{GOOD}p1,16,1,1,1,\np1,1,2,2,2,\n");
        let v = issues(parse_ratings_csv(csv.as_bytes()).unwrap_err());
        assert_eq!(v.len(), 2);
        assert!(v[0].message.contains("unknown stimulus"));
        assert!(v[1].message.contains("duplicate"));
        assert_eq!(v[1].line, 5);
    }

    #[test]
    fn malformed_fields_are_reported() {
        let csv = format!("{GOOD}p2,x,1,1,1,\np2,3,1,1,1,release@1\n");
        let v = issues(parse_ratings_csv(csv.as_bytes()).unwrap_err());
        assert_eq!(v[0].field, "stimulus_id");
        assert_eq!(v[1].field, "keypress_timeline");
    }

    #[test]
    fn timeline_round_trips() {
        let t: KeypressTimeline = "press@1.2;release@3.4;press@5".parse().unwrap();
        assert_eq!(t.to_string(), "press@1.2;release@3.4;press@5");
        assert!(t.check().is_ok());
        let bad: KeypressTimeline = "press@2;release@1".parse().unwrap();
        assert!(bad.check().is_err());
    }

    #[test]
    fn csv_write_read_round_trip() {
        let r = parse_ratings_csv(GOOD.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_ratings_csv(&r, &mut buf).unwrap();
        assert_eq!(parse_ratings_csv(buf.as_slice()).unwrap(), r);
    }
}
