// Reads a runner result file (one session, training trial included) into
// validated rating records and writes them back as the ratings CSV.

use evsound::study::{ratings_from_session, write_ratings_csv, SessionResult};

const RESULT: &str = r#"{
  "schema_version": 1,
  "session_id": "session-42",
  "participant": { "id": "P07", "age_group": "25-34" },
  "partial": false,
  "trials": [
    { "stimulus_id": 15, "training": true, "events": [],
      "ratings": { "noticeability": 3, "informativeness": 2, "annoyance": 1 } },
    { "stimulus_id": 4, "training": false,
      "events": [ { "event": "press", "time": 0.4 }, { "event": "release", "time": 6.15 } ],
      "ratings": { "noticeability": 9, "informativeness": 7, "annoyance": 8 } },
    { "stimulus_id": 1, "training": false, "events": [],
      "ratings": { "noticeability": 6, "informativeness": 6, "annoyance": 4 } }
  ]
}"#;

pub fn run_example() -> evsound::Result<()> {
    let result: SessionResult = serde_json::from_str(RESULT)?;
    let records = ratings_from_session(&result)?;
    println!("{} experimental trials from {}", records.len(), result.participant_id());
    let mut csv = Vec::new();
    write_ratings_csv(&records, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
