// Builds a runner session manifest for a seed, checks it, and shows the
// trial order and the annoyance question.

use evsound::propagation::Trajectory;
use evsound::session::{manifest_schema, SessionManifest};

pub fn run_example() -> evsound::Result<()> {
    let manifest = SessionManifest::new("demo", 42, 48_000, 20.0, Trajectory::default());
    manifest.validate()?;
    let order: Vec<u8> = manifest.experimental().map(|t| t.stimulus_id).collect();
    println!("training stimulus {}", manifest.trials[0].stimulus_id);
    println!("trial order {order:?}");
    println!("question 3: {}", manifest.questions[2].text);
    println!("schema requires {}", manifest_schema()["required"]);
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
