// Synthesizes the parametric warning sounds of the stimulus table at the
// emission point and prints their A-weighted levels.

use evsound::signal::{laeq, stimulus_set};

pub fn run_example() -> evsound::Result<()> {
    for spec in stimulus_set() {
        // 1 Pa peak; file-bed stimuli come from recordings and are skipped
        let Some(sig) = spec.synthesize(2.0, 48_000, 1.0)? else {
            println!("{:2}  {:<80}  (recording)", spec.id, spec.label);
            continue;
        };
        println!(
            "{:2}  {:<80}  {:6.2} dBA  peak {:.3} Pa",
            spec.id,
            spec.label,
            laeq(&sig)?,
            sig.peak()
        );
    }
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
