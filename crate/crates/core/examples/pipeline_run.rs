// Synthesis and metric stages on disk for a few stimuli: WAV files and a
// manifest, then the metrics table read back from those files.

use std::path::PathBuf;

use evsound::pipeline::{cmd_metrics, cmd_synth, write_metrics, OutputFormat, SynthConfig};
use evsound::signal::stimulus_set;

fn out_dir() -> PathBuf {
    std::env::var_os("EVSOUND_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("evsound-examples"))
}

pub fn run_example() -> evsound::Result<()> {
    let dir = out_dir().join("pipeline");
    let specs: Vec<_> = stimulus_set().into_iter().filter(|s| [1, 5, 15].contains(&s.id)).collect();
    let manifest = cmd_synth(&specs, &SynthConfig::default(), &dir)?;
    for s in &manifest.stimuli {
        println!("{:2} {:<60} {:6.2} dBA  {}", s.id, s.label, s.laeq_dba, s.mono_file);
    }
    let report = cmd_metrics(&dir)?;
    write_metrics(&report, &dir.join("metrics.csv"), OutputFormat::Csv)?;
    for m in &report.metrics {
        println!("{:2} N5 {:6.2}  PA {:6.2}  EPNL {:6.2}", m.stimulus_id, m.n5, m.pa, m.epnl);
    }
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
