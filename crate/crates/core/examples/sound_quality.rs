// Time-varying loudness, sharpness, tonality, roughness and fluctuation
// strength of a 1 kHz tone at 60 dB, their 5 % exceeded values and the
// psychoacoustic annoyance built on them.

use evsound::dsp::P_REF;
use evsound::signal::synth_pure_tone;
use evsound::sqm::{SqmTraces, DEFAULT_WARMUP_S};

pub fn run_example() -> evsound::Result<()> {
    let amplitude = 2f64.sqrt() * P_REF * 10f64.powf(60.0 / 20.0);
    let tone = synth_pure_tone(1000.0, 3.0, 48_000, amplitude)?;
    let traces = SqmTraces::compute(&tone)?;
    for t in traces.iter() {
        println!("{:<22} {:5} samples", t.metric.to_string(), t.len());
    }
    let s = traces.summarize(DEFAULT_WARMUP_S)?;
    println!(
        "N5 {:.2} sone  S5 {:.2} acum  K5 {:.2} t.u.  R5 {:.3} asper  FS5 {:.3} vacil  PA {:.2}",
        s.n5, s.s5, s.k5, s.r5, s.fs5, s.pa
    );
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
