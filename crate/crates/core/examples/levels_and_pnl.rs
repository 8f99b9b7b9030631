// Conventional levels of one rendered stimulus: maximum fast level,
// A-weighted maximum and equivalent level, PNLT and EPNL.

use evsound::levels::{
    a_weight, lp_max, pnl_chain, third_octave_frames, TimeWeighting, PNL_FRAME_S,
};
use evsound::pipeline::{render_stimulus, SynthConfig};
use evsound::signal::{laeq, stimulus_set};

pub fn run_example() -> evsound::Result<()> {
    let spec = &stimulus_set()[2]; // continuous 1 kHz tone
    let stimulus = render_stimulus(spec, &SynthConfig::default())?;
    let mono = &stimulus.mono;

    let pnl = pnl_chain(&third_octave_frames(mono, PNL_FRAME_S)?)?;
    println!("{}", spec.label);
    println!("L_p,max (fast)   {:6.2} dB", lp_max(mono, TimeWeighting::Fast)?);
    println!("L_p,A,max (fast) {:6.2} dBA", lp_max(&a_weight(mono), TimeWeighting::Fast)?);
    println!("L_p,A,eq         {:6.2} dBA", laeq(mono)?);
    println!("PNLT_max         {:6.2} PNdB", pnl.pnlt_max);
    println!("EPNL             {:6.2} EPNdB", pnl.epnl);
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
