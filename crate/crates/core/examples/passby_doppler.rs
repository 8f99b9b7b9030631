// Renders a 1 kHz tone along the default 30 km/h pass-by and reads the
// Doppler-shifted frequency at the start and end of the pass from a
// spectrogram.

use evsound::levels::{spectrogram, SpectrogramParams};
use evsound::propagation::{render_passby_with, RenderOptions, Trajectory};
use evsound::signal::synth_pure_tone;

pub fn run_example() -> evsound::Result<()> {
    let traj = Trajectory::default();
    let lead = traj.emission_lead() + 0.01;
    let source = synth_pure_tone(1000.0, traj.duration() + lead, 48_000, 1.0)?;
    let opts = RenderOptions {
        source_start: -lead,
        ..RenderOptions::default()
    };
    let heard = render_passby_with(&source, &traj, &opts)?;
    println!("duration {:.3} s", heard.duration());

    let sg = spectrogram(&heard, &SpectrogramParams::default())?;
    let first = sg.peak_frequency(0, 900.0, 1100.0).unwrap_or(f64::NAN);
    let last = sg.peak_frequency(sg.times.len() - 1, 900.0, 1100.0).unwrap_or(f64::NAN);
    let c = traj.c;
    let cos0 = -traj.x_start / traj.x_start.hypot(traj.y_s);
    println!("approach: {first:.1} Hz (closed form {:.1} Hz)", 1000.0 * c / (c - traj.v_x * cos0));
    println!("recede:   {last:.1} Hz (closed form {:.1} Hz)", 1000.0 * c / (c + traj.v_x * cos0));
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
