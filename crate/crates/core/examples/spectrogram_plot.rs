// Spectrogram of the 2 kHz combined tone written as CSV and PNG heat map.

use std::path::PathBuf;

use evsound::io;
use evsound::levels::{spectrogram, SpectrogramParams};
use evsound::pipeline::{render_stimulus, SynthConfig};
use evsound::plot::spectrogram_png;
use evsound::signal::stimulus_set;

fn out_dir() -> PathBuf {
    std::env::var_os("EVSOUND_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("evsound-examples"))
}

pub fn run_example() -> evsound::Result<()> {
    let stimulus = render_stimulus(&stimulus_set()[11], &SynthConfig::default())?;
    let sg = spectrogram(&stimulus.mono, &SpectrogramParams::default())?;

    let mid = sg.times.len() / 2;
    for (lo, hi) in [(1850.0, 1960.0), (1960.0, 2050.0), (2050.0, 2150.0)] {
        let f = sg.peak_frequency(mid, lo, hi).unwrap_or(f64::NAN);
        println!("ridge in {lo}-{hi} Hz at {f:.1} Hz");
    }

    let dir = out_dir();
    io::write_with(&dir.join("combined_2000_spectrogram.csv"), |b| sg.write_csv(b))?;
    io::atomic_write(
        &dir.join("combined_2000_spectrogram.png"),
        &spectrogram_png(&sg, 5000.0, 80.0)?,
    )?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
