#[allow(dead_code)]
mod synth_sources {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synth_sources.rs"));
}

#[test]
fn synth_sources_example_runs() {
    synth_sources::run_example().expect("synth_sources example should run");
}

#[allow(dead_code)]
mod passby_doppler {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/passby_doppler.rs"));
}

#[test]
fn passby_doppler_example_runs() {
    passby_doppler::run_example().expect("passby_doppler example should run");
}

#[allow(dead_code)]
mod levels_and_pnl {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/levels_and_pnl.rs"));
}

#[test]
fn levels_and_pnl_example_runs() {
    levels_and_pnl::run_example().expect("levels_and_pnl example should run");
}

#[allow(dead_code)]
mod spectrogram_plot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrogram_plot.rs"));
}

#[test]
fn spectrogram_plot_example_runs() {
    spectrogram_plot::run_example().expect("spectrogram_plot example should run");
}

#[allow(dead_code)]
mod sound_quality {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sound_quality.rs"));
}

#[test]
fn sound_quality_example_runs() {
    sound_quality::run_example().expect("sound_quality example should run");
}

#[allow(dead_code)]
mod correlation_study {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/correlation_study.rs"));
}

#[test]
fn correlation_study_example_runs() {
    correlation_study::run_example().expect("correlation_study example should run");
}

#[allow(dead_code)]
mod session_bundle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/session_bundle.rs"));
}

#[test]
fn session_bundle_example_runs() {
    session_bundle::run_example().expect("session_bundle example should run");
}

#[allow(dead_code)]
mod ingest_results {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ingest_results.rs"));
}

#[test]
fn ingest_results_example_runs() {
    ingest_results::run_example().expect("ingest_results example should run");
}

#[allow(dead_code)]
mod pipeline_run {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pipeline_run.rs"));
}

#[test]
fn pipeline_run_example_runs() {
    pipeline_run::run_example().expect("pipeline_run example should run");
}
