//! Synthesis and evaluation of acoustic warning signals for quiet vehicles.
//!
//! Signals are sampled sound pressure in pascal ([`CalibratedSignal`]).
//! The crate renders vehicle pass-bys at a fixed listener, computes level
//! and sound quality metrics on them, and relates those metrics to listening
//! test ratings.

pub mod dsp;
pub mod error;
pub mod io;
pub mod levels;
pub mod pipeline;
pub mod plot;
pub mod propagation;
pub mod session;
pub mod signal;
pub mod sqm;
pub mod study;

pub use error::{Error, Result};
pub use signal::CalibratedSignal;
