//! Moving point source heard at a fixed observer.
//!
//! The observer sits at the origin; the source moves along `y = y_s` in the
//! +x direction at constant speed. Reception time `t` and emission time
//! `τ` are tied by `τ + r(τ)/c = t`, which is what produces the Doppler
//! shift. Propagation is free field with spherical spreading only.

mod interp;

pub use interp::SincInterpolator;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::CalibratedSignal;

pub const SPEED_OF_SOUND: f64 = 343.0;

/// Head radius for the interaural delay of the stereo stage, m.
const HEAD_RADIUS: f64 = 0.0875;

/// Straight-line, constant-velocity source path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x_start: f64,
    pub x_end: f64,
    /// Lateral offset of the path from the observer, m.
    pub y_s: f64,
    pub v_x: f64,
    pub c: f64,
    /// Duration of a stationary source (`v_x = 0`); ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_s: Option<f64>,
}

impl Default for Trajectory {
    /// 30 km/h pass from -60 m to +60 m, 3 m from the observer.
    fn default() -> Self {
        Trajectory {
            x_start: -60.0,
            x_end: 60.0,
            y_s: 3.0,
            v_x: 8.33,
            c: SPEED_OF_SOUND,
            hold_s: None,
        }
    }
}

impl Trajectory {
    pub fn passby(x_start: f64, x_end: f64, y_s: f64, v_x: f64) -> Result<Self> {
        let t = Trajectory {
            x_start,
            x_end,
            y_s,
            v_x,
            c: SPEED_OF_SOUND,
            hold_s: None,
        };
        t.validate()?;
        Ok(t)
    }

    /// Source pinned at `(x, y_s)` for `duration` seconds.
    pub fn stationary(x: f64, y_s: f64, duration: f64) -> Result<Self> {
        let t = Trajectory {
            x_start: x,
            x_end: x,
            y_s,
            v_x: 0.0,
            c: SPEED_OF_SOUND,
            hold_s: Some(duration),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_s > 0.0) {
            return Err(Error::invalid("lateral offset y_s must be positive"));
        }
        if !(self.c > 0.0) {
            return Err(Error::invalid("speed of sound must be positive"));
        }
        if !(self.v_x >= 0.0 && self.v_x < self.c) {
            return Err(Error::invalid("source speed must satisfy 0 <= v_x < c"));
        }
        if self.v_x > 0.0 && !(self.x_end > self.x_start) {
            return Err(Error::invalid("x_end must exceed x_start for a moving source"));
        }
        if self.v_x == 0.0 && !self.hold_s.is_some_and(|d| d > 0.0) {
            return Err(Error::invalid("a stationary source needs a positive hold_s"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        if self.v_x > 0.0 {
            (self.x_end - self.x_start) / self.v_x
        } else {
            self.hold_s.unwrap_or(0.0)
        }
    }

    /// Source x position at emission time `tau`.
    pub fn position(&self, tau: f64) -> f64 {
        self.x_start + self.v_x * tau
    }

    pub fn distance(&self, tau: f64) -> f64 {
        self.position(tau).hypot(self.y_s)
    }

    /// Emission time whose wavefront reaches the observer at `t_receive`.
    pub fn emission_time(&self, t_receive: f64) -> f64 {
        let (c, v, x0, y) = (self.c, self.v_x, self.x_start, self.y_s);
        let a = c * c - v * v;
        let b = c * c * t_receive + x0 * v;
        let k = c * c * t_receive * t_receive - x0 * x0 - y * y;
        let mut tau = (b - (b * b - a * k).max(0.0).sqrt()) / a;
        // one Newton step polishes the rounding of the closed form
        let r = self.distance(tau);
        let f = tau + r / c - t_receive;
        let df = 1.0 + self.position(tau) * v / (r * c);
        tau -= f / df;
        tau
    }

    /// How long before reception starts the first audible wavefront left
    /// the source, s.
    pub fn emission_lead(&self) -> f64 {
        (-self.emission_time(0.0)).max(0.0)
    }

    /// Source azimuth seen from the observer facing the road; negative to
    /// the left.
    pub fn azimuth(&self, tau: f64) -> f64 {
        self.position(tau).atan2(self.y_s)
    }
}

/// Free-function form of [`Trajectory::emission_time`].
pub fn emission_time(t_receive: f64, traj: &Trajectory) -> f64 {
    traj.emission_time(t_receive)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Apply the retarded-time delay (and with it the Doppler shift).
    pub doppler: bool,
    /// Apply `r_ref / r` spherical spreading.
    pub spreading: bool,
    pub r_ref: f64,
    /// Emission time of source sample 0, s. Negative values let the source
    /// sound before reception starts.
    pub source_start: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            doppler: true,
            spreading: true,
            r_ref: 1.0,
            source_start: 0.0,
        }
    }
}

/// Observer-frame signal of a mono source moving along `traj`.
pub fn render_passby(source: &CalibratedSignal, traj: &Trajectory) -> Result<CalibratedSignal> {
    render_passby_with(source, traj, &RenderOptions::default())
}

pub fn render_passby_with(
    source: &CalibratedSignal,
    traj: &Trajectory,
    opts: &RenderOptions,
) -> Result<CalibratedSignal> {
    traj.validate()?;
    let x = source.mono_samples()?;
    let fs = source.sample_rate() as f64;
    let n_out = (traj.duration() * fs).round() as usize;
    let needed = n_out as f64 / fs - opts.source_start.min(0.0);
    if (x.len() as f64) < (needed * fs).round() {
        return Err(Error::SourceTooShort {
            needed,
            available: source.duration(),
        });
    }
    let interp = SincInterpolator::default();
    let out = (0..n_out)
        .map(|n| {
            let t = n as f64 / fs;
            let (tau, pos) = if opts.doppler {
                let tau = traj.emission_time(t);
                (tau, (tau - opts.source_start) * fs)
            } else {
                (t, n as f64 - opts.source_start * fs)
            };
            let gain = if opts.spreading {
                opts.r_ref / traj.distance(tau)
            } else {
                1.0
            };
            gain * interp.sample(x, pos)
        })
        .collect();
    Ok(CalibratedSignal::mono(source.sample_rate(), out)?.with_calibration_of(source))
}

/// Two-channel listening version of an observer signal: constant-power pan
/// from the source azimuth plus a spherical-head interaural delay on the far
/// ear. Not meant for metric computation.
pub fn stereo_stage(mono: &CalibratedSignal, traj: &Trajectory) -> Result<CalibratedSignal> {
    traj.validate()?;
    let x = mono.mono_samples()?;
    let fs = mono.sample_rate() as f64;
    let interp = SincInterpolator::default();
    let mut left = Vec::with_capacity(x.len());
    let mut right = Vec::with_capacity(x.len());
    for (n, &v) in x.iter().enumerate() {
        let tau = traj.emission_time(n as f64 / fs);
        let theta = traj.azimuth(tau);
        let pan = (theta / std::f64::consts::FRAC_PI_2 + 1.0) * std::f64::consts::FRAC_PI_4;
        let (gl, gr) = (pan.cos(), pan.sin());
        let itd = HEAD_RADIUS / traj.c * (theta.abs() + theta.abs().sin());
        let delayed = if itd > 0.0 {
            interp.sample(x, n as f64 - itd * fs)
        } else {
            v
        };
        if theta < 0.0 {
            left.push(gl * v);
            right.push(gr * delayed);
        } else {
            left.push(gl * delayed);
            right.push(gr * v);
        }
    }
    Ok(CalibratedSignal::new(mono.sample_rate(), vec![left, right])?.with_calibration_of(mono))
}
