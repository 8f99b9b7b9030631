//! Windowed-sinc fractional-delay interpolation.

use std::f64::consts::PI;

/// Kaiser-windowed sinc kernel tabulated over fractional positions.
#[derive(Clone, Debug)]
pub struct SincInterpolator {
    taps: usize,
    phases: usize,
    // (phases + 1) rows of `taps` coefficients
    table: Vec<f64>,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else if u.fract() == 0.0 {
        0.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

impl SincInterpolator {
    pub const DEFAULT_TAPS: usize = 32;
    const DEFAULT_BETA: f64 = 8.6;
    const DEFAULT_PHASES: usize = 1024;

    pub fn new(taps: usize, beta: f64, phases: usize) -> Self {
        assert!(taps >= 2 && taps % 2 == 0, "even tap count expected");
        let half = (taps / 2) as f64;
        let norm = bessel_i0(beta);
        let mut table = Vec::with_capacity((phases + 1) * taps);
        for j in 0..=phases {
            let frac = j as f64 / phases as f64;
            for k in 0..taps {
                // tap k multiplies sample n0 + k - (taps/2 - 1)
                let offset = k as f64 - (half - 1.0);
                let u = frac - offset;
                let r = u / half;
                let w = if r.abs() <= 1.0 {
                    bessel_i0(beta * (1.0 - r * r).sqrt()) / norm
                } else {
                    0.0
                };
                table.push(sinc(u) * w);
            }
        }
        SincInterpolator {
            taps,
            phases,
            table,
        }
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Value of `x` at fractional index `pos`; samples outside the buffer
    /// count as zero.
    pub fn sample(&self, x: &[f64], pos: f64) -> f64 {
        let base = pos.floor();
        let frac = pos - base;
        let n0 = base as i64;
        if frac == 0.0 {
            return if n0 >= 0 && (n0 as usize) < x.len() {
                x[n0 as usize]
            } else {
                0.0
            };
        }
        let p = frac * self.phases as f64;
        let j = (p.floor() as usize).min(self.phases - 1);
        let a = p - j as f64;
        let row0 = &self.table[j * self.taps..(j + 1) * self.taps];
        let row1 = &self.table[(j + 1) * self.taps..(j + 2) * self.taps];
        let first = n0 - (self.taps as i64 / 2 - 1);
        let mut acc = 0.0;
        if first >= 0 && (first as usize + self.taps) <= x.len() {
            let s = &x[first as usize..first as usize + self.taps];
            for k in 0..self.taps {
                acc += s[k] * (row0[k] + a * (row1[k] - row0[k]));
            }
        } else {
            for k in 0..self.taps {
                let idx = first + k as i64;
                if idx >= 0 && (idx as usize) < x.len() {
                    acc += x[idx as usize] * (row0[k] + a * (row1[k] - row0[k]));
                }
            }
        }
        acc
    }
}

impl Default for SincInterpolator {
    fn default() -> Self {
        Self::new(Self::DEFAULT_TAPS, Self::DEFAULT_BETA, Self::DEFAULT_PHASES)
    }
}
