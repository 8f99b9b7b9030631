//! Minimal raster plots written as PNG: a spectrogram heat map, annoyance
//! box plots and a metric-versus-rating scatter. No axes labels; the CSV
//! written alongside each plot carries the numbers.

use crate::error::{Error, Result};
use crate::levels::Spectrogram;
use crate::study::{BoxStats, Scatter};

type Rgb = [u8; 3];

const WHITE: Rgb = [255, 255, 255];
const BLACK: Rgb = [0, 0, 0];
const GREY: Rgb = [160, 160, 160];
const BLUE: Rgb = [31, 119, 180];
const RED: Rgb = [214, 39, 40];

/// RGB pixel buffer with a data-to-pixel mapping.
pub struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            pixels: WHITE.repeat(width * height),
        }
    }

    pub fn set(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = 3 * (y as usize * self.width + x as usize);
            self.pixels[i..i + 3].copy_from_slice(&c);
        }
    }

    pub fn line(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
        for s in 0..=steps {
            let x = x0 + (x1 - x0) * s / steps;
            let y = y0 + (y1 - y0) * s / steps;
            self.set(x, y, c);
        }
    }

    pub fn rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
        self.line(x0, y0, x1, y0, c);
        self.line(x1, y0, x1, y1, c);
        self.line(x1, y1, x0, y1, c);
        self.line(x0, y1, x0, y0, c);
    }

    pub fn dot(&mut self, x: i64, y: i64, r: i64, c: Rgb) {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    self.set(x + dx, y + dy, c);
                }
            }
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().map_err(|e| Error::Image(e.to_string()))?;
            w.write_image_data(&self.pixels)
                .map_err(|e| Error::Image(e.to_string()))?;
        }
        Ok(out)
    }
}

/// Linear map of `[lo, hi]` onto pixel range `[p0, p1]`.
fn scale(v: f64, lo: f64, hi: f64, p0: f64, p1: f64) -> i64 {
    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
    (p0 + t * (p1 - p0)).round() as i64
}

/// Black-red-yellow-white ramp for `t` in [0, 1].
fn heat(t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let r = (3.0 * t).min(1.0);
    let g = (3.0 * t - 1.0).clamp(0.0, 1.0);
    let b = (3.0 * t - 2.0).clamp(0.0, 1.0);
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

/// Heat map of a spectrogram: time left to right, frequency (up to
/// `f_max`) bottom to top, `range_db` of dynamic range below the maximum.
pub fn spectrogram_png(spec: &Spectrogram, f_max: f64, range_db: f64) -> Result<Vec<u8>> {
    let bins = spec.freqs.iter().take_while(|&&f| f <= f_max).count().max(1);
    let frames = spec.db.len();
    if frames == 0 {
        return Err(Error::Empty("spectrogram".into()));
    }
    let top = spec
        .db
        .iter()
        .flat_map(|col| col[..bins].iter())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut c = Canvas::new(frames, bins);
    for (x, col) in spec.db.iter().enumerate() {
        for (k, &v) in col[..bins].iter().enumerate() {
            let t = 1.0 - (top - v) / range_db;
            c.set(x as i64, (bins - 1 - k) as i64, heat(t));
        }
    }
    c.to_png()
}

/// Box plots side by side: box from q25 to q75, median line, whiskers,
/// outlier dots and a diamond-ish mean marker. Ratings axis 0 to 10.
pub fn box_plot_png(groups: &[BoxStats]) -> Result<Vec<u8>> {
    let (w, h, pad) = (60 * groups.len().max(1) + 40, 400usize, 20.0);
    let mut c = Canvas::new(w, h);
    let y = |v: f64| scale(v, 0.0, 10.0, h as f64 - pad, pad);
    for tick in 0..=10 {
        c.line(10, y(tick as f64), 16, y(tick as f64), GREY);
    }
    for (i, b) in groups.iter().enumerate() {
        let xc = 40 + 60 * i as i64;
        c.rect(xc - 15, y(b.q75), xc + 15, y(b.q25), BLUE);
        c.line(xc - 15, y(b.median), xc + 15, y(b.median), BLUE);
        c.line(xc, y(b.q75), xc, y(b.whisker_high), BLACK);
        c.line(xc, y(b.q25), xc, y(b.whisker_low), BLACK);
        c.line(xc - 8, y(b.whisker_high), xc + 8, y(b.whisker_high), BLACK);
        c.line(xc - 8, y(b.whisker_low), xc + 8, y(b.whisker_low), BLACK);
        for &o in &b.outliers {
            c.dot(xc, y(o), 2, GREY);
        }
        let ym = y(b.mean);
        for d in 0..=4 {
            c.line(xc - 4 + d, ym, xc, ym - 4 + d, RED);
            c.line(xc + 4 - d, ym, xc, ym + 4 - d, RED);
        }
    }
    c.to_png()
}

/// Mean rating against a metric with standard-deviation error bars and
/// the least-squares line.
pub fn scatter_png(s: &Scatter) -> Result<Vec<u8>> {
    let (w, h, pad) = (480usize, 360usize, 30.0);
    if s.points.is_empty() {
        return Err(Error::Empty("scatter".into()));
    }
    let xs = s.points.iter().map(|p| p.x);
    let (x_lo, x_hi) = xs.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let margin = 0.05 * (x_hi - x_lo).max(1e-9);
    let (x_lo, x_hi) = (x_lo - margin, x_hi + margin);
    let mut c = Canvas::new(w, h);
    let px = |v: f64| scale(v, x_lo, x_hi, pad, w as f64 - pad);
    let py = |v: f64| scale(v, 0.0, 10.0, h as f64 - pad, pad);
    c.rect(px(x_lo), py(0.0), px(x_hi), py(10.0), GREY);
    c.line(
        px(x_lo),
        py(s.fit.predict(x_lo)),
        px(x_hi),
        py(s.fit.predict(x_hi)),
        RED,
    );
    for p in &s.points {
        let x = px(p.x);
        c.line(x, py(p.mean - p.sd), x, py(p.mean + p.sd), BLACK);
        c.dot(x, py(p.mean), 3, BLUE);
    }
    c.to_png()
}
