//! Box-plot statistics, Pearson correlation and least squares.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::records::RatingRecord;
use crate::dsp::sorted_quantile;
use crate::error::{Error, Result};

/// Significance level used for the `significant` flag.
pub const ALPHA: f64 = 0.05;

/// Box-plot summary with 1.5·IQR whiskers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Most extreme observations within 1.5·IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Box-plot statistics of arbitrary values (linear-interpolated quartiles).
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Empty("box-plot group".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q25 = sorted_quantile(&v, 0.25);
    let q75 = sorted_quantile(&v, 0.75);
    let iqr = q75 - q25;
    let (lo, hi) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
    Ok(BoxStats {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: sorted_quantile(&v, 0.5),
        q25,
        q75,
        whisker_low: inside.first().copied().unwrap_or(q25),
        whisker_high: inside.last().copied().unwrap_or(q75),
        outliers: v.into_iter().filter(|x| !(lo..=hi).contains(x)).collect(),
    })
}

/// Annoyance box-plot statistics of one stimulus.
pub fn describe(records: &[RatingRecord], stimulus_id: u8) -> Result<BoxStats> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.stimulus_id == stimulus_id)
        .map(|r| r.annoyance as f64)
        .collect();
    if values.is_empty() {
        return Err(Error::Empty(format!("no ratings for stimulus {stimulus_id}")));
    }
    box_stats(&values)
}

/// Annoyance box-plot statistics pooled over several stimuli.
pub fn describe_group(records: &[RatingRecord], stimulus_ids: &[u8]) -> Result<BoxStats> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| stimulus_ids.contains(&r.stimulus_id))
        .map(|r| r.annoyance as f64)
        .collect();
    if values.is_empty() {
        return Err(Error::Empty(format!("no ratings for stimuli {stimulus_ids:?}")));
    }
    box_stats(&values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub metric: String,
    pub rho: f64,
    pub t: f64,
    pub p_value: f64,
    pub n: usize,
    pub significant: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Two-sided p-value of a sample correlation `rho` over `n` pairs.
pub fn correlation_p_value(rho: f64, n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: n });
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return Ok((rho.signum() * f64::INFINITY, 0.0));
    }
    let t = rho * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(e.to_string()))?;
    let p = 2.0 * dist.sf(t.abs());
    Ok((t, p.clamp(0.0, 1.0)))
}

/// Sample Pearson correlation with a two-sided t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let (t, p_value) = correlation_p_value(rho, n)?;
    Ok(CorrelationResult {
        metric: String::new(),
        rho,
        t,
        p_value,
        n,
        significant: p_value <= ALPHA,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least-squares line `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            have: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::ConstantInput);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_lines() {
        let x = [1.0, 2.0, 3.0];
        let up = pearson(&x, &[2.0, 4.0, 6.0]).unwrap();
        assert!((up.rho - 1.0).abs() < 1e-12);
        assert_eq!(up.p_value, 0.0);
        assert!((pearson(&x, &[-2.0, -4.0, -6.0]).unwrap().rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]),
            Err(Error::ConstantInput)
        ));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch(2, 1))));
        assert!(matches!(linear_fit(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::ConstantInput)));
    }

    #[test]
    fn exact_fit() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_stats_identical_values() {
        let b = box_stats(&[4.0; 6]).unwrap();
        assert_eq!((b.q25, b.q75, b.whisker_low, b.whisker_high), (4.0, 4.0, 4.0, 4.0));
        assert!(b.outliers.is_empty());
        assert!(box_stats(&[]).is_err());
    }

    #[test]
    fn box_stats_flags_outlier() {
        let b = box_stats(&[1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!(b.outliers, vec![10.0]);
        assert_eq!(b.whisker_high, 4.0);
        assert_eq!(b.median, 3.0);
    }
}
