//! Per-stimulus metric sets and their correlation with mean ratings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::records::RatingRecord;
use super::stats::{linear_fit, pearson, CorrelationResult, LinearFit};
use crate::error::{Error, Result};

/// Stimuli left out of the correlation analysis by default (engine and
/// tyre-only references).
pub const DEFAULT_EXCLUDE: [u8; 2] = [14, 15];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "L_p_max")]
    LpMax,
    #[serde(rename = "L_p_A_max")]
    LpAMax,
    #[serde(rename = "L_p_A_eq")]
    LpAEq,
    #[serde(rename = "PNLT_max")]
    PnltMax,
    #[serde(rename = "EPNL")]
    Epnl,
    N5,
    S5,
    K5,
    R5,
    FS5,
    PA,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::LpMax,
        Metric::LpAMax,
        Metric::LpAEq,
        Metric::PnltMax,
        Metric::Epnl,
        Metric::N5,
        Metric::S5,
        Metric::K5,
        Metric::R5,
        Metric::FS5,
        Metric::PA,
    ];

    /// Rows of the correlation table. The A-weighted equivalent level is
    /// left out: normalization makes it constant across stimuli.
    pub const TABLE: [Metric; 10] = [
        Metric::LpMax,
        Metric::LpAMax,
        Metric::PnltMax,
        Metric::Epnl,
        Metric::N5,
        Metric::S5,
        Metric::K5,
        Metric::R5,
        Metric::FS5,
        Metric::PA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::LpMax => "L_p_max",
            Metric::LpAMax => "L_p_A_max",
            Metric::LpAEq => "L_p_A_eq",
            Metric::PnltMax => "PNLT_max",
            Metric::Epnl => "EPNL",
            Metric::N5 => "N5",
            Metric::S5 => "S5",
            Metric::K5 => "K5",
            Metric::R5 => "R5",
            Metric::FS5 => "FS5",
            Metric::PA => "PA",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::LpMax | Metric::LpAMax | Metric::LpAEq | Metric::PnltMax | Metric::Epnl => "dB",
            Metric::N5 => "sone",
            Metric::S5 => "acum",
            Metric::K5 => "t.u.",
            Metric::R5 => "asper",
            Metric::FS5 => "vacil",
            Metric::PA => "-",
        }
    }

    pub fn parse(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All metric values of one stimulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub stimulus_id: u8,
    #[serde(rename = "L_p_max")]
    pub lp_max: f64,
    #[serde(rename = "L_p_A_max")]
    pub lpa_max: f64,
    #[serde(rename = "L_p_A_eq")]
    pub lpa_eq: f64,
    #[serde(rename = "PNLT_max")]
    pub pnlt_max: f64,
    #[serde(rename = "EPNL")]
    pub epnl: f64,
    #[serde(rename = "N5")]
    pub n5: f64,
    #[serde(rename = "S5")]
    pub s5: f64,
    #[serde(rename = "K5")]
    pub k5: f64,
    #[serde(rename = "R5")]
    pub r5: f64,
    #[serde(rename = "FS5")]
    pub fs5: f64,
    #[serde(rename = "PA")]
    pub pa: f64,
}

impl MetricSet {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::LpMax => self.lp_max,
            Metric::LpAMax => self.lpa_max,
            Metric::LpAEq => self.lpa_eq,
            Metric::PnltMax => self.pnlt_max,
            Metric::Epnl => self.epnl,
            Metric::N5 => self.n5,
            Metric::S5 => self.s5,
            Metric::K5 => self.k5,
            Metric::R5 => self.r5,
            Metric::FS5 => self.fs5,
            Metric::PA => self.pa,
        }
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        let slot = match metric {
            Metric::LpMax => &mut self.lp_max,
            Metric::LpAMax => &mut self.lpa_max,
            Metric::LpAEq => &mut self.lpa_eq,
            Metric::PnltMax => &mut self.pnlt_max,
            Metric::Epnl => &mut self.epnl,
            Metric::N5 => &mut self.n5,
            Metric::S5 => &mut self.s5,
            Metric::K5 => &mut self.k5,
            Metric::R5 => &mut self.r5,
            Metric::FS5 => &mut self.fs5,
            Metric::PA => &mut self.pa,
        };
        *slot = value;
    }
}

pub fn write_metrics_csv<W: Write>(sets: &[MetricSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in sets {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<MetricSet>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Per-stimulus rating summary (unweighted over participants).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub stimulus_id: u8,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single rating.
    pub sd: f64,
}

/// Mean and standard deviation of annoyance per stimulus.
pub fn mean_ratings(records: &[RatingRecord]) -> BTreeMap<u8, RatingSummary> {
    let mut groups: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.stimulus_id).or_default().push(r.annoyance as f64);
    }
    groups
        .into_iter()
        .map(|(id, v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            (
                id,
                RatingSummary {
                    stimulus_id: id,
                    n,
                    mean,
                    sd,
                },
            )
        })
        .collect()
}

/// Stimulus ids entering the analysis, sorted; errors when a metric set has
/// no rating or fewer than three remain.
fn analysed_ids(
    metrics: &[MetricSet],
    means: &BTreeMap<u8, f64>,
    exclude: &BTreeSet<u8>,
) -> Result<Vec<u8>> {
    let mut ids = BTreeSet::new();
    for m in metrics {
        if exclude.contains(&m.stimulus_id) {
            continue;
        }
        if !ids.insert(m.stimulus_id) {
            return Err(Error::Mismatch(format!(
                "stimulus {} has two metric sets",
                m.stimulus_id
            )));
        }
        if !means.contains_key(&m.stimulus_id) {
            return Err(Error::Mismatch(format!(
                "stimulus {} has metrics but no ratings",
                m.stimulus_id
            )));
        }
    }
    let missing: Vec<u8> = means
        .keys()
        .filter(|id| !exclude.contains(id) && !ids.contains(id))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(Error::Mismatch(format!(
            "stimuli {missing:?} have ratings but no metrics"
        )));
    }
    if ids.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            have: ids.len(),
        });
    }
    Ok(ids.into_iter().collect())
}

fn column(metrics: &[MetricSet], ids: &[u8], metric: Metric) -> Vec<f64> {
    ids.iter()
        .map(|id| {
            metrics
                .iter()
                .find(|m| m.stimulus_id == *id)
                .map(|m| m.get(metric))
                .unwrap_or(f64::NAN)
        })
        .collect()
}

/// Pearson correlation of every table metric with the mean ratings over the
/// stimuli not in `exclude`. Metrics that are constant over those stimuli
/// have no defined correlation and are left out.
pub fn correlation_table(
    metrics: &[MetricSet],
    means: &BTreeMap<u8, f64>,
    exclude: &BTreeSet<u8>,
) -> Result<Vec<CorrelationResult>> {
    let ids = analysed_ids(metrics, means, exclude)?;
    let y: Vec<f64> = ids.iter().map(|id| means[id]).collect();
    let mut out = Vec::new();
    for metric in Metric::TABLE {
        let x = column(metrics, &ids, metric);
        match pearson(&x, &y) {
            Ok(mut r) => {
                r.metric = metric.name().to_string();
                out.push(r);
            }
            Err(Error::ConstantInput) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn write_table_csv<W: Write>(table: &[CorrelationResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "rho", "p_value", "t", "n", "significant"])?;
    for r in table {
        w.write_record([
            r.metric.clone(),
            format!("{:.4}", r.rho),
            format!("{:.4}", r.p_value),
            format!("{:.4}", r.t),
            r.n.to_string(),
            r.significant.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a metric-versus-rating scatter plot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub stimulus_id: u8,
    pub x: f64,
    pub mean: f64,
    pub sd: f64,
    /// Value of the least-squares line at `x`.
    pub fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub metric: Metric,
    pub points: Vec<ScatterPoint>,
    pub fit: LinearFit,
}

/// Mean rating (with standard deviation) against one metric, plus the
/// least-squares line through the points.
pub fn scatter(
    metrics: &[MetricSet],
    ratings: &BTreeMap<u8, RatingSummary>,
    exclude: &BTreeSet<u8>,
    metric: Metric,
) -> Result<Scatter> {
    let means: BTreeMap<u8, f64> = ratings.iter().map(|(k, v)| (*k, v.mean)).collect();
    let ids = analysed_ids(metrics, &means, exclude)?;
    let x = column(metrics, &ids, metric);
    let y: Vec<f64> = ids.iter().map(|id| means[id]).collect();
    let fit = linear_fit(&x, &y)?;
    let points = ids
        .iter()
        .zip(&x)
        .map(|(id, &xv)| ScatterPoint {
            stimulus_id: *id,
            x: xv,
            mean: ratings[id].mean,
            sd: ratings[id].sd,
            fit: fit.predict(xv),
        })
        .collect();
    Ok(Scatter { metric, points, fit })
}

impl Scatter {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stimulus_id", self.metric.name(), "mean_rating", "sd_rating", "fit"])?;
        for p in &self.points {
            w.write_record([
                p.stimulus_id.to_string(),
                format!("{:.6}", p.x),
                format!("{:.6}", p.mean),
                format!("{:.6}", p.sd),
                format!("{:.6}", p.fit),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
