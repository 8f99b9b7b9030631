// Correlation of per-stimulus metrics with mean annoyance ratings, with
// the default exclusions, plus the least-squares line against PA.

use std::collections::BTreeSet;

use evsound::study::{
    correlation_table, describe, mean_ratings, scatter, KeypressTimeline, Metric, MetricSet,
    RatingRecord, DEFAULT_EXCLUDE,
};

/// Small made-up panel: annoyance grows with PA plus a per-person offset.
fn panel(metrics: &[MetricSet]) -> Vec<RatingRecord> {
    let mut out = Vec::new();
    for p in 0..6u8 {
        for m in metrics {
            let a = (0.3 * m.pa - 2.0 + (p % 3) as f64 - 1.0).round().clamp(0.0, 10.0);
            out.push(RatingRecord {
                participant_id: format!("p{p}"),
                stimulus_id: m.stimulus_id,
                annoyance: a as u8,
                noticeability: 5,
                informativeness: 5,
                keypress_timeline: KeypressTimeline::default(),
            });
        }
    }
    out
}

pub fn run_example() -> evsound::Result<()> {
    let metrics: Vec<MetricSet> = (1..=15u8)
        .map(|id| {
            let x = id as f64;
            MetricSet {
                stimulus_id: id,
                lp_max: 75.0 + (x * 1.7) % 9.0,
                lpa_max: 75.0 + (x * 0.9) % 3.0,
                lpa_eq: 65.0,
                pnlt_max: 85.0 + (x * 2.3) % 9.0,
                epnl: 75.0 + (x * 2.3) % 8.0,
                n5: 13.0 + (x * 1.3) % 7.0,
                s5: 0.6 + 0.04 * x,
                k5: 0.4 - 0.02 * x,
                r5: 0.02 * (x % 5.0),
                fs5: 0.15 + 0.1 * (x % 2.0),
                pa: 18.0 + (x * 3.1) % 20.0,
            }
        })
        .collect();
    let records = panel(&metrics);
    let summaries = mean_ratings(&records);
    let means = summaries.iter().map(|(k, v)| (*k, v.mean)).collect();
    let exclude: BTreeSet<u8> = DEFAULT_EXCLUDE.into();

    println!("{:<10} {:>8} {:>8} {:>4}", "metric", "rho", "p", "sig");
    for r in correlation_table(&metrics, &means, &exclude)? {
        println!("{:<10} {:8.4} {:8.4} {:>4}", r.metric, r.rho, r.p_value, if r.significant { "*" } else { "" });
    }
    let fit = scatter(&metrics, &summaries, &exclude, Metric::PA)?.fit;
    println!("rating = {:.3} * PA + {:.3}", fit.slope, fit.intercept);
    let b = describe(&records, 1)?;
    println!("stimulus 1: mean {:.2}, median {:.1}, IQR {:.1}-{:.1}", b.mean, b.median, b.q25, b.q75);
    Ok(())
}

fn main() -> evsound::Result<()> {
    run_example()
}
