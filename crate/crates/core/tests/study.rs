use std::collections::{BTreeMap, BTreeSet};

use evsound::propagation::Trajectory;
use evsound::session::SessionManifest;
use evsound::study::{
    correlation_table, describe, linear_fit, load_ratings, mean_ratings, pearson, KeyAction,
    KeyEvent, KeypressTimeline, MetricSet, RatingRecord, SessionResult, TrialRatings, TrialResult,
    write_ratings_csv,
};
use evsound::Error;

/// Two-sided p-value of Student's t with `df` degrees of freedom, by
/// Simpson integration after the substitution t = sqrt(df)·tan(θ), which
/// turns the density into cos^(df-1)(θ) on [0, π/2).
fn p_value_oracle(t: f64, df: f64) -> f64 {
    let f = |th: f64| th.cos().powf(df - 1.0);
    let simpson = |a: f64, b: f64| {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let half = std::f64::consts::FRAC_PI_2;
    let theta0 = (t.abs() / df.sqrt()).atan();
    simpson(theta0, half) / simpson(0.0, half)
}

fn record(p: &str, id: u8, annoyance: u8) -> RatingRecord {
    RatingRecord {
        participant_id: p.into(),
        stimulus_id: id,
        annoyance,
        noticeability: 5,
        informativeness: 5,
        keypress_timeline: KeypressTimeline::default(),
    }
}

fn metric_sets(pa: impl Fn(u8) -> f64) -> Vec<MetricSet> {
    (1..=15u8)
        .map(|id| {
            let x = id as f64;
            MetricSet {
                stimulus_id: id,
                lp_max: 70.0 + (x * 7.0) % 5.0,
                lpa_max: 72.0 + (x * 3.0) % 4.0,
                lpa_eq: 65.0,
                pnlt_max: 80.0 + (x * 5.0) % 7.0,
                epnl: 70.0 + (x * 11.0) % 6.0,
                n5: 10.0 + x,
                s5: 1.0 + (x * 13.0) % 3.0 / 10.0,
                k5: (x * 17.0) % 5.0 / 10.0,
                r5: (x * 19.0) % 7.0 / 100.0,
                fs5: (x * 23.0) % 3.0 / 10.0,
                pa: pa(id),
            }
        })
        .collect()
}

#[test]
fn p_values_match_integrated_t_density() {
    for (rho, n) in [(0.3, 10usize), (0.5, 13), (-0.7, 8), (0.8866, 13), (0.1, 40)] {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        // y with an exact sample correlation rho against x
        let mx = (n - 1) as f64 / 2.0;
        let z: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
        let r_xz = pearson(&x, &z).unwrap().rho;
        let sx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>().sqrt();
        let mz = z.iter().sum::<f64>() / n as f64;
        let resid: Vec<f64> = z
            .iter()
            .zip(&x)
            .map(|(zv, xv)| (zv - mz) - r_xz * (xv - mx) * {
                let sz = z.iter().map(|v| (v - mz).powi(2)).sum::<f64>().sqrt();
                sz / sx
            })
            .collect();
        let sr = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y: Vec<f64> = x
            .iter()
            .zip(&resid)
            .map(|(xv, rv)| rho * (xv - mx) / sx + (1.0 - rho * rho).sqrt() * rv / sr)
            .collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r.rho - rho).abs() < 1e-9, "{} vs {rho}", r.rho);
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        assert!((r.t - t).abs() < 1e-6);
        let p = p_value_oracle(t, df);
        assert!((r.p_value - p).abs() < 1e-7 + 1e-5 * p, "n={n} rho={rho}: {} vs {p}", r.p_value);
    }
}

#[test]
fn published_coefficient_gives_reported_p_value() {
    let (t, p) = evsound::study::correlation_p_value(0.8866, 13).unwrap();
    assert!((t - 6.36).abs() < 0.01, "{t}");
    assert_eq!(format!("{p:.4}"), "0.0001");
}

#[test]
fn ratings_equal_to_pa_correlate_perfectly() {
    let metrics = metric_sets(|id| 15.0 + ((id as f64) * 3.7) % 11.0);
    let means: BTreeMap<u8, f64> = metrics.iter().map(|m| (m.stimulus_id, m.pa)).collect();
    let table = correlation_table(&metrics, &means, &[14, 15].into()).unwrap();
    let pa = table.iter().find(|r| r.metric == "PA").unwrap();
    assert!((pa.rho - 1.0).abs() < 1e-12);
    assert_eq!(pa.n, 13);
}

#[test]
fn four_exclusions_leave_eleven_with_matching_arithmetic() {
    let metrics = metric_sets(|id| 15.0 + ((id as f64) * 3.7) % 11.0);
    let means: BTreeMap<u8, f64> = metrics
        .iter()
        .map(|m| (m.stimulus_id, 0.4 * m.pa - 2.0 + ((m.stimulus_id * 5) % 3) as f64))
        .collect();
    let exclude: BTreeSet<u8> = [3, 7, 14, 15].into();
    let table = correlation_table(&metrics, &means, &exclude).unwrap();
    for r in &table {
        assert_eq!(r.n, 11);
        let t = r.rho * (9.0 / (1.0 - r.rho * r.rho)).sqrt();
        assert!((r.t - t).abs() < 1e-9);
        assert!((r.p_value - p_value_oracle(t, 9.0)).abs() < 1e-7 + 1e-5 * r.p_value);
        assert_eq!(r.significant, r.p_value <= 0.05);
    }
}

#[test]
fn ols_residuals_sum_to_zero() {
    let x: Vec<f64> = (0..13).map(|i| 10.0 + 2.3 * i as f64).collect();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 0.39 * v + (i as f64 * 1.7).sin()).collect();
    let fit = linear_fit(&x, &y).unwrap();
    assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9);
    let weighted: f64 = fit.residuals.iter().zip(&x).map(|(r, v)| r * v).sum();
    assert!(weighted.abs() < 1e-8);
}

#[test]
fn full_panel_csv_loads_210_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.csv");
    let records: Vec<RatingRecord> = (0..14)
        .flat_map(|p| (1..=15u8).map(move |id| record(&format!("P{p:02}"), id, (p + id) % 11)))
        .collect();
    let mut buf = Vec::new();
    write_ratings_csv(&records, &mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    let loaded = load_ratings(&path).unwrap();
    assert_eq!(loaded.len(), 210);
    assert_eq!(loaded, records);
    let means = mean_ratings(&loaded);
    assert_eq!(means.len(), 15);
    assert!(means.values().all(|m| m.n == 14));
}

fn runner_result(manifest: &SessionManifest) -> SessionResult {
    SessionResult {
        schema_version: manifest.schema_version,
        session_id: manifest.session_id.clone(),
        participant: serde_json::from_str(r#"{"id": "P01", "age": 31}"#).unwrap(),
        trials: manifest
            .trials
            .iter()
            .enumerate()
            .map(|(i, t)| TrialResult {
                stimulus_id: t.stimulus_id as i64,
                training: t.training,
                events: if i % 2 == 0 {
                    vec![
                        KeyEvent { event: KeyAction::Press, time: 0.2 },
                        KeyEvent { event: KeyAction::Release, time: 5.5 },
                    ]
                } else {
                    Vec::new()
                },
                ratings: TrialRatings {
                    noticeability: 7,
                    informativeness: 6,
                    annoyance: (i % 11) as i64,
                },
            })
            .collect(),
        partial: false,
    }
}

#[test]
fn runner_export_round_trips_through_the_validator() {
    let manifest = SessionManifest::new("s-42", 42, 48_000, 20.0, Trajectory::default());
    let result = runner_result(&manifest);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    std::fs::write(&path, serde_json::to_vec(&result).unwrap()).unwrap();
    let records = load_ratings(&path).unwrap();
    assert_eq!(records.len(), 15);
    let order: Vec<u8> = records.iter().map(|r| r.stimulus_id).collect();
    let expected: Vec<u8> = manifest.experimental().map(|t| t.stimulus_id).collect();
    assert_eq!(order, expected);
    assert!(records.iter().all(|r| r.participant_id == "P01"));
    assert_eq!(records[1].keypress_timeline.to_string(), "press@0.2;release@5.5");
}

#[test]
fn tampered_runner_rating_is_reported() {
    let manifest = SessionManifest::new("s-1", 1, 48_000, 20.0, Trajectory::default());
    let mut result = runner_result(&manifest);
    result.trials[3].ratings.annoyance = 12;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    std::fs::write(&path, serde_json::to_vec(&result).unwrap()).unwrap();
    match load_ratings(&path) {
        Err(Error::Validation(v)) => {
            assert_eq!(v.len(), 1);
            assert_eq!(v[0].field, "annoyance");
            assert_eq!(v[0].line, 4);
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
    result.schema_version = 2;
    std::fs::write(&path, serde_json::to_vec(&result).unwrap()).unwrap();
    assert!(matches!(load_ratings(&path), Err(Error::Mismatch(_))));
}

#[test]
fn two_sessions_of_one_participant_collide() {
    let manifest = SessionManifest::new("s-1", 1, 48_000, 20.0, Trajectory::default());
    let result = runner_result(&manifest);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.json");
    std::fs::write(&path, serde_json::to_vec(&vec![result.clone(), result]).unwrap()).unwrap();
    match load_ratings(&path) {
        Err(Error::Validation(v)) => {
            assert_eq!(v.len(), 15);
            assert!(v.iter().all(|i| i.message.contains("duplicate")));
        }
        other => panic!("expected duplicates, got {other:?}"),
    }
}

#[test]
fn describe_uses_only_the_requested_stimulus() {
    let records = vec![record("a", 1, 2), record("b", 1, 4), record("c", 1, 9), record("a", 2, 10)];
    let b = describe(&records, 1).unwrap();
    assert_eq!(b.n, 3);
    assert_eq!(b.mean, 5.0);
    assert_eq!(b.median, 4.0);
    assert_eq!((b.q25, b.q75), (3.0, 6.5));
    assert!(b.outliers.is_empty());
    assert!(describe(&records, 9).is_err());
}
