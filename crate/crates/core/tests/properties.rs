use std::collections::{BTreeMap, BTreeSet};

use evsound::propagation::Trajectory;
use evsound::signal::{laeq, normalize_to_level, synth_pure_tone};
use evsound::study::{
    box_stats, correlation_p_value, correlation_table, linear_fit, pearson, KeyAction, KeyEvent,
    KeypressTimeline, MetricSet,
};
use proptest::prelude::*;

fn varied(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, n).prop_filter("not constant", |v| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() > 1e-3
    })
}

fn pair(n: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (varied(n), varied(n)))
}

proptest! {
    #[test]
    fn pearson_is_symmetric((x, y) in pair(3..30)) {
        let a = pearson(&x, &y).unwrap();
        let b = pearson(&y, &x).unwrap();
        prop_assert!((a.rho - b.rho).abs() < 1e-12);
        prop_assert!(a.rho.abs() <= 1.0);
    }

    #[test]
    fn pearson_ignores_positive_affine_maps(
        (x, y) in pair(3..30), a in 0.1..10.0f64, b in -50.0..50.0f64,
    ) {
        let r = pearson(&x, &y).unwrap().rho;
        let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&xs, &y).unwrap().rho - r).abs() < 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((pearson(&neg, &y).unwrap().rho + r).abs() < 1e-9);
    }

    #[test]
    fn p_value_falls_as_correlation_grows(a in 0.0..0.99f64, b in 0.0..0.99f64, n in 4usize..60) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (_, p_lo) = correlation_p_value(lo, n).unwrap();
        let (_, p_hi) = correlation_p_value(hi, n).unwrap();
        let (_, p_neg) = correlation_p_value(-hi, n).unwrap();
        prop_assert!(p_hi <= p_lo + 1e-15);
        prop_assert!((0.0..=1.0).contains(&p_lo));
        prop_assert!((p_neg - p_hi).abs() < 1e-12);
    }

    #[test]
    fn least_squares_residuals_cancel((x, y) in pair(2..30)) {
        let fit = linear_fit(&x, &y).unwrap();
        let scale = y.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        prop_assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9 * scale);
        for ((xi, yi), r) in x.iter().zip(&y).zip(&fit.residuals) {
            prop_assert!((fit.predict(*xi) + r - yi).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn box_stats_ignore_order(
        mut v in prop::collection::vec(0u8..=10, 1..40), seed in any::<u64>(),
    ) {
        let values: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        let a = box_stats(&values).unwrap();
        // deterministic reshuffle
        let mut s = seed | 1;
        for i in (1..v.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            v.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let shuffled: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        let b = box_stats(&shuffled).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.q25 <= a.median && a.median <= a.q75);
        prop_assert!(a.whisker_low <= a.whisker_high);
        prop_assert!(values.contains(&a.whisker_low) && values.contains(&a.whisker_high));
    }

    #[test]
    fn correlation_table_ignores_input_order(
        pa in prop::collection::vec(5.0..40.0f64, 15),
        ratings in prop::collection::vec(0.0..10.0f64, 15),
        rot in 0usize..15,
    ) {
        let sets: Vec<MetricSet> = (1..=15u8)
            .map(|id| {
                let i = id as usize - 1;
                let x = id as f64;
                MetricSet {
                    stimulus_id: id,
                    lp_max: 60.0 + x, lpa_max: 60.0 + (x * 3.0) % 7.0, lpa_eq: 65.0,
                    pnlt_max: 70.0 + (x * 5.0) % 9.0, epnl: 70.0 + (x * 7.0) % 4.0,
                    n5: 10.0 + x, s5: 1.0 + (x * 2.0) % 5.0, k5: (x * 3.0) % 4.0,
                    r5: (x * 11.0) % 6.0, fs5: (x * 13.0) % 5.0, pa: pa[i],
                }
            })
            .collect();
        let means: BTreeMap<u8, f64> = (1..=15u8).map(|id| (id, ratings[id as usize - 1])).collect();
        let exclude: BTreeSet<u8> = [14, 15].into();
        let mut rotated = sets.clone();
        rotated.rotate_left(rot);
        let a = correlation_table(&sets, &means, &exclude);
        let b = correlation_table(&rotated, &means, &exclude);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn timeline_text_round_trips(gaps in prop::collection::vec(0.0..5.0f64, 0..12)) {
        let mut t = 0.0;
        let events: Vec<KeyEvent> = gaps
            .iter()
            .enumerate()
            .map(|(i, g)| {
                t += g;
                KeyEvent {
                    event: if i % 2 == 0 { KeyAction::Press } else { KeyAction::Release },
                    time: t,
                }
            })
            .collect();
        let tl = KeypressTimeline(events);
        prop_assert!(tl.check().is_ok());
        let back: KeypressTimeline = tl.to_string().parse().unwrap();
        prop_assert_eq!(back, tl);
    }

    #[test]
    fn emission_time_satisfies_travel_equation(
        v in 1.0..40.0f64, y in 0.5..20.0f64, frac in 0.0..1.0f64,
    ) {
        let traj = Trajectory::passby(-60.0, 60.0, y, v).unwrap();
        let t = frac * traj.duration();
        let tau = traj.emission_time(t);
        prop_assert!(tau <= t);
        prop_assert!((traj.c * (t - tau) - traj.distance(tau)).abs() < 1e-6);
    }

    #[test]
    fn normalization_hits_any_target(amp in 0.001..1.0f64, f in 100.0..8000.0f64, target in 30.0..90.0f64) {
        let s = synth_pure_tone(f, 0.2, 48_000, amp).unwrap();
        let n = normalize_to_level(&s, target).unwrap();
        prop_assert!((laeq(&n).unwrap() - target).abs() < 1e-9);
    }
}
