//! Invariants across the public API.

use fama_lnn::channel::FadingParams;
use fama_lnn::curves::{read_curve_csv, write_curve_csv, CurveRow};
use fama_lnn::fama::OutageEstimate;
use fama_lnn::selection::{select_with_scores, Policy, PolicyKind, PortSets};
use proptest::prelude::*;

fn port_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>)> {
    (2usize..24).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..100.0, n),
            prop::collection::vec(0.0f64..1.0, n),
            prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n),
        )
    })
}

fn top_sum(sinr: &[f64], chosen: &[usize]) -> f64 {
    chosen.iter().map(|&i| sinr[i]).sum()
}

proptest! {
    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let outages = ((trials as f64) * frac).round() as u64;
        let e = OutageEstimate::from_counts(outages, trials);
        prop_assert!(0.0 <= e.ci_low && e.ci_low <= e.probability);
        prop_assert!(e.probability <= e.ci_high && e.ci_high <= 1.0);
        prop_assert!(!e.significantly_above(&e));
    }

    #[test]
    fn more_trials_tighten_the_interval(outages in 0u64..50, trials in 100u64..10_000) {
        let a = OutageEstimate::from_counts(outages, trials);
        let b = OutageEstimate::from_counts(outages * 10, trials * 10);
        prop_assert!(b.ci_high - b.ci_low < a.ci_high - a.ci_low);
    }

    #[test]
    fn wider_permitted_sets_never_lose((sinr, scores, observed) in port_case(), j in 1usize..6, k in 1usize..4) {
        let n = sinr.len();
        let ports = PortSets::new(n, observed.clone()).unwrap();
        let k = k.min(observed.len());
        let j = j.min(n);
        let pick = |kind, j| select_with_scores(&Policy::new(kind, j, k), &sinr, &ports, Some(&scores), k).unwrap();
        let ideal = pick(PolicyKind::Ideal, 0);
        let reference = pick(PolicyKind::Reference, 0);
        let model = pick(PolicyKind::ModelAssisted, j);
        prop_assert!(top_sum(&sinr, &ideal) >= top_sum(&sinr, &model));
        prop_assert!(top_sum(&sinr, &model) >= top_sum(&sinr, &reference));
        if j < n {
            let bigger = pick(PolicyKind::ModelAssisted, j + 1);
            prop_assert!(top_sum(&sinr, &bigger) >= top_sum(&sinr, &model));
        }
    }

    #[test]
    fn selections_are_distinct_and_best_first((sinr, scores, observed) in port_case(), k in 1usize..8) {
        let ports = PortSets::new(sinr.len(), observed).unwrap();
        let k = k.min(sinr.len());
        let chosen = select_with_scores(&Policy::new(PolicyKind::Ideal, 0, k), &sinr, &ports, Some(&scores), k).unwrap();
        prop_assert_eq!(chosen.len(), k);
        prop_assert!(chosen.windows(2).all(|w| sinr[w[0]] >= sinr[w[1]] && w[0] != w[1]));
        let floor = sinr[*chosen.last().unwrap()];
        let above = sinr.iter().filter(|&&s| s > floor).count();
        prop_assert!(above < k);
    }

    #[test]
    fn normalized_fading_has_unit_power(alpha in 0.5f64..6.0, mu in 1u32..8) {
        let p = FadingParams::normalized(alpha, mu).unwrap();
        prop_assert!((p.moment(2.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn curve_rows_survive_csv(
        m in 1usize..200,
        op in 0.0f64..=1.0,
        gamma in prop_oneof![Just(f64::NEG_INFINITY), Just(f64::INFINITY), -20.0f64..20.0],
        seed in any::<u64>(),
    ) {
        let est = OutageEstimate::from_counts((op * 1000.0).round() as u64, 1000);
        let row = CurveRow {
            m_observed: m,
            policy: PolicyKind::ModelAssisted,
            j_budget: 2,
            k_combine: 1,
            alpha: 2.0,
            mu: 2,
            gamma_th_db: gamma,
            op: est.probability,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            trials: est.trials,
            seed,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curve_csv(&path, std::slice::from_ref(&row)).unwrap();
        prop_assert_eq!(read_curve_csv(&path).unwrap(), vec![row]);
    }
}
