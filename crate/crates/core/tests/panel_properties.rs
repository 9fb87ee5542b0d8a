//! Balanced-panel invariants: the between/within variance split and
//! lossless CSV round-tripping.

mod support;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{panel_km, record_km};
use triperf::metrics::panel_summary;
use triperf::panel::parse_panel_csv;
use triperf::{MetricKind, MetricSeries};

#[test]
fn variance_decomposition_closes_on_100_random_panels() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for case in 0..100 {
        let n = rng.gen_range(2..=30);
        let t = rng.gen_range(2..=8);
        let years: Vec<i32> = (2000..2000 + t as i32).collect();
        let by_bank: BTreeMap<String, Vec<f64>> = (0..n)
            .map(|b| {
                let level = rng.gen_range(-4.0..4.0);
                let values = (0..t).map(|_| level + rng.gen_range(-1.0..1.0)).collect();
                (format!("B{b:02}"), values)
            })
            .collect();
        let series = MetricSeries { metric: MetricKind::Roa, years, by_bank };
        let summary = panel_summary(&series).expect("non-degenerate panel");
        let big_n = (n * t) as f64;
        let overall_ss = summary.overall.sd.unwrap().powi(2) * (big_n - 1.0);
        let between_ss = summary.between.sd.unwrap().powi(2) * (n as f64 - 1.0);
        let within_ss = summary.within.sd.unwrap().powi(2) * (big_n - 1.0);
        let reconstructed = t as f64 * between_ss + within_ss;
        assert!(
            (overall_ss - reconstructed).abs() / overall_ss.max(1e-12) <= 1e-12,
            "case {case}: overall {overall_ss} vs split {reconstructed}"
        );
        assert_eq!(summary.overall.n, n * t);
        assert_eq!(summary.between.n, n);
        assert_eq!(summary.within.t, t);
    }
}

#[test]
fn csv_round_trip_preserves_every_record() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let t = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let mut records = Vec::new();
        for b in 0..n {
            let bank = format!("B{b:02}");
            let group = if b % 2 == 0 { "even" } else { "odd" };
            for year in 2000..2000 + t {
                let mut r = record_km(
                    &bank,
                    year,
                    group,
                    (0..k).map(|_| rng.gen_range(0.1..1e6)).collect(),
                    (0..m).map(|_| rng.gen_range(0.1..1e6)).collect(),
                );
                r.net_income = rng.gen_range(-1e5..1e5);
                r.total_assets = rng.gen_range(1.0..1e7);
                r.year_end_price = rng.gen_range(0.01..500.0);
                r.dividend_per_share = rng.gen_range(0.0..10.0);
                records.push(r);
            }
        }
        let panel = panel_km(records, k, m);
        let text = panel.to_csv();
        let reparsed = parse_panel_csv(text.as_bytes(), panel.schema()).expect("own output");
        assert_eq!(panel.records(), reparsed.records());
        assert_eq!(panel.years(), reparsed.years());
        assert_eq!(panel.banks(), reparsed.banks());
    }
}
