//! Acceptance gate. One test per release criterion, each asserting at
//! the criterion's stated tolerance and printing one PASS line. Run
//! with `cargo test --test acceptance -- --nocapture` to see the lines.

mod support;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{assert_record_close, brute_force_lp_max, panel_km, record_km, slope_malmquist};
use triperf::dea::efficiency_frontier;
use triperf::lp::solve_lp;
use triperf::malmquist::{malmquist_indices, yearly_group_average};
use triperf::metrics::panel_summary;
use triperf::report::{run_pipeline, write_artifacts, ALL_ARTIFACTS};
use triperf::stats::{f_cdf, one_way_anova, paired_t_test, t_cdf};
use triperf::{
    LpProblem, LpStatus, MetricKind, MetricSeries, OutputFormat, Relation, Rts, RunConfig,
    TechnologySet,
};

fn two_tailed_p(t: f64, df: f64) -> f64 {
    2.0 * (1.0 - t_cdf(t.abs(), df).unwrap())
}

#[test]
fn t_distribution_fidelity() {
    let p2 = two_tailed_p(0.330, 115.0);
    assert!(
        (p2 - 0.742).abs() <= 0.002,
        "p(t=0.330, df=115) = {p2}, want 0.742 +- 0.002"
    );
    let p3 = two_tailed_p(-1.385, 115.0);
    assert!(
        (p3 - 0.169).abs() <= 0.002,
        "p(t=-1.385, df=115) = {p3}, want 0.169 +- 0.002"
    );
    println!("PASS: two-tailed p(0.330, 115) = {p2:.6} and p(-1.385, 115) = {p3:.6}");
}

/// 116 differences with exact sample moments: 58 at mean + c and 58 at
/// mean - c give sample mean `mean` and, with c = sd sqrt(115/116),
/// sample standard deviation `sd`.
fn diffs_with_moments(mean: f64, se: f64) -> Vec<f64> {
    let n = 116.0f64;
    let sd = se * n.sqrt();
    let c = sd * (115.0 / 116.0f64).sqrt();
    let mut diffs = Vec::with_capacity(116);
    for _ in 0..58 {
        diffs.push(mean + c);
        diffs.push(mean - c);
    }
    diffs
}

#[test]
fn confidence_interval_fidelity() {
    let zeros = vec![0.0; 116];
    let cases = [
        (-0.11663, 0.0842009, -0.28341, 0.050154, 5e-4),
        (0.235619, 0.7131116, -1.17692, 1.648156, 5e-3),
    ];
    for (mean, se, lo, hi, tol) in cases {
        let result = paired_t_test(&diffs_with_moments(mean, se), &zeros, 0.05).unwrap();
        assert_eq!(result.df, 115);
        assert!((result.mean_diff - mean).abs() <= 1e-9);
        assert!((result.se - se).abs() <= 1e-9);
        assert!(
            (result.ci_low - lo).abs() <= tol,
            "ci_low {} vs {lo} (tol {tol})",
            result.ci_low
        );
        assert!(
            (result.ci_high - hi).abs() <= tol,
            "ci_high {} vs {hi} (tol {tol})",
            result.ci_high
        );
        println!(
            "PASS: mean {mean}, se {se}, df 115 -> CI ({:.6}, {:.6}) within {tol}",
            result.ci_low, result.ci_high
        );
    }
}

/// Three groups of 143 built as 71 symmetric pairs plus the center, so
/// within and between sums of squares hit chosen targets exactly.
fn groups_with_f(ss_within: f64, f_target: f64) -> Vec<Vec<f64>> {
    let df_within = 426.0;
    let c = (ss_within / df_within).sqrt();
    let ss_between = 2.0 * f_target * (ss_within / df_within);
    let delta = (ss_between / 286.0).sqrt();
    [-1.0, 0.0, 1.0]
        .into_iter()
        .map(|e| {
            let center = 10.0 + delta * e;
            let mut group = vec![center];
            for _ in 0..71 {
                group.push(center + c);
                group.push(center - c);
            }
            group
        })
        .collect()
}

#[test]
fn f_distribution_fidelity() {
    let ms = 11681.831f64 / 426.0;
    assert!((ms - 27.422).abs() <= 0.001, "ms_within arithmetic: {ms}");

    let result = one_way_anova(&groups_with_f(11681.831, 0.503)).unwrap();
    assert_eq!(result.df_between, 2);
    assert_eq!(result.df_within, 426);
    assert!(
        (result.ms_within - 27.422).abs() <= 0.001,
        "ms_within {} vs 27.422",
        result.ms_within
    );
    assert!((result.f - 0.503).abs() <= 1e-9, "engineered F: {}", result.f);
    assert!(
        (result.p - 0.605).abs() <= 0.003,
        "p from anova {} vs 0.605",
        result.p
    );

    let direct = 1.0 - f_cdf(0.503, 2.0, 426.0).unwrap();
    assert!(
        (direct - 0.605).abs() <= 0.003,
        "upper p(F=0.503, 2, 426) = {direct}, want 0.605 +- 0.003"
    );
    println!(
        "PASS: ms_within {:.4}, F {:.4}, upper p {:.5} (anova {:.5})",
        result.ms_within, result.f, direct, result.p
    );
}

#[test]
fn group_weighted_tfp_aggregation() {
    let mut groups = BTreeMap::new();
    groups.insert("Conventional".to_string(), vec![0.9002; 23]);
    groups.insert("Islamic".to_string(), vec![0.9942; 6]);
    let averages = yearly_group_average(&groups).unwrap();
    let weighted = (23.0 * 0.9002 + 6.0 * 0.9942) / 29.0;
    assert!((averages.all_banks_mean - weighted).abs() <= 1e-12);
    assert!(
        (averages.all_banks_mean - 0.91962).abs() <= 5e-4,
        "all-banks mean {} vs printed 0.91962",
        averages.all_banks_mean
    );
    println!(
        "PASS: (23 x 0.9002 + 6 x 0.9942)/29 = {:.5} within 5e-4 of 0.91962",
        averages.all_banks_mean
    );
}

fn random_two_period_panel(
    rng: &mut ChaCha8Rng,
    identical: bool,
) -> triperf::PanelDataset {
    let n = rng.gen_range(2..=10);
    let k = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=3);
    let mut records = Vec::new();
    for b in 0..n {
        let bank = format!("B{b:02}");
        let inputs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..10.0)).collect();
        let outputs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..10.0)).collect();
        let (i1, o1) = if identical {
            (inputs.clone(), outputs.clone())
        } else {
            (
                (0..k).map(|_| rng.gen_range(0.5..10.0)).collect(),
                (0..m).map(|_| rng.gen_range(0.5..10.0)).collect(),
            )
        };
        records.push(record_km(&bank, 2000, "g", inputs, outputs));
        records.push(record_km(&bank, 2001, "g", i1, o1));
    }
    panel_km(records, k, m)
}

#[test]
fn malmquist_identity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..20 {
        let panel = random_two_period_panel(&mut rng, true);
        for r in malmquist_indices(&panel, 2000).unwrap() {
            for (name, v) in [
                ("effch", r.effch),
                ("techch", r.techch),
                ("tfpch", r.tfpch),
                ("pech", r.pech),
                ("sech", r.sech),
            ] {
                assert!((v - 1.0).abs() <= 1e-9, "identical case {case} {name}: {v}");
            }
        }
    }
    for case in 0..100 {
        let panel = random_two_period_panel(&mut rng, false);
        for r in malmquist_indices(&panel, 2000).unwrap() {
            assert!(
                (r.tfpch - r.effch * r.techch).abs() <= 1e-9,
                "case {case} {}: tfpch",
                r.bank_id
            );
            assert!(
                (r.effch - r.pech * r.sech).abs() <= 1e-9,
                "case {case} {}: effch",
                r.bank_id
            );
        }
    }
    println!("PASS: unit indices on identical periods; decomposition identities on 100 panels");
}

#[test]
fn closed_form_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for case in 0..100 {
        let n = rng.gen_range(2..=8);
        let mut xs_t = Vec::new();
        let mut ys_t = Vec::new();
        let mut xs_t1 = Vec::new();
        let mut ys_t1 = Vec::new();
        let mut records = Vec::new();
        for b in 0..n {
            let bank = format!("B{b:02}");
            let (x0, y0) = (rng.gen_range(0.5..10.0), rng.gen_range(0.5..10.0));
            let (x1, y1) = (rng.gen_range(0.5..10.0), rng.gen_range(0.5..10.0));
            xs_t.push(x0);
            ys_t.push(y0);
            xs_t1.push(x1);
            ys_t1.push(y1);
            records.push(record_km(&bank, 2000, "g", vec![x0], vec![y0]));
            records.push(record_km(&bank, 2001, "g", vec![x1], vec![y1]));
        }
        let panel = panel_km(records, 1, 1);
        let actual = malmquist_indices(&panel, 2000).unwrap();
        let oracle = slope_malmquist(&xs_t, &ys_t, &xs_t1, &ys_t1);
        assert_eq!(actual.len(), oracle.len(), "case {case}");
        for (a, o) in actual.iter().zip(&oracle) {
            assert_record_close(a, o, 1e-9);
        }
    }
    println!("PASS: LP path matches slope-ratio closed form on 100 single-ratio panels");
}

#[test]
fn lp_oracle_and_dea_self_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for case in 0..100 {
        let n = rng.gen_range(2..=4);
        let anchor: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let dot = |row: &[f64]| row.iter().zip(&anchor).map(|(a, x)| a * x).sum::<f64>();
        let mut p = LpProblem::new((0..n).map(|_| rng.gen_range(0.0..3.0)).collect());
        let rows = rng.gen_range(2..=4);
        for _ in 0..rows {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
            let rhs = dot(&coeffs) * rng.gen_range(1.05..1.6);
            p.push_constraint(coeffs, Relation::Le, rhs);
        }
        if case % 2 == 0 {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
            let rhs = dot(&coeffs) * rng.gen_range(0.4..0.95);
            p.push_constraint(coeffs, Relation::Ge, rhs);
        }
        if case % 3 == 0 {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
            let rhs = dot(&coeffs);
            p.push_constraint(coeffs, Relation::Eq, rhs);
        }
        let solved = solve_lp(&p).unwrap();
        assert_eq!(solved.status, LpStatus::Optimal, "case {case}");
        let oracle = brute_force_lp_max(&p).expect("bounded feasible problem");
        assert!(
            (solved.objective_value - oracle).abs() <= 1e-6,
            "case {case}: simplex {} vs enumeration {oracle}",
            solved.objective_value
        );
    }

    for case in 0..50 {
        let n = rng.gen_range(2..=10);
        let k = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.gen_range(0.5..10.0)).collect())
            .collect();
        let outputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0.5..10.0)).collect())
            .collect();
        for rts in [Rts::Crs, Rts::Vrs] {
            let tech = TechnologySet::new(inputs.clone(), outputs.clone(), rts).unwrap();
            let effs = efficiency_frontier(&tech).unwrap();
            for (j, &e) in effs.iter().enumerate() {
                assert!(e > 0.0 && e <= 1.0, "case {case} {rts:?} unit {j}: {e}");
            }
            assert!(
                effs.contains(&1.0),
                "case {case} {rts:?}: no frontier unit"
            );
        }
    }
    println!("PASS: simplex matches enumeration on 100 LPs; self-evaluations in (0, 1] with a frontier unit");
}

#[test]
fn panel_and_anova_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for case in 0..100 {
        let n = rng.gen_range(2..=30);
        let t = rng.gen_range(2..=8);
        let years: Vec<i32> = (2000..2000 + t).collect();
        let by_bank: BTreeMap<String, Vec<f64>> = (0..n)
            .map(|b| {
                let level = rng.gen_range(-4.0..4.0);
                let vals = (0..t).map(|_| level + rng.gen_range(-1.0..1.0)).collect();
                (format!("B{b:02}"), vals)
            })
            .collect();
        let series = MetricSeries { metric: MetricKind::Roa, years, by_bank };
        let summary = panel_summary(&series).unwrap();
        let big_n = (n * t) as f64;
        let overall_ss = summary.overall.sd.unwrap().powi(2) * (big_n - 1.0);
        let between_ss = summary.between.sd.unwrap().powi(2) * (n as f64 - 1.0);
        let within_ss = summary.within.sd.unwrap().powi(2) * (big_n - 1.0);
        let split = t as f64 * between_ss + within_ss;
        assert!(
            (overall_ss - split).abs() / overall_ss.max(1e-12) <= 1e-12,
            "case {case}: {overall_ss} vs {split}"
        );
    }
    for case in 0..100 {
        let k = rng.gen_range(2..=5);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|g| {
                let n = rng.gen_range(2..=30);
                (0..n).map(|_| rng.gen_range(-3.0..3.0) + g as f64 * 0.3).collect()
            })
            .collect();
        let result = one_way_anova(&groups).unwrap();
        let split = result.ss_between + result.ss_within;
        assert!(
            (result.ss_total - split).abs() / result.ss_total.max(1e-12) <= 1e-12,
            "case {case}: {} vs {split}",
            result.ss_total
        );
    }
    println!("PASS: variance decomposition and ANOVA sum-of-squares identities close at 1e-12");
}

#[test]
fn end_to_end_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let config = RunConfig::new(
        root.join("data/banks_2010_2015.csv"),
        root.join("data/schema.conf"),
        tmp.path().to_path_buf(),
    );
    let formats = [OutputFormat::Markdown, OutputFormat::Csv];

    let start = Instant::now();
    let bundle = run_pipeline(&config).unwrap();
    let first_dir = tmp.path().join("first");
    write_artifacts(&bundle, &first_dir, &formats, &ALL_ARTIFACTS).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "report took {elapsed:?}");

    let growth = bundle.growth.computed().expect("growth computed");
    for series in growth.series() {
        assert_eq!(series.num_observations(), 116);
    }
    for pair in &bundle.pairs {
        assert_eq!(pair.result.computed().expect("pair computed").df, 115);
    }

    let second_bundle = run_pipeline(&config).unwrap();
    let second_dir = tmp.path().join("second");
    write_artifacts(&second_bundle, &second_dir, &formats, &ALL_ARTIFACTS).unwrap();
    for entry in std::fs::read_dir(&first_dir).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(first_dir.join(&name)).unwrap();
        let b = std::fs::read(second_dir.join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between runs");
    }
    println!(
        "PASS: fixture report in {:.2}s, byte-identical across runs, 116 observations per metric, df 115",
        elapsed.as_secs_f64()
    );
}
