//! The LP path must reproduce the slope-ratio closed form that exists
//! when each bank has one input and one output: CRS distances are
//! ratios of the bank's output/input slope to the steepest slope in the
//! technology period, and overall TFP change collapses to the ratio of
//! the bank's own slopes.

mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{assert_record_close, panel_km, record_km, slope_malmquist};
use triperf::malmquist::malmquist_indices;

#[test]
fn lp_path_matches_slope_ratio_closed_form_on_100_panels() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
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
        let actual = malmquist_indices(&panel, 2000).expect("solvable panel");
        let oracle = slope_malmquist(&xs_t, &ys_t, &xs_t1, &ys_t1);
        assert_eq!(actual.len(), oracle.len(), "case {case}");
        for (a, o) in actual.iter().zip(&oracle) {
            assert_record_close(a, o, 1e-9);
        }
    }
}

#[test]
fn tfp_change_equals_output_ratio_when_inputs_are_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let n = rng.gen_range(2..=6);
        let mut records = Vec::new();
        let mut ratios = Vec::new();
        for b in 0..n {
            let bank = format!("B{b:02}");
            let x = rng.gen_range(1.0..9.0);
            let y0 = rng.gen_range(1.0..9.0);
            let y1 = rng.gen_range(1.0..9.0);
            ratios.push(y1 / y0);
            records.push(record_km(&bank, 2000, "g", vec![x], vec![y0]));
            records.push(record_km(&bank, 2001, "g", vec![x], vec![y1]));
        }
        let panel = panel_km(records, 1, 1);
        let actual = malmquist_indices(&panel, 2000).unwrap();
        for (a, r) in actual.iter().zip(&ratios) {
            assert!(
                (a.tfpch - r).abs() <= 1e-9,
                "{}: tfpch {} vs output ratio {r}",
                a.bank_id,
                a.tfpch
            );
        }
    }
}
