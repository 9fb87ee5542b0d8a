//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here recomputes expected values by methods unrelated to
//! the library's own algorithms: linear programs by vertex enumeration,
//! the single-input single-output Malmquist index by slope ratios, the
//! incomplete beta function by binomial tail sums, and the t CDF by
//! Simpson quadrature with factorial-based gamma values. A bug shared
//! between library and oracle would have to be implemented twice in two
//! different ways.

#![allow(dead_code)]

use std::collections::BTreeMap;

use triperf::{
    BankYearRecord, LpProblem, MalmquistRecord, PanelDataset, Relation, SchemaConfig,
};

pub fn schema_km(k: usize, m: usize) -> SchemaConfig {
    SchemaConfig {
        input_columns: (0..k).map(|i| format!("in{i}")).collect(),
        output_columns: (0..m).map(|i| format!("out{i}")).collect(),
        net_income: "net_income".to_string(),
        total_assets: "total_assets".to_string(),
        year_end_price: "year_end_price".to_string(),
        dividend_per_share: "dividend_per_share".to_string(),
        group_column: "group".to_string(),
    }
}

pub fn record_km(
    bank: &str,
    year: i32,
    group: &str,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
) -> BankYearRecord {
    BankYearRecord {
        bank_id: bank.to_string(),
        year,
        group: group.to_string(),
        inputs,
        outputs,
        net_income: 10.0,
        total_assets: 1000.0,
        year_end_price: 50.0,
        dividend_per_share: 1.0,
    }
}

pub fn panel_km(records: Vec<BankYearRecord>, k: usize, m: usize) -> PanelDataset {
    PanelDataset::from_records(records, schema_km(k, m)).expect("valid test panel")
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns None when the matrix is singular to working precision.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot_vals = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot_vals[col];
            for (k, &pv) in pivot_vals.iter().enumerate().skip(col) {
                a[row][k] -= factor * pv;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for col in row + 1..n {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn combinations(pool: usize, pick: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(pick);
    fn recurse(start: usize, pool: usize, pick: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == pick {
            out.push(current.clone());
            return;
        }
        for i in start..pool {
            current.push(i);
            recurse(i + 1, pool, pick, current, out);
            current.pop();
        }
    }
    recurse(0, pool, pick, &mut current, &mut out);
    out
}

/// Maximum of the LP by brute force: every basic solution is the
/// intersection of n hyperplanes drawn from the constraint boundaries
/// and the coordinate planes; feasible intersections are scored and the
/// best kept. Returns None when no feasible vertex exists. Only valid
/// for bounded problems over non-negative variables, which is the only
/// family the randomized comparisons generate.
pub fn brute_force_lp_max(p: &LpProblem) -> Option<f64> {
    let n = p.objective.len();
    // Hyperplanes: one per constraint (its boundary), one per variable.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &p.constraints {
        planes.push((c.coeffs.clone(), c.rhs));
    }
    for j in 0..n {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        planes.push((row, 0.0));
    }
    let mut best: Option<f64> = None;
    for combo in combinations(planes.len(), n) {
        let a: Vec<Vec<f64>> = combo.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if x.iter().any(|&v| v < -1e-7) {
            continue;
        }
        let feasible = p.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs + 1e-7,
                Relation::Ge => lhs >= c.rhs - 1e-7,
                Relation::Eq => (lhs - c.rhs).abs() <= 1e-7,
            }
        });
        if !feasible {
            continue;
        }
        let value: f64 = p.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
        best = Some(match best {
            Some(v) if v >= value => v,
            _ => value,
        });
    }
    best
}

/// Closed-form Malmquist components for a single-input single-output
/// two-period panel, written as functions of output/input slopes only.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRecord {
    pub d_t_t: f64,
    pub d_t_t1: f64,
    pub d_t1_t: f64,
    pub d_t1_t1: f64,
    pub effch: f64,
    pub techch: f64,
    pub tfpch: f64,
    pub pech: f64,
    pub sech: f64,
}

/// Best producible output at input level `x` on the one-dimensional
/// VRS frontier over the observed (x_j, y_j) points: the value of the
/// non-decreasing concave envelope. Vertices of the defining LP have at
/// most two active reference units, so singletons and crossing pairs
/// enumerate every candidate.
fn vrs_best_output(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (i, &xi) in xs.iter().enumerate() {
        if xi <= x + 1e-12 {
            best = best.max(ys[i]);
        }
    }
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if xs[i] >= xs[j] {
                continue;
            }
            // alpha on unit i solves alpha x_i + (1 - alpha) x_j = x.
            let alpha = (xs[j] - x) / (xs[j] - xs[i]);
            if !(0.0..=1.0).contains(&alpha) {
                continue;
            }
            best = best.max(alpha * ys[i] + (1.0 - alpha) * ys[j]);
        }
    }
    best
}

/// `xs_t[j], ys_t[j]` are bank j's input and output in the first
/// period, `xs_t1, ys_t1` in the second.
pub fn slope_malmquist(
    xs_t: &[f64],
    ys_t: &[f64],
    xs_t1: &[f64],
    ys_t1: &[f64],
) -> Vec<SlopeRecord> {
    let slope = |xs: &[f64], ys: &[f64], j: usize| ys[j] / xs[j];
    let frontier = |xs: &[f64], ys: &[f64]| {
        (0..xs.len()).map(|j| slope(xs, ys, j)).fold(f64::NEG_INFINITY, f64::max)
    };
    let r_t = frontier(xs_t, ys_t);
    let r_t1 = frontier(xs_t1, ys_t1);
    (0..xs_t.len())
        .map(|j| {
            let s_t = slope(xs_t, ys_t, j);
            let s_t1 = slope(xs_t1, ys_t1, j);
            let d_t_t = s_t / r_t;
            let d_t_t1 = s_t1 / r_t;
            let d_t1_t = s_t / r_t1;
            let d_t1_t1 = s_t1 / r_t1;
            let effch = d_t1_t1 / d_t_t;
            let techch = ((d_t_t1 / d_t1_t1) * (d_t_t / d_t1_t)).sqrt();
            let vrs_t = ys_t[j] / vrs_best_output(xs_t, ys_t, xs_t[j]);
            let vrs_t1 = ys_t1[j] / vrs_best_output(xs_t1, ys_t1, xs_t1[j]);
            let pech = vrs_t1 / vrs_t;
            SlopeRecord {
                d_t_t,
                d_t_t1,
                d_t1_t,
                d_t1_t1,
                effch,
                techch,
                tfpch: s_t1 / s_t,
                pech,
                sech: effch / pech,
            }
        })
        .collect()
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: {actual} vs {expected} (tol {tol})"
    );
}

pub fn assert_record_close(actual: &MalmquistRecord, oracle: &SlopeRecord, tol: f64) {
    let pairs = [
        (actual.d_t_t, oracle.d_t_t, "d_t_t"),
        (actual.d_t_t1, oracle.d_t_t1, "d_t_t1"),
        (actual.d_t1_t, oracle.d_t1_t, "d_t1_t"),
        (actual.d_t1_t1, oracle.d_t1_t1, "d_t1_t1"),
        (actual.effch, oracle.effch, "effch"),
        (actual.techch, oracle.techch, "techch"),
        (actual.tfpch, oracle.tfpch, "tfpch"),
        (actual.pech, oracle.pech, "pech"),
        (actual.sech, oracle.sech, "sech"),
    ];
    for (a, e, name) in pairs {
        assert_close(a, e, tol, &format!("{} {name}", actual.bank_id));
    }
}

// --- factorial-based gamma values, independent of the Lanczos series ---

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ln Gamma(half / 2) for positive integer `half`, from exact factorial
/// identities: Gamma(n) = (n-1)! and
/// Gamma(n + 1/2) = (2n)! / (4^n n!) sqrt(pi).
pub fn ln_gamma_half(half: u64) -> f64 {
    assert!(half >= 1);
    if half.is_multiple_of(2) {
        ln_factorial(half / 2 - 1)
    } else {
        let n = (half - 1) / 2;
        ln_factorial(2 * n) - (n as f64) * 4f64.ln() - ln_factorial(n)
            + 0.5 * std::f64::consts::PI.ln()
    }
}

/// I_x(a, b) for integer a, b >= 1 via the binomial tail identity:
/// the regularized incomplete beta equals the probability of at least
/// `a` successes in a + b - 1 Bernoulli(x) trials.
pub fn binomial_inc_beta(x: f64, a: u64, b: u64) -> f64 {
    assert!((0.0..=1.0).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let n = a + b - 1;
    let ln_x = x.ln();
    let ln_1mx = (1.0 - x).ln();
    (a..=n)
        .map(|j| {
            let ln_choose = ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j);
            (ln_choose + j as f64 * ln_x + (n - j) as f64 * ln_1mx).exp()
        })
        .sum()
}

/// Two-sided tail probability of Student's t by Simpson integration of
/// the density over [0, |t|], with the normalizing constant built from
/// factorial gamma values.
pub fn t_two_tail_simpson(t: f64, df: u64) -> f64 {
    let nu = df as f64;
    let ln_coeff = ln_gamma_half(df + 1)
        - ln_gamma_half(df)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    let density = |u: f64| (ln_coeff - 0.5 * (nu + 1.0) * (1.0 + u * u / nu).ln()).exp();
    let upper = t.abs();
    let steps = 20_000usize;
    let h = upper / steps as f64;
    let mut acc = density(0.0) + density(upper);
    for i in 1..steps {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * density(i as f64 * h);
    }
    let integral = acc * h / 3.0;
    (1.0 - 2.0 * integral).clamp(0.0, 1.0)
}

/// Pooled growth panel laid out as metric -> bank -> per-year values.
pub fn by_bank(entries: &[(&str, Vec<f64>)]) -> BTreeMap<String, Vec<f64>> {
    entries
        .iter()
        .map(|(bank, vals)| (bank.to_string(), vals.clone()))
        .collect()
}
