//! Dense two-phase primal simplex for small linear programs.
//!
//! Built for the DEA distance problems: tens of variables, dense rows,
//! frequent degeneracy because many units sit on shared facets. Bland's
//! rule (smallest-index entering column, smallest-index leaving basic
//! variable on ratio ties) guarantees termination on those degenerate
//! problems at the cost of a few extra pivots, which is irrelevant at
//! this scale. The solver is a pure function, so identical problems
//! produce bit-identical solutions.

use thiserror::Error;

/// Constraint satisfaction tolerance for accepting a vertex as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost and pivot-entry tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Maximize `objective . x` subject to the constraints. Variables are
/// non-negative unless flagged free; free variables are split into
/// positive parts internally.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

impl LpProblem {
    /// Problem with the given maximization objective, no constraints
    /// yet, and every variable bounded below by zero.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem { objective, constraints: Vec::new(), free: vec![false; n] }
    }

    pub fn push_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Marks variable `index` as unrestricted in sign.
    pub fn mark_free(&mut self, index: usize) {
        self.free[index] = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. For non-Optimal statuses `objective_value` is 0 and
/// `variable_values` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub variable_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
}

// Tableau rows store the constraint matrix with the right-hand side in
// the final column; `cost` holds reduced costs z_j - c_j with the
// current objective value in its final entry.
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
        self.basis[row] = col;
    }

    // Bland's rule: entering column is the smallest index with a
    // negative reduced cost; the leaving row minimizes the ratio with
    // ties broken by the smallest basic variable index.
    fn run_simplex(&mut self) -> PivotOutcome {
        loop {
            let ncols = self.ncols();
            let entering = (0..ncols).find(|&j| self.cost[j] < -PIVOT_TOL);
            let Some(col) = entering else {
                return PivotOutcome::Optimal;
            };
            let rhs_col = ncols;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][rhs_col] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_TOL
                                || ((ratio - br).abs() <= PIVOT_TOL
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return PivotOutcome::Unbounded,
            }
        }
    }
}

fn validate(p: &LpProblem) -> Result<(), LpError> {
    let n = p.objective.len();
    if n == 0 {
        return Err(LpError::MalformedProblem("empty objective".to_string()));
    }
    if p.free.len() != n {
        return Err(LpError::MalformedProblem(format!(
            "free-variable flags have length {}, expected {n}",
            p.free.len()
        )));
    }
    if p.objective.iter().any(|v| !v.is_finite()) {
        return Err(LpError::MalformedProblem("non-finite objective entry".to_string()));
    }
    for (i, c) in p.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::MalformedProblem(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if c.coeffs.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
            return Err(LpError::MalformedProblem(format!(
                "non-finite entry in constraint {i}"
            )));
        }
    }
    Ok(())
}

/// Solves the maximization problem with a two-phase primal simplex.
///
/// Phase 1 drives artificial variables out of the basis; redundant rows
/// discovered there are dropped before phase 2 re-optimizes the real
/// objective. Returns Infeasible when the phase-1 optimum leaves any
/// artificial above the feasibility tolerance.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    validate(p)?;

    // Split free variables into positive parts: x = x_pos - x_neg.
    // `col_of_var[j]` is the first tableau column of original var j.
    let n = p.objective.len();
    let mut col_of_var = Vec::with_capacity(n);
    let mut n_struct = 0;
    for j in 0..n {
        col_of_var.push(n_struct);
        n_struct += if p.free[j] { 2 } else { 1 };
    }
    let expand = |coeffs: &[f64]| -> Vec<f64> {
        let mut row = Vec::with_capacity(n_struct);
        for (j, &v) in coeffs.iter().enumerate() {
            row.push(v);
            if p.free[j] {
                row.push(-v);
            }
        }
        row
    };

    let m = p.constraints.len();
    let n_slack = m; // one slack or surplus per inequality row, unused entries stay zero
    let mut n_art = 0;
    // Column layout: structural, slack/surplus, artificial, rhs.
    let art_base = n_struct + n_slack;
    let mut art_rows = Vec::new();
    let mut basis = vec![usize::MAX; m];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, c) in p.constraints.iter().enumerate() {
        let mut coeffs = expand(&c.coeffs);
        let mut rhs = c.rhs;
        let mut relation = c.relation;
        // Normalize to a non-negative right-hand side; the relation
        // flips with the sign.
        if rhs < 0.0 {
            for v in coeffs.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        let mut row = vec![0.0; art_base];
        row[..n_struct].copy_from_slice(&coeffs);
        match relation {
            Relation::Le => {
                row[n_struct + i] = 1.0;
                basis[i] = n_struct + i;
            }
            Relation::Ge => {
                row[n_struct + i] = -1.0;
                art_rows.push(i);
                n_art += 1;
            }
            Relation::Eq => {
                art_rows.push(i);
                n_art += 1;
            }
        }
        row.push(rhs);
        rows.push(row);
    }

    // Insert artificial columns; artificial rows start with their
    // artificial variable basic at the (non-negative) rhs.
    let ncols = art_base + n_art;
    for r in rows.iter_mut() {
        let rhs = r.pop().expect("row has rhs");
        r.resize(ncols, 0.0);
        r.push(rhs);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][art_base + k] = 1.0;
        basis[i] = art_base + k;
    }

    // Phase 1: maximize minus the sum of artificials (bounded above by 0).
    let mut cost = vec![0.0; ncols + 1];
    for i in &art_rows {
        for (j, v) in cost.iter_mut().enumerate() {
            *v -= rows[*i][j];
        }
    }
    // Reduced cost of each artificial column must start at zero.
    for k in 0..n_art {
        cost[art_base + k] = 0.0;
    }
    let mut tab = Tableau { rows, cost, basis };
    if n_art > 0 {
        tab.run_simplex();
        // cost[ncols] holds minus the phase-1 objective; artificials
        // summing above tolerance mean no feasible point exists.
        let art_sum = -tab.cost[ncols];
        if art_sum > FEASIBILITY_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective_value: 0.0,
                variable_values: Vec::new(),
            });
        }
        // Pivot remaining artificials out of the basis; rows that offer
        // no pivot are linearly dependent and get dropped.
        let mut drop_rows = Vec::new();
        for i in 0..tab.rows.len() {
            if tab.basis[i] >= art_base {
                let col = (0..art_base).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(col) => tab.pivot(i, col),
                    None => drop_rows.push(i),
                }
            }
        }
        for &i in drop_rows.iter().rev() {
            tab.rows.remove(i);
            tab.basis.remove(i);
        }
        // Strip artificial columns.
        for r in tab.rows.iter_mut() {
            let rhs = r[ncols];
            r.truncate(art_base);
            r.push(rhs);
        }
    }

    // Phase 2: rebuild the cost row for the real objective over the
    // current basis, then optimize.
    let mut obj_ext = vec![0.0; art_base];
    for j in 0..n {
        obj_ext[col_of_var[j]] = p.objective[j];
        if p.free[j] {
            obj_ext[col_of_var[j] + 1] = -p.objective[j];
        }
    }
    let mut cost = vec![0.0; art_base + 1];
    for (j, c) in cost.iter_mut().enumerate().take(art_base) {
        let z: f64 = tab
            .rows
            .iter()
            .zip(&tab.basis)
            .map(|(row, &b)| obj_ext[b] * row[j])
            .sum();
        *c = z - obj_ext[j];
    }
    cost[art_base] = tab
        .rows
        .iter()
        .zip(&tab.basis)
        .map(|(row, &b)| obj_ext[b] * row[art_base])
        .sum();
    tab.cost = cost;

    match tab.run_simplex() {
        PivotOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: 0.0,
            variable_values: Vec::new(),
        }),
        PivotOutcome::Optimal => {
            let rhs_col = tab.ncols();
            let mut cols = vec![0.0; rhs_col];
            for (row, &b) in tab.rows.iter().zip(&tab.basis) {
                cols[b] = row[rhs_col];
            }
            let mut x = Vec::with_capacity(n);
            for j in 0..n {
                let v = if p.free[j] {
                    cols[col_of_var[j]] - cols[col_of_var[j] + 1]
                } else {
                    cols[col_of_var[j]]
                };
                x.push(v);
            }
            let objective_value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            Ok(LpSolution { status: LpStatus::Optimal, objective_value, variable_values: x })
        }
    }
}
