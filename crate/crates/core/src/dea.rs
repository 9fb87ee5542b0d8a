//! Output-oriented radial DEA under constant and variable returns to
//! scale, including cross-period evaluation.
//!
//! A technology set is one period's observed (input, output) bundles.
//! The radial model asks how far a unit's outputs can be expanded while
//! staying producible: max phi over intensity weights lambda with
//! sum_j lambda_j inputs_j <= own inputs and
//! sum_j lambda_j outputs_j >= phi * own outputs, plus a convexity row
//! under VRS. Farrell output efficiency is 1/phi, which equals the
//! output distance function value: at most 1 on the unit's own
//! frontier, possibly above 1 when evaluated against another period.

use crate::lp::{solve_lp, LpProblem, LpStatus, Relation};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rts {
    Crs,
    Vrs,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeaError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("cross-period evaluation is infeasible under variable returns to scale")]
    InfeasibleCrossPeriod,
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

/// One period's reference technology: n aligned rows of K inputs and
/// M outputs. Constructor-validated, so every stored row satisfies the
/// positivity rules (inputs strictly positive, outputs non-negative
/// with at least one positive entry per row).
#[derive(Debug, Clone, PartialEq)]
pub struct TechnologySet {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
    rts: Rts,
}

impl TechnologySet {
    pub fn new(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<Vec<f64>>,
        rts: Rts,
    ) -> Result<Self, DeaError> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(DeaError::MalformedInput("technology set is empty".to_string()));
        }
        if inputs.len() != outputs.len() {
            return Err(DeaError::MalformedInput(format!(
                "{} input rows but {} output rows",
                inputs.len(),
                outputs.len()
            )));
        }
        let k = inputs[0].len();
        let m = outputs[0].len();
        if k == 0 || m == 0 {
            return Err(DeaError::MalformedInput(
                "need at least one input and one output dimension".to_string(),
            ));
        }
        for (j, (x, y)) in inputs.iter().zip(&outputs).enumerate() {
            if x.len() != k || y.len() != m {
                return Err(DeaError::MalformedInput(format!(
                    "row {j} has inconsistent dimensions"
                )));
            }
            validate_bundle(x, y).map_err(|e| {
                DeaError::MalformedInput(format!("technology row {j}: {e}"))
            })?;
        }
        Ok(TechnologySet { inputs, outputs, rts })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs[0].len()
    }

    pub fn rts(&self) -> Rts {
        self.rts
    }

    pub fn input_row(&self, j: usize) -> &[f64] {
        &self.inputs[j]
    }

    pub fn output_row(&self, j: usize) -> &[f64] {
        &self.outputs[j]
    }
}

fn validate_bundle(inputs: &[f64], outputs: &[f64]) -> Result<(), String> {
    if inputs.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err("inputs must be finite and strictly positive".to_string());
    }
    if outputs.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err("outputs must be finite and non-negative".to_string());
    }
    if !outputs.iter().any(|v| *v > 0.0) {
        return Err("at least one output must be strictly positive".to_string());
    }
    Ok(())
}

/// Radial expansion result for one evaluated unit.
///
/// `efficiency` is 1/phi, the output distance function value. A zero
/// phi (possible cross-period, when the reference period produced none
/// of one of the unit's positive outputs) yields infinite efficiency;
/// downstream consumers treat that as a numeric failure. `feasible` is
/// true on every score this module returns; infeasible solves surface
/// as [`DeaError::InfeasibleCrossPeriod`] instead. The flag exists so
/// score tables built by callers can record failed solves explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceScore {
    pub phi: f64,
    pub efficiency: f64,
    pub feasible: bool,
}

/// Maximal radial output expansion of one unit against a technology.
///
/// The unit need not belong to the technology; cross-period evaluation
/// legitimately produces phi < 1 (efficiency above 1). Under VRS a unit
/// whose inputs lie below every convex combination of reference inputs
/// has no feasible expansion, reported as `InfeasibleCrossPeriod`.
pub fn output_distance(
    dmu_inputs: &[f64],
    dmu_outputs: &[f64],
    tech: &TechnologySet,
) -> Result<DistanceScore, DeaError> {
    let k = tech.num_inputs();
    let m = tech.num_outputs();
    if dmu_inputs.len() != k || dmu_outputs.len() != m {
        return Err(DeaError::MalformedInput(format!(
            "evaluated unit has {} inputs and {} outputs, technology expects {k} and {m}",
            dmu_inputs.len(),
            dmu_outputs.len()
        )));
    }
    validate_bundle(dmu_inputs, dmu_outputs)
        .map_err(|e| DeaError::MalformedInput(format!("evaluated unit: {e}")))?;

    // Variables: [phi, lambda_1 .. lambda_n], all non-negative.
    let n = tech.len();
    let mut objective = vec![0.0; n + 1];
    objective[0] = 1.0;
    let mut p = LpProblem::new(objective);
    for (kk, &rhs) in dmu_inputs.iter().enumerate() {
        let mut coeffs = vec![0.0; n + 1];
        for j in 0..n {
            coeffs[j + 1] = tech.inputs[j][kk];
        }
        p.push_constraint(coeffs, Relation::Le, rhs);
    }
    for (mm, &expanded) in dmu_outputs.iter().enumerate() {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[0] = expanded;
        for j in 0..n {
            coeffs[j + 1] = -tech.outputs[j][mm];
        }
        p.push_constraint(coeffs, Relation::Le, 0.0);
    }
    if tech.rts == Rts::Vrs {
        let mut coeffs = vec![1.0; n + 1];
        coeffs[0] = 0.0;
        p.push_constraint(coeffs, Relation::Eq, 1.0);
    }

    let solution = solve_lp(&p).map_err(|e| DeaError::MalformedInput(e.to_string()))?;
    match solution.status {
        LpStatus::Optimal => {
            let phi = solution.objective_value;
            Ok(DistanceScore { phi, efficiency: 1.0 / phi, feasible: true })
        }
        LpStatus::Infeasible => Err(DeaError::InfeasibleCrossPeriod),
        LpStatus::Unbounded => Err(DeaError::NumericFailure(
            "radial expansion is unbounded, which positive inputs rule out".to_string(),
        )),
    }
}

/// Same-period efficiency of every unit in the technology against the
/// full set. Self-evaluation guarantees phi >= 1; pivot roundoff can
/// land a hair below, so values within 1e-9 of 1 snap to exactly 1,
/// keeping every efficiency inside (0, 1].
pub fn efficiency_frontier(tech: &TechnologySet) -> Result<Vec<f64>, DeaError> {
    let mut effs = Vec::with_capacity(tech.len());
    for j in 0..tech.len() {
        let score = output_distance(tech.input_row(j), tech.output_row(j), tech)?;
        let eff = if (score.efficiency - 1.0).abs() <= 1e-9 {
            1.0
        } else {
            score.efficiency
        };
        effs.push(eff);
    }
    Ok(effs)
}
