use serde::Serialize;

use super::{LpError, MilpModel, RowId, Sense, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub row: RowId,
    pub name: String,
    /// `rhs - lhs` for `<=` and `=`, `lhs - rhs` for `>=`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub var: VarId,
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralityViolation {
    pub var: VarId,
    pub name: String,
    pub value: f64,
}

/// Result of checking one assignment against a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub objective: f64,
    /// Signed slack of every row, in row order.
    pub slacks: Vec<f64>,
    pub row_violations: Vec<RowViolation>,
    pub bound_violations: Vec<BoundViolation>,
    pub integrality_violations: Vec<IntegralityViolation>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.row_violations.is_empty()
            && self.bound_violations.is_empty()
            && self.integrality_violations.is_empty()
    }
}

/// Evaluates `values` (indexed by variable id) against every row, bound and
/// integrality requirement of `model`.
///
/// Row tolerances are relative: a row is violated when its slack is below
/// `-tol * max(1, |rhs|, max_j |a_j x_j|)`. Bounds use `tol * max(1, |bound|)`
/// and integrality uses `tol` as an absolute distance.
pub fn evaluate(model: &MilpModel, values: &[f64], tol: f64) -> Result<Evaluation, LpError> {
    if values.len() != model.num_vars() {
        return Err(LpError::MissingAssignment {
            expected: model.num_vars(),
            got: values.len(),
        });
    }
    let mut slacks = Vec::with_capacity(model.num_rows());
    let mut row_violations = Vec::new();
    for row in model.rows() {
        let mut lhs = 0.0;
        let mut scale = row.rhs.abs().max(1.0);
        for &(v, a) in &row.terms {
            let term = a * values[v.0];
            lhs += term;
            scale = scale.max(term.abs());
        }
        let slack = match row.sense {
            Sense::Le | Sense::Eq => row.rhs - lhs,
            Sense::Ge => lhs - row.rhs,
        };
        let violated = match row.sense {
            Sense::Eq => slack.abs() > tol * scale,
            _ => slack < -tol * scale,
        };
        if violated {
            row_violations.push(RowViolation {
                row: row.id,
                name: row.name.clone(),
                slack,
            });
        }
        slacks.push(slack);
    }

    let mut bound_violations = Vec::new();
    let mut integrality_violations = Vec::new();
    for (def, &x) in model.variables().iter().zip(values) {
        let below = def.lower.is_finite() && x < def.lower - tol * def.lower.abs().max(1.0);
        let above = def.upper.is_finite() && x > def.upper + tol * def.upper.abs().max(1.0);
        if below || above || !x.is_finite() {
            bound_violations.push(BoundViolation {
                var: def.id,
                name: def.name.clone(),
                value: x,
                lower: def.lower,
                upper: def.upper,
            });
        }
        if def.kind == VarKind::Binary && (x - x.round()).abs() > tol {
            integrality_violations.push(IntegralityViolation {
                var: def.id,
                name: def.name.clone(),
                value: x,
            });
        }
    }

    Ok(Evaluation {
        objective: model.objective_value(values),
        slacks,
        row_violations,
        bound_violations,
        integrality_violations,
    })
}
