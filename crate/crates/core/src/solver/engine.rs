//! LP relaxations handed to the simplex backend, with geometric-mean
//! scaling applied on the way in and undone on the way out.

use std::time::Duration;

use microlp::{ComparisonOp, Error as LpBackendError, OptimizationDirection, Problem, SolveOutcome, Variable};

use crate::lp::{MilpModel, Sense, VarKind};

const SCALING_PASSES: usize = 6;

pub(crate) enum LpResult {
    Optimal(microlp::Solution),
    Infeasible,
    Unbounded,
    Interrupted,
    Failed(String),
}

fn classify(r: Result<SolveOutcome, LpBackendError>) -> LpResult {
    match r {
        Ok(SolveOutcome::Solution(s)) => LpResult::Optimal(s),
        Ok(SolveOutcome::Interrupted(_)) => LpResult::Interrupted,
        Err(LpBackendError::Infeasible) => LpResult::Infeasible,
        Err(LpBackendError::Unbounded) => LpResult::Unbounded,
        Err(e) => LpResult::Failed(e.to_string()),
    }
}

fn pow2(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        x.log2().round().exp2()
    } else {
        1.0
    }
}

/// Row and column factors from alternating geometric-mean passes, rounded
/// to powers of two. Binary columns keep factor 1 so that fixing them to 0
/// or 1 stays exact.
pub(crate) fn geometric_scaling(model: &MilpModel) -> (Vec<f64>, Vec<f64>) {
    let n = model.num_vars();
    let mut row_scale = vec![1.0; model.num_rows()];
    let mut col_scale = vec![1.0; n];
    for _ in 0..SCALING_PASSES {
        for (r, row) in model.rows().iter().enumerate() {
            let (lo, hi) = row.terms.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &(v, a)| {
                let x = (a * col_scale[v.0]).abs();
                (lo.min(x), hi.max(x))
            });
            if hi > 0.0 {
                row_scale[r] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (r, row) in model.rows().iter().enumerate() {
            for &(v, a) in &row.terms {
                let x = (a * row_scale[r]).abs();
                lo[v.0] = lo[v.0].min(x);
                hi[v.0] = hi[v.0].max(x);
            }
        }
        for (j, def) in model.variables().iter().enumerate() {
            if def.kind == VarKind::Continuous && hi[j] > 0.0 {
                col_scale[j] = pow2(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    (row_scale, col_scale)
}

/// Continuous relaxation of a model, ready to solve.
pub(crate) struct LpEngine {
    problem: Problem,
    vars: Vec<Variable>,
    col_scale: Vec<f64>,
    obj_scale: f64,
    obj_constant: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// A row without terms whose right-hand side cannot hold.
    trivially_infeasible: bool,
}

impl LpEngine {
    /// Relaxation with the model's own bounds.
    pub fn new(model: &MilpModel, scaling: bool) -> Self {
        let bounds: Vec<(f64, f64)> = model.variables().iter().map(|v| (v.lower, v.upper)).collect();
        Self::with_bounds(model, scaling, &bounds)
    }

    /// Relaxation with the variable bounds replaced by `bounds`.
    pub fn with_bounds(model: &MilpModel, scaling: bool, bounds: &[(f64, f64)]) -> Self {
        let (row_scale, col_scale) = if scaling {
            geometric_scaling(model)
        } else {
            (vec![1.0; model.num_rows()], vec![1.0; model.num_vars()])
        };
        let max_cost = model
            .objective()
            .iter()
            .zip(&col_scale)
            .map(|(c, s)| (c * s).abs())
            .fold(0.0f64, f64::max);
        let obj_scale = if scaling && max_cost > 0.0 {
            pow2(1.0 / max_cost)
        } else {
            1.0
        };
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<Variable> = model
            .objective()
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let s = col_scale[j];
                let (lo, hi) = bounds[j];
                problem.add_var(c * s * obj_scale, (lo / s, hi / s))
            })
            .collect();
        let mut trivially_infeasible = false;
        for (r, row) in model.rows().iter().enumerate() {
            if row.terms.is_empty() {
                let ok = match row.sense {
                    Sense::Le => 0.0 <= row.rhs,
                    Sense::Ge => 0.0 >= row.rhs,
                    Sense::Eq => row.rhs == 0.0,
                };
                trivially_infeasible |= !ok;
                continue;
            }
            let rs = row_scale[r];
            let expr: Vec<(Variable, f64)> = row
                .terms
                .iter()
                .map(|&(v, a)| (vars[v.0], a * rs * col_scale[v.0]))
                .collect();
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, row.rhs * rs);
        }
        Self {
            problem,
            vars,
            col_scale,
            obj_scale,
            obj_constant: model.objective_constant(),
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            trivially_infeasible,
        }
    }

    pub fn solve(&self, time_limit: Option<Duration>) -> LpResult {
        if self.trivially_infeasible {
            return LpResult::Infeasible;
        }
        let mut options = microlp::SolveOptions::default();
        options.time_limit = time_limit;
        classify(self.problem.solve_with(options))
    }

    /// Re-optimizes `sol` with variable `j` fixed to `value`.
    pub fn fix(&self, sol: microlp::Solution, j: usize, value: f64) -> LpResult {
        classify(sol.fix_var(self.vars[j], value / self.col_scale[j]))
    }

    /// Objective of the relaxation at `sol`, in model units.
    pub fn bound(&self, sol: &microlp::Solution) -> f64 {
        sol.objective() / self.obj_scale + self.obj_constant
    }

    /// Unscaled values, clipped into the variable bounds.
    pub fn values(&self, sol: &microlp::Solution) -> Vec<f64> {
        self.vars
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                (sol.var_value_raw(v) * self.col_scale[j]).clamp(self.lower[j], self.upper[j])
            })
            .collect()
    }
}
