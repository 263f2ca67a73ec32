//! Budget-of-uncertainty robust counterparts.
//!
//! [`robustify_row`] and [`robustify_objective`] apply the dualized
//! counterpart to any row or to the objective of a [`MilpModel`].
//! [`build_robust`] applies it to the order-limit and budget rows of the
//! vaccine model, where the uncertain quantities are right-hand sides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::{build_deterministic, BuildError, RobustDuals, VariableIndex};
use crate::lp::{LpError, MilpModel, RowId, Sense, VarId};
use crate::model_data::Instance;

pub const DEFAULT_DEVIATION_FRACTION: f64 = 0.1;

fn default_deviation_fraction() -> f64 {
    DEFAULT_DEVIATION_FRACTION
}

/// Uncertainty settings of the vaccine model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustConfig {
    /// Budget of uncertainty shared by the order-limit and budget rows.
    pub gamma: f64,
    /// Deviation as a fraction of the nominal value when no explicit
    /// deviation is given.
    #[serde(default = "default_deviation_fraction")]
    pub deviation_fraction: f64,
    /// Explicit `[i][v]` max-order deviations (doses).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxorder_deviation: Option<Vec<Vec<f64>>>,
    /// Explicit `[i]` budget deviations (currency).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_deviation: Option<Vec<f64>>,
}

impl RobustConfig {
    pub fn new(gamma: f64, deviation_fraction: f64) -> Self {
        Self {
            gamma,
            deviation_fraction,
            maxorder_deviation: None,
            budget_deviation: None,
        }
    }

    /// Problems with the configuration for `n_suppliers` suppliers and
    /// `n_vaccines` vaccine types.
    pub fn violations(&self, n_suppliers: usize, n_vaccines: usize) -> Vec<String> {
        let mut out = Vec::new();
        let bad = |x: f64| !x.is_finite() || x < 0.0;
        if bad(self.gamma) {
            out.push(format!("gamma must be a finite value >= 0, got {}", self.gamma));
        }
        if bad(self.deviation_fraction) {
            out.push(format!(
                "deviation_fraction must be a finite value >= 0, got {}",
                self.deviation_fraction
            ));
        }
        if let Some(m) = &self.maxorder_deviation {
            if m.len() != n_suppliers || m.iter().any(|r| r.len() != n_vaccines) {
                out.push(format!(
                    "maxorder_deviation must be {n_suppliers} x {n_vaccines}"
                ));
            }
            for (i, row) in m.iter().enumerate() {
                for (v, &x) in row.iter().enumerate() {
                    if bad(x) {
                        out.push(format!("maxorder_deviation[{i}][{v}] must be >= 0, got {x}"));
                    }
                }
            }
        }
        if let Some(b) = &self.budget_deviation {
            if b.len() != n_suppliers {
                out.push(format!("budget_deviation must have {n_suppliers} entries"));
            }
            for (i, &x) in b.iter().enumerate() {
                if bad(x) {
                    out.push(format!("budget_deviation[{i}] must be >= 0, got {x}"));
                }
            }
        }
        out
    }

    /// Max-order deviation of supplier `i`, vaccine `v`.
    pub fn max_order_deviation(&self, inst: &Instance, i: usize, v: usize) -> f64 {
        match &self.maxorder_deviation {
            Some(m) => m[i][v],
            None => self.deviation_fraction * inst.suppliers[i].max_order[v] as f64,
        }
    }

    /// Budget deviation of supplier `i`.
    pub fn budget_deviation_of(&self, inst: &Instance, i: usize) -> f64 {
        match &self.budget_deviation {
            Some(b) => b[i],
            None => self.deviation_fraction * inst.suppliers[i].budget,
        }
    }
}

#[derive(Debug, Error)]
pub enum RobustError {
    #[error("unknown row id {0}")]
    UnknownRow(usize),
    #[error("budget of uncertainty {gamma} outside [0, {max}]")]
    GammaOutOfRange { gamma: f64, max: usize },
    #[error("deviation {0} must be finite and >= 0")]
    BadDeviation(f64),
    #[error("equality rows cannot be robustified: `{0}`")]
    EqualityRow(String),
    #[error("invalid robust config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// One uncertain coefficient `a_j ± â_j` on variable `var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertainEntry {
    pub var: VarId,
    pub nominal: f64,
    pub deviation: f64,
}

/// Right-hand side `b ± b̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsUncertainty {
    pub nominal: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertainRowSpec {
    pub row: RowId,
    pub entries: Vec<UncertainEntry>,
    /// Budget of uncertainty, within `[0, size of the uncertain set]`.
    pub gamma: f64,
    pub rhs: Option<RhsUncertainty>,
}

impl UncertainRowSpec {
    /// Number of uncertain parameters, the right-hand side included.
    pub fn uncertain_count(&self) -> usize {
        self.entries.len() + usize::from(self.rhs.is_some())
    }
}

/// Variables introduced by [`robustify_row`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobustRowVars {
    pub z: VarId,
    /// Per-entry duals, in entry order.
    pub p: Vec<VarId>,
    /// Dual of the right-hand side entry.
    pub p_rhs: Option<VarId>,
    /// Absolute-value carriers, in entry order. Equal to the entry variable
    /// when its lower bound is already nonnegative.
    pub y: Vec<VarId>,
}

fn check_deviation(d: f64) -> Result<(), RobustError> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(RobustError::BadDeviation(d))
    }
}

/// Variable equal to `|x|` at any optimum where it matters: `x` itself when
/// `x >= 0` by bounds, otherwise a fresh `y` with `-y <= x <= y`.
fn abs_carrier(model: &mut MilpModel, x: VarId, tag: &str) -> Result<VarId, LpError> {
    if model.variable(x).lower >= 0.0 {
        return Ok(x);
    }
    let xname = model.variable(x).name.clone();
    let y = model.add_nonneg(format!("rc_y[{tag},{xname}]"))?;
    model.add_constraint(format!("rc_abs_lo[{tag},{xname}]"), [(x, 1.0), (y, 1.0)], Sense::Ge, 0.0)?;
    model.add_constraint(format!("rc_abs_hi[{tag},{xname}]"), [(x, 1.0), (y, -1.0)], Sense::Le, 0.0)?;
    Ok(y)
}

/// Replaces a `<=` or `>=` row by its robust counterpart.
///
/// The row becomes `Σ a_j x_j + Γ z + Σ p_j <= b` (signs flipped for `>=`
/// rows) with `z + p_j >= â_j |x_j|` for every uncertain entry and
/// `z + p_b >= b̂` for an uncertain right-hand side.
pub fn robustify_row(
    model: &mut MilpModel,
    spec: &UncertainRowSpec,
) -> Result<RobustRowVars, RobustError> {
    if spec.row.0 >= model.num_rows() {
        return Err(RobustError::UnknownRow(spec.row.0));
    }
    let max = spec.uncertain_count();
    if !(0.0..=max as f64).contains(&spec.gamma) {
        return Err(RobustError::GammaOutOfRange {
            gamma: spec.gamma,
            max,
        });
    }
    for e in &spec.entries {
        check_deviation(e.deviation)?;
        if e.var.0 >= model.num_vars() {
            return Err(LpError::UnknownVar(e.var.0).into());
        }
    }
    if let Some(r) = spec.rhs {
        check_deviation(r.deviation)?;
    }
    let row = model.row(spec.row);
    let sign = match row.sense {
        Sense::Le => 1.0,
        Sense::Ge => -1.0,
        Sense::Eq => return Err(RobustError::EqualityRow(row.name.clone())),
    };
    let tag = row.name.clone();

    let z = model.add_nonneg(format!("rc_z[{tag}]"))?;
    model.set_coefficient(spec.row, z, sign * spec.gamma)?;
    let mut p = Vec::with_capacity(spec.entries.len());
    let mut y = Vec::with_capacity(spec.entries.len());
    for e in &spec.entries {
        model.set_coefficient(spec.row, e.var, e.nominal)?;
        let carrier = abs_carrier(model, e.var, &tag)?;
        let xname = model.variable(e.var).name.clone();
        let pj = model.add_nonneg(format!("rc_p[{tag},{xname}]"))?;
        model.set_coefficient(spec.row, pj, sign)?;
        model.add_constraint(
            format!("rc_dual[{tag},{xname}]"),
            [(z, 1.0), (pj, 1.0), (carrier, -e.deviation)],
            Sense::Ge,
            0.0,
        )?;
        p.push(pj);
        y.push(carrier);
    }
    let p_rhs = match spec.rhs {
        Some(r) => {
            model.set_rhs(spec.row, r.nominal)?;
            let pb = model.add_nonneg(format!("rc_p[{tag},rhs]"))?;
            model.set_coefficient(spec.row, pb, sign)?;
            model.add_constraint(
                format!("rc_dual[{tag},rhs]"),
                [(z, 1.0), (pb, 1.0)],
                Sense::Ge,
                r.deviation,
            )?;
            Some(pb)
        }
        None => None,
    };
    Ok(RobustRowVars { z, p, p_rhs, y })
}

/// Adds cost uncertainty `c_j ± ĉ_j` on the listed variables to a
/// minimization objective. Returns the budget dual `z_0` when any entry is
/// given; with no entries the model is left unchanged.
pub fn robustify_objective(
    model: &mut MilpModel,
    entries: &[(VarId, f64)],
    gamma: f64,
) -> Result<Option<VarId>, RobustError> {
    if entries.is_empty() {
        return Ok(None);
    }
    if !(0.0..=entries.len() as f64).contains(&gamma) {
        return Err(RobustError::GammaOutOfRange {
            gamma,
            max: entries.len(),
        });
    }
    for &(var, dev) in entries {
        check_deviation(dev)?;
        if var.0 >= model.num_vars() {
            return Err(LpError::UnknownVar(var.0).into());
        }
    }
    let z = model.add_nonneg("rc_z[objective]")?;
    model.add_objective_term(z, gamma)?;
    for &(var, dev) in entries {
        let carrier = abs_carrier(model, var, "objective")?;
        let xname = model.variable(var).name.clone();
        let p = model.add_nonneg(format!("rc_p[objective,{xname}]"))?;
        model.add_objective_term(p, 1.0)?;
        model.add_constraint(
            format!("rc_dual[objective,{xname}]"),
            [(z, 1.0), (p, 1.0), (carrier, -dev)],
            Sense::Ge,
            0.0,
        )?;
    }
    Ok(Some(z))
}

/// Robust vaccine model together with any notices raised while building it.
#[derive(Debug, Clone)]
pub struct RobustBuild {
    pub model: MilpModel,
    pub index: VariableIndex,
    pub warnings: Vec<String>,
}

/// Builds the deterministic model and replaces the order-limit and budget
/// rows by their robust counterparts.
///
/// Each of those rows has a single uncertain parameter, its right-hand
/// side, so the shared `Γ` is clamped to `[0, 1]` row by row; a warning is
/// returned when clamping changes it.
pub fn build_robust(inst: &Instance, cfg: &RobustConfig) -> Result<RobustBuild, RobustError> {
    let d = inst.dimensions;
    let problems = cfg.violations(d.n_suppliers, d.n_vaccines);
    if !problems.is_empty() {
        return Err(RobustError::InvalidConfig(problems.join("; ")));
    }
    let (mut model, mut index) = build_deterministic(inst)?;
    let mut warnings = Vec::new();
    let gamma = cfg.gamma.clamp(0.0, 1.0);
    if gamma != cfg.gamma {
        warnings.push(format!(
            "gamma {} exceeds the single-parameter row budget; clamped to {gamma}",
            cfg.gamma
        ));
    }

    let mut r1 = Vec::with_capacity(d.n_suppliers);
    let mut h1 = Vec::with_capacity(d.n_suppliers);
    for i in 0..d.n_suppliers {
        let mut r1_v = Vec::with_capacity(d.n_vaccines);
        let mut h1_v = Vec::with_capacity(d.n_vaccines);
        for v in 0..d.n_vaccines {
            let dev = cfg.max_order_deviation(inst, i, v);
            let mut r1_p = Vec::with_capacity(d.n_periods);
            let mut h1_p = Vec::with_capacity(d.n_periods);
            for p in 0..d.n_periods {
                let vars = robustify_row(
                    &mut model,
                    &UncertainRowSpec {
                        row: index.max_order_rows[i][v][p],
                        entries: Vec::new(),
                        gamma,
                        rhs: Some(RhsUncertainty {
                            nominal: inst.suppliers[i].max_order[v] as f64,
                            deviation: dev,
                        }),
                    },
                )?;
                r1_p.push(vars.z);
                h1_p.push(vars.p_rhs.expect("rhs entry given"));
            }
            r1_v.push(r1_p);
            h1_v.push(h1_p);
        }
        r1.push(r1_v);
        h1.push(h1_v);
    }
    let mut r2 = Vec::with_capacity(d.n_suppliers);
    let mut h2 = Vec::with_capacity(d.n_suppliers);
    for i in 0..d.n_suppliers {
        let vars = robustify_row(
            &mut model,
            &UncertainRowSpec {
                row: index.budget_rows[i],
                entries: Vec::new(),
                gamma,
                rhs: Some(RhsUncertainty {
                    nominal: inst.suppliers[i].budget,
                    deviation: cfg.budget_deviation_of(inst, i),
                }),
            },
        )?;
        r2.push(vars.z);
        h2.push(vars.p_rhs.expect("rhs entry given"));
    }
    index.robust = Some(RobustDuals { r1, h1, r2, h2 });
    Ok(RobustBuild {
        model,
        index,
        warnings,
    })
}

/// Builds the robust model when the instance carries a robust section and
/// the deterministic model otherwise.
pub fn build_for_instance(inst: &Instance) -> Result<RobustBuild, RobustError> {
    match &inst.robust {
        Some(cfg) => build_robust(inst, cfg),
        None => {
            let (model, index) = build_deterministic(inst)?;
            Ok(RobustBuild {
                model,
                index,
                warnings: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests;
