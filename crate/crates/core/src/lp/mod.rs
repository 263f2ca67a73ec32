//! Sparse mixed-integer linear program representation.
//!
//! A [`MilpModel`] is a minimization problem over continuous and binary
//! variables with explicit bounds and a list of sparse linear rows. It is
//! the common currency between the model builders, the robust transformer
//! and the solver.

mod eval;
pub mod mps;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{evaluate, BoundViolation, Evaluation, IntegralityViolation, RowViolation};

/// Handle of a variable inside one [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Handle of a row inside one [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDef {
    pub id: VarId,
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinRow {
    pub id: RowId,
    pub name: String,
    /// Sorted by variable id, no duplicates, no zero coefficients.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinRow {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    pub fn coefficient(&self, var: VarId) -> f64 {
        self.terms
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|pos| self.terms[pos].1)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{name}` has inverted bounds [{lower}, {upper}]")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{0}` must have bounds within [0, 1]")]
    BinaryBounds(String),
    #[error("unknown variable id {0}")]
    UnknownVar(usize),
    #[error("unknown row id {0}")]
    UnknownRow(usize),
    #[error("non-finite coefficient {value} on variable {var} in `{context}`")]
    NonFinite { context: String, var: usize, value: f64 },
    #[error("assignment has {got} entries, model has {expected} variables")]
    MissingAssignment { expected: usize, got: usize },
}

/// A minimization MILP with sparse rows.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    name: String,
    vars: Vec<VarDef>,
    rows: Vec<LinRow>,
    objective: Vec<f64>,
    objective_constant: f64,
    branch_priority: Vec<i32>,
    var_names: HashMap<String, VarId>,
    row_names: HashMap<String, RowId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> Result<VarId, LpError> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(LpError::DuplicateName(name));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::InvertedBounds { name, lower, upper });
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(LpError::BinaryBounds(name));
        }
        let id = VarId(self.vars.len());
        self.var_names.insert(name.clone(), id);
        self.vars.push(VarDef {
            id,
            name,
            lower,
            upper,
            kind,
        });
        self.objective.push(0.0);
        self.branch_priority.push(0);
        Ok(id)
    }

    /// Nonnegative continuous variable.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> Result<VarId, LpError> {
        self.add_variable(name, 0.0, f64::INFINITY, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, LpError> {
        self.add_variable(name, 0.0, 1.0, VarKind::Binary)
    }

    /// Appends a row. Repeated variables are merged by summing their
    /// coefficients and zero coefficients are dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, LpError> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(LpError::DuplicateName(name));
        }
        if !rhs.is_finite() {
            return Err(LpError::NonFinite {
                context: name,
                var: usize::MAX,
                value: rhs,
            });
        }
        let terms = self.normalize_terms(&name, terms)?;
        let id = RowId(self.rows.len());
        self.row_names.insert(name.clone(), id);
        self.rows.push(LinRow {
            id,
            name,
            terms,
            sense,
            rhs,
        });
        Ok(id)
    }

    fn normalize_terms(
        &self,
        context: &str,
        terms: impl IntoIterator<Item = (VarId, f64)>,
    ) -> Result<Vec<(VarId, f64)>, LpError> {
        let mut terms: Vec<(VarId, f64)> = terms.into_iter().collect();
        for &(v, a) in &terms {
            if v.0 >= self.vars.len() {
                return Err(LpError::UnknownVar(v.0));
            }
            if !a.is_finite() {
                return Err(LpError::NonFinite {
                    context: context.to_string(),
                    var: v.0,
                    value: a,
                });
            }
        }
        terms.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Ok(merged)
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) -> Result<(), LpError> {
        let slot = self
            .objective
            .get_mut(var.0)
            .ok_or(LpError::UnknownVar(var.0))?;
        *slot += coef;
        Ok(())
    }

    pub fn set_objective_coefficient(&mut self, var: VarId, coef: f64) -> Result<(), LpError> {
        let slot = self
            .objective
            .get_mut(var.0)
            .ok_or(LpError::UnknownVar(var.0))?;
        *slot = coef;
        Ok(())
    }

    pub fn set_objective_constant(&mut self, constant: f64) {
        self.objective_constant = constant;
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    /// Dense objective vector indexed by variable id.
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// Nonzero objective entries in variable order.
    pub fn objective_terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (VarId(j), c))
    }

    /// Sets a single coefficient of an existing row (zero removes the term).
    pub fn set_coefficient(&mut self, row: RowId, var: VarId, coef: f64) -> Result<(), LpError> {
        if var.0 >= self.vars.len() {
            return Err(LpError::UnknownVar(var.0));
        }
        let row = self.rows.get_mut(row.0).ok_or(LpError::UnknownRow(row.0))?;
        match row.terms.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) if coef == 0.0 => {
                row.terms.remove(pos);
            }
            Ok(pos) => row.terms[pos].1 = coef,
            Err(_) if coef == 0.0 => {}
            Err(pos) => row.terms.insert(pos, (var, coef)),
        }
        Ok(())
    }

    pub fn set_rhs(&mut self, row: RowId, rhs: f64) -> Result<(), LpError> {
        self.rows
            .get_mut(row.0)
            .ok_or(LpError::UnknownRow(row.0))?
            .rhs = rhs;
        Ok(())
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<(), LpError> {
        let def = self.vars.get_mut(var.0).ok_or(LpError::UnknownVar(var.0))?;
        if lower > upper {
            return Err(LpError::InvertedBounds {
                name: def.name.clone(),
                lower,
                upper,
            });
        }
        def.lower = lower;
        def.upper = upper;
        Ok(())
    }

    /// Branching priority; higher classes are branched on first.
    pub fn set_branch_priority(&mut self, var: VarId, priority: i32) -> Result<(), LpError> {
        *self
            .branch_priority
            .get_mut(var.0)
            .ok_or(LpError::UnknownVar(var.0))? = priority;
        Ok(())
    }

    pub fn branch_priority(&self, var: VarId) -> i32 {
        self.branch_priority[var.0]
    }

    pub fn variables(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn variable(&self, var: VarId) -> &VarDef {
        &self.vars[var.0]
    }

    pub fn rows(&self) -> &[LinRow] {
        &self.rows
    }

    pub fn row(&self, row: RowId) -> &LinRow {
        &self.rows[row.0]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn row_by_name(&self, name: &str) -> Option<RowId> {
        self.row_names.get(name).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.id)
    }

    pub fn num_binaries(&self) -> usize {
        self.binaries().count()
    }

    /// Objective value `c·x + constant`.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, x)| c * x)
            .sum::<f64>()
            + self.objective_constant
    }

    /// Copy of the model with every binary relaxed to a continuous variable.
    pub fn relaxed(&self) -> MilpModel {
        let mut copy = self.clone();
        for v in &mut copy.vars {
            v.kind = VarKind::Continuous;
        }
        copy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_variable_gets_id_zero() {
        let mut m = MilpModel::new("t");
        let x = m
            .add_variable("x", 0.0, f64::INFINITY, VarKind::Continuous)
            .unwrap();
        assert_eq!(x, VarId(0));
    }

    #[test]
    fn binary_has_unit_bounds() {
        let mut m = MilpModel::new("t");
        let u = m.add_binary("u").unwrap();
        let def = m.variable(u);
        assert_eq!((def.lower, def.upper, def.kind), (0.0, 1.0, VarKind::Binary));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut m = MilpModel::new("t");
        let err = m
            .add_variable("x", 5.0, 3.0, VarKind::Continuous)
            .unwrap_err();
        assert!(matches!(err, LpError::InvertedBounds { .. }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut m = MilpModel::new("t");
        m.add_nonneg("x").unwrap();
        assert_eq!(
            m.add_nonneg("x").unwrap_err(),
            LpError::DuplicateName("x".into())
        );
        let x = VarId(0);
        m.add_constraint("r", [(x, 1.0)], Sense::Le, 1.0).unwrap();
        assert!(m.add_constraint("r", [(x, 1.0)], Sense::Le, 1.0).is_err());
    }

    #[test]
    fn row_with_two_terms() {
        let mut m = MilpModel::new("t");
        let x = m.add_nonneg("x").unwrap();
        let y = m.add_nonneg("y").unwrap();
        let r = m
            .add_constraint("c", [(x, 1.0), (y, 2.0)], Sense::Le, 10.0)
            .unwrap();
        assert_eq!(m.row(r).terms, vec![(x, 1.0), (y, 2.0)]);
    }

    #[test]
    fn duplicate_terms_are_summed() {
        let mut m = MilpModel::new("t");
        let x = m.add_nonneg("x").unwrap();
        let r = m
            .add_constraint("c", [(x, 1.0), (x, 2.0)], Sense::Le, 10.0)
            .unwrap();
        assert_eq!(m.row(r).terms, vec![(x, 3.0)]);
    }

    #[test]
    fn zero_coefficients_dropped() {
        let mut m = MilpModel::new("t");
        let x = m.add_nonneg("x").unwrap();
        let y = m.add_nonneg("y").unwrap();
        let r = m
            .add_constraint("c", [(x, 1.0), (y, 0.0), (x, -1.0)], Sense::Le, 1.0)
            .unwrap();
        assert!(m.row(r).terms.is_empty());
    }

    #[test]
    fn undefined_variable_rejected() {
        let mut m = MilpModel::new("t");
        m.add_nonneg("x").unwrap();
        assert_eq!(
            m.add_constraint("c", [(VarId(7), 1.0)], Sense::Le, 1.0)
                .unwrap_err(),
            LpError::UnknownVar(7)
        );
    }

    #[test]
    fn set_coefficient_inserts_updates_and_removes() {
        let mut m = MilpModel::new("t");
        let x = m.add_nonneg("x").unwrap();
        let y = m.add_nonneg("y").unwrap();
        let r = m.add_constraint("c", [(y, 1.0)], Sense::Le, 1.0).unwrap();
        m.set_coefficient(r, x, 4.0).unwrap();
        assert_eq!(m.row(r).terms, vec![(x, 4.0), (y, 1.0)]);
        m.set_coefficient(r, y, 0.0).unwrap();
        assert_eq!(m.row(r).terms, vec![(x, 4.0)]);
        assert_eq!(m.row(r).coefficient(x), 4.0);
        assert_eq!(m.row(r).coefficient(y), 0.0);
    }
}
