//! Deterministic vaccine-network MILP.
//!
//! [`build_deterministic`] turns an [`Instance`] into a [`MilpModel`] and a
//! [`VariableIndex`] that maps every `(decision, index tuple)` to its
//! variable. [`objective_components`] splits an assignment back into
//! holding (P1), transportation (P2) and deprivation (P3) costs.

mod checks;

use serde::Serialize;
use thiserror::Error;

use crate::lp::{LpError, MilpModel, RowId, Sense, VarId};
use crate::model_data::{validate_instance, Instance, Violation};

pub use checks::{structure_violations, StructureViolation};

/// Branching priority of the shipment indicators. Age-group eligibility
/// binaries keep the default 0, so indicators are branched on first.
pub const INDICATOR_PRIORITY: i32 = 1;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("instance has {} invariant violation(s), first: {}", .0.len(), .0[0])]
    InvalidInstance(Vec<Violation>),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Dual variables added by the robust counterpart of the order and budget
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustDuals {
    /// `[i][v][p]` budget-of-uncertainty dual of the max-order row.
    pub r1: Vec<Vec<Vec<VarId>>>,
    /// `[i][v][p]` per-entry dual of the max-order row.
    pub h1: Vec<Vec<Vec<VarId>>>,
    /// `[i]` budget-of-uncertainty dual of the budget row.
    pub r2: Vec<VarId>,
    /// `[i]` per-entry dual of the budget row.
    pub h2: Vec<VarId>,
}

/// Variable ids of every decision, plus the rows the robust counterpart
/// rewrites.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableIndex {
    /// Orders `[i][v][p]`.
    pub x: Vec<Vec<Vec<VarId>>>,
    /// Supplier to distribution center shipments `[i][j][v][p]`.
    pub y: Vec<Vec<Vec<Vec<VarId>>>>,
    /// Distribution center to vaccination center shipments `[j][k][v][p]`.
    pub w: Vec<Vec<Vec<Vec<VarId>>>>,
    /// Age-group eligibility `[a][p]`, binary.
    pub u: Vec<Vec<VarId>>,
    /// Backorders `[k][v][p]`.
    pub back: Vec<Vec<Vec<VarId>>>,
    /// Demand to satisfy `[k][v][p]`.
    pub q: Vec<Vec<Vec<VarId>>>,
    /// Satisfied demand `[k][v][p]`.
    pub qsat: Vec<Vec<Vec<VarId>>>,
    /// Supplier inventory `[i][v][p]`.
    pub inv: Vec<Vec<Vec<VarId>>>,
    /// Distribution center inventory `[j][v][p]`.
    pub invd: Vec<Vec<Vec<VarId>>>,
    /// Demand aggregated per distribution center `[j][v][p]`.
    pub dc_demand: Vec<Vec<Vec<VarId>>>,
    /// Satisfied demand aggregated per distribution center `[j][v][p]`.
    pub dc_satisfied: Vec<Vec<Vec<VarId>>>,
    /// Supplier to distribution center shipment indicator `[i][j][p]`.
    pub yb: Vec<Vec<Vec<VarId>>>,
    /// Distribution center to vaccination center shipment indicator `[j][k][p]`.
    pub wb: Vec<Vec<Vec<VarId>>>,
    /// Max-order rows `[i][v][p]`.
    pub max_order_rows: Vec<Vec<Vec<RowId>>>,
    /// Budget rows `[i]`.
    pub budget_rows: Vec<RowId>,
    pub robust: Option<RobustDuals>,
}

impl VariableIndex {
    /// Every mapped variable id, each exactly once.
    pub fn all_ids(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        out.extend(self.x.iter().flatten().flatten());
        out.extend(self.y.iter().flatten().flatten().flatten());
        out.extend(self.w.iter().flatten().flatten().flatten());
        out.extend(self.u.iter().flatten());
        for group in [
            &self.back,
            &self.q,
            &self.qsat,
            &self.inv,
            &self.invd,
            &self.dc_demand,
            &self.dc_satisfied,
            &self.yb,
            &self.wb,
        ] {
            out.extend(group.iter().flatten().flatten());
        }
        if let Some(r) = &self.robust {
            out.extend(r.r1.iter().flatten().flatten());
            out.extend(r.h1.iter().flatten().flatten());
            out.extend(&r.r2);
            out.extend(&r.h2);
        }
        out
    }
}

fn grid3<F>(a: usize, b: usize, c: usize, mut f: F) -> Result<Vec<Vec<Vec<VarId>>>, LpError>
where
    F: FnMut(usize, usize, usize) -> Result<VarId, LpError>,
{
    (0..a)
        .map(|x| {
            (0..b)
                .map(|y| (0..c).map(|z| f(x, y, z)).collect())
                .collect()
        })
        .collect()
}

/// First and last zero-based order periods whose orders can leave supplier
/// `lead` periods later and are still within `shelf` periods at `p`.
/// `None` when the window is empty.
pub fn order_window(p: usize, shelf: usize, lead: usize) -> Option<(usize, usize)> {
    let hi = p.checked_sub(lead)?;
    let lo = p.saturating_sub(shelf);
    (lo <= hi).then_some((lo, hi))
}

/// Upper bounds on `q[k][v][p]` implied by the demand, backorder and
/// service rows: the backlog carried out of a period is at most `1 - ω` of
/// its demand, so `q_p <= d_p + (1 - ω_{p-1}) q_{p-1}`.
pub fn demand_caps(inst: &Instance) -> Vec<Vec<Vec<f64>>> {
    let d = inst.dimensions;
    (0..d.n_vcs)
        .map(|k| {
            (0..d.n_vaccines)
                .map(|v| {
                    let mut caps = Vec::with_capacity(d.n_periods);
                    let mut prev = 0.0;
                    for p in 0..d.n_periods {
                        let carried = if p > 0 {
                            (1.0 - inst.service_floor(k, v, p - 1)) * prev
                        } else {
                            0.0
                        };
                        prev = inst.demand.demand[k][v][p] as f64 + carried;
                        caps.push(prev);
                    }
                    caps
                })
                .collect()
        })
        .collect()
}

/// Builds the deterministic planning MILP.
///
/// The model minimizes `θ1·P1 + θ2·P2 + θ3·P3` subject to order limits,
/// budgets, supplier capacity, shelf-life windows, inventory balances,
/// backorder chaining, the service floor, pairwise equity between
/// distribution centers, age-group targeting and the shipment indicator
/// links. See the README for the full row catalogue.
pub fn build_deterministic(inst: &Instance) -> Result<(MilpModel, VariableIndex), BuildError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(BuildError::InvalidInstance(violations));
    }
    let d = inst.dimensions;
    let (ns, nj, nk, nv, na, nt) = (
        d.n_suppliers,
        d.n_dcs,
        d.n_vcs,
        d.n_vaccines,
        d.n_age_groups,
        d.n_periods,
    );
    let mut m = MilpModel::new("vaccine_supply_chain");

    let x = grid3(ns, nv, nt, |i, v, p| m.add_nonneg(format!("X[{i},{v},{p}]")))?;
    let y = (0..ns)
        .map(|i| grid3(nj, nv, nt, |j, v, p| m.add_nonneg(format!("Y[{i},{j},{v},{p}]"))))
        .collect::<Result<Vec<_>, _>>()?;
    let w = (0..nj)
        .map(|j| grid3(nk, nv, nt, |k, v, p| m.add_nonneg(format!("W[{j},{k},{v},{p}]"))))
        .collect::<Result<Vec<_>, _>>()?;
    let u = (0..na)
        .map(|a| {
            (0..nt)
                .map(|p| m.add_binary(format!("u[{a},{p}]")))
                .collect()
        })
        .collect::<Result<Vec<Vec<VarId>>, _>>()?;
    let back = grid3(nk, nv, nt, |k, v, p| m.add_nonneg(format!("back[{k},{v},{p}]")))?;
    let q = grid3(nk, nv, nt, |k, v, p| m.add_nonneg(format!("q[{k},{v},{p}]")))?;
    let qsat = grid3(nk, nv, nt, |k, v, p| m.add_nonneg(format!("qsat[{k},{v},{p}]")))?;
    let inv = grid3(ns, nv, nt, |i, v, p| m.add_nonneg(format!("inv[{i},{v},{p}]")))?;
    let invd = grid3(nj, nv, nt, |j, v, p| m.add_nonneg(format!("invd[{j},{v},{p}]")))?;
    let dc_demand = grid3(nj, nv, nt, |j, v, p| m.add_nonneg(format!("Q[{j},{v},{p}]")))?;
    let dc_satisfied = grid3(nj, nv, nt, |j, v, p| m.add_nonneg(format!("Qsat[{j},{v},{p}]")))?;
    let yb = grid3(ns, nj, nt, |i, j, p| m.add_binary(format!("yb[{i},{j},{p}]")))?;
    let wb = grid3(nj, nk, nt, |j, k, p| m.add_binary(format!("wb[{j},{k},{p}]")))?;
    for id in yb.iter().chain(&wb).flatten().flatten() {
        m.set_branch_priority(*id, INDICATOR_PRIORITY)?;
    }

    // objective
    let [th1, th2, th3] = inst.weights.theta;
    for v in 0..nv {
        let h = inst.vaccines[v].holding_cost;
        for p in 0..nt {
            for i in 0..ns {
                m.add_objective_term(inv[i][v][p], th1 * h)?;
            }
            for j in 0..nj {
                m.add_objective_term(invd[j][v][p], th1 * h)?;
            }
        }
    }
    for p in 0..nt {
        for i in 0..ns {
            for j in 0..nj {
                m.add_objective_term(yb[i][j][p], th2 * inst.network.fixed_cost_s2d[i][j])?;
                for v in 0..nv {
                    m.add_objective_term(y[i][j][v][p], th2 * inst.network.var_cost_s2d[i][j][v])?;
                }
            }
        }
        for j in 0..nj {
            for k in 0..nk {
                m.add_objective_term(wb[j][k][p], th2 * inst.network.fixed_cost_d2v[j][k])?;
                for v in 0..nv {
                    m.add_objective_term(w[j][k][v][p], th2 * inst.network.var_cost_d2v[j][k][v])?;
                }
            }
        }
        let r = inst.deprivation_rate(p);
        for k in 0..nk {
            for v in 0..nv {
                m.add_objective_term(q[k][v][p], th3 * r)?;
                m.add_objective_term(qsat[k][v][p], -th3 * r)?;
            }
        }
    }

    // order limits
    let mut max_order_rows = Vec::with_capacity(ns);
    for i in 0..ns {
        let mut per_v = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut per_p = Vec::with_capacity(nt);
            for p in 0..nt {
                per_p.push(m.add_constraint(
                    format!("max_order[{i},{v},{p}]"),
                    [(x[i][v][p], 1.0)],
                    Sense::Le,
                    inst.suppliers[i].max_order[v] as f64,
                )?);
            }
            per_v.push(per_p);
        }
        max_order_rows.push(per_v);
    }

    // budgets
    let mut budget_rows = Vec::with_capacity(ns);
    for i in 0..ns {
        let terms = (0..nv).flat_map(|v| {
            let price = inst.suppliers[i].price[v];
            x[i][v].iter().map(move |&id| (id, price))
        });
        budget_rows.push(m.add_constraint(
            format!("budget[{i}]"),
            terms.collect::<Vec<_>>(),
            Sense::Le,
            inst.suppliers[i].budget,
        )?);
    }

    // cumulative supplier capacity
    for i in 0..ns {
        let mut terms: Vec<(VarId, f64)> = x[i].iter().flatten().map(|&id| (id, 1.0)).collect();
        terms.extend(y[i].iter().flatten().flatten().map(|&id| (id, -1.0)));
        m.add_constraint(
            format!("supplier_net[{i}]"),
            terms,
            Sense::Le,
            inst.suppliers[i].capacity as f64,
        )?;
    }

    // shelf-life window on shipments and supplier inventory balance
    for i in 0..ns {
        let lead = inst.suppliers[i].lead_time as usize;
        for v in 0..nv {
            let shelf = inst.vaccines[v].shelf_life as usize;
            for p in 0..nt {
                let window: Vec<VarId> = match order_window(p, shelf, lead) {
                    Some((lo, hi)) => x[i][v][lo..=hi].to_vec(),
                    None => Vec::new(),
                };
                for j in 0..nj {
                    let mut terms = vec![(y[i][j][v][p], 1.0)];
                    terms.extend(window.iter().map(|&id| (id, -1.0)));
                    m.add_constraint(format!("ship_window[{i},{j},{v},{p}]"), terms, Sense::Le, 0.0)?;
                }
                let mut terms = vec![(inv[i][v][p], 1.0)];
                terms.extend(window.iter().map(|&id| (id, -1.0)));
                for j in 0..nj {
                    terms.extend(y[i][j][v][..=p].iter().map(|&id| (id, 1.0)));
                }
                m.add_constraint(format!("supplier_inventory[{i},{v},{p}]"), terms, Sense::Eq, 0.0)?;
            }
        }
        for p in 0..nt {
            m.add_constraint(
                format!("supplier_capacity[{i},{p}]"),
                (0..nv).map(|v| (inv[i][v][p], 1.0)).collect::<Vec<_>>(),
                Sense::Le,
                inst.suppliers[i].capacity as f64,
            )?;
        }
    }

    // distribution center inventory balance and capacity
    for j in 0..nj {
        for v in 0..nv {
            let shelf = inst.vaccines[v].shelf_life as usize;
            for p in 0..nt {
                let lo = p.saturating_sub(shelf);
                let mut terms = vec![(invd[j][v][p], 1.0)];
                for i in 0..ns {
                    terms.extend(y[i][j][v][lo..=p].iter().map(|&id| (id, -1.0)));
                }
                for k in 0..nk {
                    terms.extend(w[j][k][v][lo..=p].iter().map(|&id| (id, 1.0)));
                }
                m.add_constraint(format!("dc_inventory[{j},{v},{p}]"), terms, Sense::Eq, 0.0)?;
            }
        }
        for p in 0..nt {
            m.add_constraint(
                format!("dc_capacity[{j},{p}]"),
                (0..nv).map(|v| (invd[j][v][p], 1.0)).collect::<Vec<_>>(),
                Sense::Le,
                inst.network.dc_capacity[j] as f64,
            )?;
        }
    }

    // demand, backorders, satisfied demand, service floor
    for k in 0..nk {
        for v in 0..nv {
            for p in 0..nt {
                let mut terms = vec![(q[k][v][p], 1.0)];
                if p > 0 {
                    terms.push((back[k][v][p - 1], -1.0));
                }
                m.add_constraint(
                    format!("demand[{k},{v},{p}]"),
                    terms,
                    Sense::Eq,
                    inst.demand.demand[k][v][p] as f64,
                )?;
                let delivered = (0..nj).map(|j| (w[j][k][v][p], 1.0));
                let mut terms = vec![(back[k][v][p], 1.0), (q[k][v][p], -1.0)];
                terms.extend(delivered.clone());
                m.add_constraint(format!("backorder[{k},{v},{p}]"), terms, Sense::Eq, 0.0)?;
                let mut terms = vec![(qsat[k][v][p], 1.0)];
                terms.extend(delivered.clone().map(|(id, c)| (id, -c)));
                m.add_constraint(format!("satisfied[{k},{v},{p}]"), terms, Sense::Eq, 0.0)?;
                let mut terms: Vec<(VarId, f64)> = delivered.collect();
                terms.push((q[k][v][p], -inst.service_floor(k, v, p)));
                m.add_constraint(format!("service[{k},{v},{p}]"), terms, Sense::Ge, 0.0)?;
            }
        }
    }

    // per distribution center aggregates
    let members = &inst.network.assignment;
    for j in 0..nj {
        for v in 0..nv {
            for p in 0..nt {
                let mut terms = vec![(dc_demand[j][v][p], 1.0)];
                terms.extend(members[j].iter().map(|&k| (q[k][v][p], -1.0)));
                m.add_constraint(format!("dc_demand[{j},{v},{p}]"), terms, Sense::Eq, 0.0)?;
                let mut terms = vec![(dc_satisfied[j][v][p], 1.0)];
                terms.extend(members[j].iter().map(|&k| (qsat[k][v][p], -1.0)));
                m.add_constraint(format!("dc_satisfied[{j},{v},{p}]"), terms, Sense::Eq, 0.0)?;
            }
        }
    }

    // pairwise equity; one row per ordered pair covers both signs of the gap
    let population: Vec<f64> = (0..nj).map(|j| inst.population(j)).collect();
    for j in 0..nj {
        for j2 in 0..nj {
            if j == j2 {
                continue;
            }
            for v in 0..nv {
                for p in 0..nt {
                    m.add_constraint(
                        format!("equity[{j},{j2},{v},{p}]"),
                        [
                            (dc_satisfied[j][v][p], 1.0 / population[j]),
                            (dc_satisfied[j2][v][p], -1.0 / population[j2]),
                        ],
                        Sense::Le,
                        inst.demand.equity_tolerance,
                    )?;
                }
            }
        }
    }

    // age-group targeting and priority of older groups
    for j in 0..nj {
        for p in 0..nt {
            let mut terms: Vec<(VarId, f64)> = members[j]
                .iter()
                .flat_map(|&k| (0..nv).map(move |v| (k, v)))
                .map(|(k, v)| (q[k][v][p], 1.0))
                .collect();
            terms.extend((0..na).map(|a| (u[a][p], -(inst.demand.age_demand[a][j] as f64))));
            m.add_constraint(format!("age_target[{j},{p}]"), terms, Sense::Le, 0.0)?;
        }
    }
    for a in 0..na.saturating_sub(1) {
        for p in 0..nt {
            m.add_constraint(
                format!("age_priority[{a},{p}]"),
                [(u[a + 1][p], 1.0), (u[a][p], -1.0)],
                Sense::Le,
                0.0,
            )?;
        }
    }

    // shipment indicators; each big-M is the smallest of the horizon demand
    // and two bounds the other rows already imply on the shipment
    let horizon = inst.total_demand();
    for i in 0..ns {
        let lead = inst.suppliers[i].lead_time as usize;
        for j in 0..nj {
            for v in 0..nv {
                let shelf = inst.vaccines[v].shelf_life as usize;
                for p in 0..nt {
                    let orderable = order_window(p, shelf, lead)
                        .map_or(0.0, |(lo, hi)| (hi - lo + 1) as f64)
                        * inst.suppliers[i].max_order[v] as f64;
                    let storable = inst.network.dc_capacity[j] as f64
                        + (0..nk).map(|k| inst.cumulative_demand(k, v, p)).sum::<f64>();
                    let big_m_y = horizon.min(orderable).min(storable);
                    m.add_constraint(
                        format!("link_y[{i},{j},{v},{p}]"),
                        [(y[i][j][v][p], 1.0), (yb[i][j][p], -big_m_y)],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }
    }
    let q_cap = demand_caps(inst);
    for j in 0..nj {
        for k in 0..nk {
            for v in 0..nv {
                for p in 0..nt {
                    let big_m_w = q_cap[k][v][p];
                    m.add_constraint(
                        format!("link_w[{j},{k},{v},{p}]"),
                        [(w[j][k][v][p], 1.0), (wb[j][k][p], -big_m_w)],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }
    }

    let index = VariableIndex {
        x,
        y,
        w,
        u,
        back,
        q,
        qsat,
        inv,
        invd,
        dc_demand,
        dc_satisfied,
        yb,
        wb,
        max_order_rows,
        budget_rows,
        robust: None,
    };
    Ok((m, index))
}

/// Objective split into its weighted parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Components {
    /// Holding cost.
    pub p1: f64,
    /// Transportation cost, fixed plus variable.
    pub p2: f64,
    /// Deprivation cost.
    pub p3: f64,
    /// `θ1·P1 + θ2·P2 + θ3·P3`.
    pub z: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("assignment has {got} values but the index refers to variable {needed}")]
pub struct MissingValues {
    pub got: usize,
    pub needed: usize,
}

/// Computes P1, P2, P3 and Z from an assignment indexed by variable id.
pub fn objective_components(
    inst: &Instance,
    index: &VariableIndex,
    values: &[f64],
) -> Result<Components, MissingValues> {
    let needed = index.all_ids().into_iter().map(|v| v.0).max().unwrap_or(0);
    if values.len() <= needed {
        return Err(MissingValues {
            got: values.len(),
            needed,
        });
    }
    let val = |id: VarId| values[id.0];
    let d = inst.dimensions;
    let mut p1 = 0.0;
    let mut p2 = 0.0;
    let mut p3 = 0.0;
    for v in 0..d.n_vaccines {
        let h = inst.vaccines[v].holding_cost;
        for p in 0..d.n_periods {
            for i in 0..d.n_suppliers {
                p1 += h * val(index.inv[i][v][p]);
            }
            for j in 0..d.n_dcs {
                p1 += h * val(index.invd[j][v][p]);
            }
        }
    }
    for p in 0..d.n_periods {
        for i in 0..d.n_suppliers {
            for j in 0..d.n_dcs {
                p2 += inst.network.fixed_cost_s2d[i][j] * val(index.yb[i][j][p]);
                for v in 0..d.n_vaccines {
                    p2 += inst.network.var_cost_s2d[i][j][v] * val(index.y[i][j][v][p]);
                }
            }
        }
        for j in 0..d.n_dcs {
            for k in 0..d.n_vcs {
                p2 += inst.network.fixed_cost_d2v[j][k] * val(index.wb[j][k][p]);
                for v in 0..d.n_vaccines {
                    p2 += inst.network.var_cost_d2v[j][k][v] * val(index.w[j][k][v][p]);
                }
            }
        }
        let r = inst.deprivation_rate(p);
        for k in 0..d.n_vcs {
            for v in 0..d.n_vaccines {
                p3 += r * (val(index.q[k][v][p]) - val(index.qsat[k][v][p]));
            }
        }
    }
    let [th1, th2, th3] = inst.weights.theta;
    Ok(Components {
        p1,
        p2,
        p3,
        z: th1 * p1 + th2 * p2 + th3 * p3,
    })
}

#[cfg(test)]
mod tests;
