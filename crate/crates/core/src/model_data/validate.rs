use std::fmt;

use serde::Serialize;

use super::Instance;

/// One broken invariant, naming the offending field and index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn nonneg(&mut self, field: String, value: f64) {
        if !value.is_finite() || value < 0.0 {
            self.push(field, format!("must be a finite value >= 0, got {value}"));
        }
    }

    fn len(&mut self, field: &str, got: usize, want: usize) -> bool {
        if got != want {
            self.push(field, format!("expected {want} entries, got {got}"));
            false
        } else {
            true
        }
    }

    fn fraction(&mut self, field: String, value: f64) {
        if !(0.0..=1.0).contains(&value) {
            self.push(field, format!("must lie in [0, 1], got {value}"));
        }
    }
}

/// Lists every invariant the instance breaks. An empty list means the
/// instance is well formed.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut c = Collector(Vec::new());
    let d = inst.dimensions;
    for (name, n) in [
        ("n_suppliers", d.n_suppliers),
        ("n_dcs", d.n_dcs),
        ("n_vcs", d.n_vcs),
        ("n_vaccines", d.n_vaccines),
        ("n_age_groups", d.n_age_groups),
        ("n_periods", d.n_periods),
    ] {
        if n == 0 {
            c.push(format!("dimensions.{name}"), "must be at least 1");
        }
    }
    let (ns, nj, nk, nv, na, nt) = (
        d.n_suppliers,
        d.n_dcs,
        d.n_vcs,
        d.n_vaccines,
        d.n_age_groups,
        d.n_periods,
    );

    if c.len("suppliers", inst.suppliers.len(), ns) {
        for (i, s) in inst.suppliers.iter().enumerate() {
            if s.lead_time < 0 || s.lead_time as usize >= nt.max(1) {
                c.push(
                    format!("suppliers[{i}].lead_time"),
                    format!("must lie in [0, {}), got {}", nt, s.lead_time),
                );
            }
            c.nonneg(format!("suppliers[{i}].budget"), s.budget);
            c.nonneg(format!("suppliers[{i}].capacity"), s.capacity as f64);
            if c.len(&format!("suppliers[{i}].max_order"), s.max_order.len(), nv) {
                for (v, &m) in s.max_order.iter().enumerate() {
                    c.nonneg(format!("suppliers[{i}].max_order[{v}]"), m as f64);
                }
            }
            if c.len(&format!("suppliers[{i}].price"), s.price.len(), nv) {
                for (v, &p) in s.price.iter().enumerate() {
                    c.nonneg(format!("suppliers[{i}].price[{v}]"), p);
                }
            }
        }
    }

    let net = &inst.network;
    if c.len("network.dc_capacity", net.dc_capacity.len(), nj) {
        for (j, &cap) in net.dc_capacity.iter().enumerate() {
            c.nonneg(format!("network.dc_capacity[{j}]"), cap as f64);
        }
    }
    if c.len("network.var_cost_s2d", net.var_cost_s2d.len(), ns) {
        for (i, per_j) in net.var_cost_s2d.iter().enumerate() {
            if c.len(&format!("network.var_cost_s2d[{i}]"), per_j.len(), nj) {
                for (j, per_v) in per_j.iter().enumerate() {
                    if c.len(&format!("network.var_cost_s2d[{i}][{j}]"), per_v.len(), nv) {
                        for (v, &x) in per_v.iter().enumerate() {
                            c.nonneg(format!("network.var_cost_s2d[{i}][{j}][{v}]"), x);
                        }
                    }
                }
            }
        }
    }
    if c.len("network.fixed_cost_s2d", net.fixed_cost_s2d.len(), ns) {
        for (i, per_j) in net.fixed_cost_s2d.iter().enumerate() {
            if c.len(&format!("network.fixed_cost_s2d[{i}]"), per_j.len(), nj) {
                for (j, &x) in per_j.iter().enumerate() {
                    c.nonneg(format!("network.fixed_cost_s2d[{i}][{j}]"), x);
                }
            }
        }
    }
    if c.len("network.var_cost_d2v", net.var_cost_d2v.len(), nj) {
        for (j, per_k) in net.var_cost_d2v.iter().enumerate() {
            if c.len(&format!("network.var_cost_d2v[{j}]"), per_k.len(), nk) {
                for (k, per_v) in per_k.iter().enumerate() {
                    if c.len(&format!("network.var_cost_d2v[{j}][{k}]"), per_v.len(), nv) {
                        for (v, &x) in per_v.iter().enumerate() {
                            c.nonneg(format!("network.var_cost_d2v[{j}][{k}][{v}]"), x);
                        }
                    }
                }
            }
        }
    }
    if c.len("network.fixed_cost_d2v", net.fixed_cost_d2v.len(), nj) {
        for (j, per_k) in net.fixed_cost_d2v.iter().enumerate() {
            if c.len(&format!("network.fixed_cost_d2v[{j}]"), per_k.len(), nk) {
                for (k, &x) in per_k.iter().enumerate() {
                    c.nonneg(format!("network.fixed_cost_d2v[{j}][{k}]"), x);
                }
            }
        }
    }
    if c.len("network.assignment", net.assignment.len(), nj) {
        let mut owner: Vec<Option<usize>> = vec![None; nk];
        for (j, members) in net.assignment.iter().enumerate() {
            for &k in members {
                if k >= nk {
                    c.push(
                        format!("network.assignment[{j}]"),
                        format!("vaccination center {k} out of range"),
                    );
                } else if let Some(prev) = owner[k] {
                    c.push(
                        format!("network.assignment[{j}]"),
                        format!("vaccination center {k} already assigned to dc {prev}"),
                    );
                } else {
                    owner[k] = Some(j);
                }
            }
        }
        for (k, o) in owner.iter().enumerate() {
            if o.is_none() {
                c.push(
                    "network.assignment",
                    format!("vaccination center {k} is not assigned to any dc"),
                );
            }
        }
    }

    if c.len("vaccines", inst.vaccines.len(), nv) {
        for (v, vac) in inst.vaccines.iter().enumerate() {
            c.nonneg(format!("vaccines[{v}].holding_cost"), vac.holding_cost);
            if vac.shelf_life < 1 || vac.shelf_life as usize > nt {
                c.push(
                    format!("vaccines[{v}].shelf_life"),
                    format!("must lie in [1, {nt}], got {}", vac.shelf_life),
                );
            }
        }
    }

    let dem = &inst.demand;
    if c.len("demand.demand", dem.demand.len(), nk) {
        for (k, per_v) in dem.demand.iter().enumerate() {
            if c.len(&format!("demand.demand[{k}]"), per_v.len(), nv) {
                for (v, per_t) in per_v.iter().enumerate() {
                    if c.len(&format!("demand.demand[{k}][{v}]"), per_t.len(), nt) {
                        for (p, &x) in per_t.iter().enumerate() {
                            c.nonneg(format!("demand.demand[{k}][{v}][{p}]"), x as f64);
                        }
                    }
                }
            }
        }
    }
    if c.len("demand.age_demand", dem.age_demand.len(), na) {
        let mut shapes_ok = true;
        for (a, per_j) in dem.age_demand.iter().enumerate() {
            if c.len(&format!("demand.age_demand[{a}]"), per_j.len(), nj) {
                for (j, &x) in per_j.iter().enumerate() {
                    c.nonneg(format!("demand.age_demand[{a}][{j}]"), x as f64);
                }
            } else {
                shapes_ok = false;
            }
        }
        if shapes_ok {
            for j in 0..nj {
                if inst.population(j) <= 0.0 {
                    c.push("demand.age_demand", format!("zero total demand at dc {j}"));
                }
            }
        }
    }
    c.fraction("demand.service_floor".into(), dem.service_floor);
    if let Some(o) = &dem.service_floor_override {
        if c.len("demand.service_floor_override", o.len(), nk) {
            for (k, per_v) in o.iter().enumerate() {
                if c.len(&format!("demand.service_floor_override[{k}]"), per_v.len(), nv) {
                    for (v, per_t) in per_v.iter().enumerate() {
                        if c.len(
                            &format!("demand.service_floor_override[{k}][{v}]"),
                            per_t.len(),
                            nt,
                        ) {
                            for (p, &x) in per_t.iter().enumerate() {
                                c.fraction(
                                    format!("demand.service_floor_override[{k}][{v}][{p}]"),
                                    x,
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    c.fraction("demand.equity_tolerance".into(), dem.equity_tolerance);

    let w = &inst.weights;
    for (f, &theta) in w.theta.iter().enumerate() {
        c.nonneg(format!("weights.theta[{f}]"), theta);
    }
    let sum: f64 = w.theta.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        c.push("weights.theta", format!("weights sum {sum} ≠ 1"));
    }
    c.nonneg("weights.deprivation_slope".into(), w.deprivation_slope);

    if let Some(r) = &inst.robust {
        for msg in r.violations(ns, nv) {
            c.push("robust", msg);
        }
    }
    c.0
}
