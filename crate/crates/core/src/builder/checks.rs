use serde::Serialize;

use super::{order_window, VariableIndex};
use crate::model_data::Instance;

/// A planning rule broken by an assignment, named by rule and index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureViolation {
    pub rule: &'static str,
    pub at: String,
    pub amount: f64,
}

struct Sink {
    tol: f64,
    out: Vec<StructureViolation>,
}

impl Sink {
    /// Records a violation when `excess` exceeds the scaled tolerance.
    fn check(&mut self, rule: &'static str, at: impl FnOnce() -> String, excess: f64, scale: f64) {
        if excess > self.tol * scale.abs().max(1.0) {
            self.out.push(StructureViolation {
                rule,
                at: at(),
                amount: excess,
            });
        }
    }
}

/// Checks an assignment against the planning rules directly, without going
/// through the row list: equity gaps, older-first age priority, service
/// floors, backorder chaining, inventory balances and capacities.
pub fn structure_violations(
    inst: &Instance,
    index: &VariableIndex,
    values: &[f64],
    tol: f64,
) -> Vec<StructureViolation> {
    let val = |id: crate::lp::VarId| values[id.0];
    let d = inst.dimensions;
    let (ns, nj, nk, nv, na, nt) = (
        d.n_suppliers,
        d.n_dcs,
        d.n_vcs,
        d.n_vaccines,
        d.n_age_groups,
        d.n_periods,
    );
    let mut s = Sink {
        tol,
        out: Vec::new(),
    };

    for k in 0..nk {
        for v in 0..nv {
            for p in 0..nt {
                let delivered: f64 = (0..nj).map(|j| val(index.w[j][k][v][p])).sum();
                let q = val(index.q[k][v][p]);
                let carried = if p > 0 { val(index.back[k][v][p - 1]) } else { 0.0 };
                let d_kvp = inst.demand.demand[k][v][p] as f64;
                s.check(
                    "backorder_chain",
                    || format!("k={k} v={v} p={p}"),
                    (q - d_kvp - carried).abs(),
                    q,
                );
                s.check(
                    "backorder_balance",
                    || format!("k={k} v={v} p={p}"),
                    (val(index.back[k][v][p]) - (q - delivered)).abs(),
                    q,
                );
                s.check(
                    "service_floor",
                    || format!("k={k} v={v} p={p}"),
                    inst.service_floor(k, v, p) * q - delivered,
                    q,
                );
            }
        }
    }

    for j in 0..nj {
        for j2 in (j + 1)..nj {
            for v in 0..nv {
                for p in 0..nt {
                    let share = |jj: usize| {
                        inst.network.assignment[jj]
                            .iter()
                            .map(|&k| val(index.qsat[k][v][p]))
                            .sum::<f64>()
                            / inst.population(jj)
                    };
                    let gap = (share(j) - share(j2)).abs();
                    s.check(
                        "equity",
                        || format!("j={j} j'={j2} v={v} p={p}"),
                        gap - inst.demand.equity_tolerance,
                        1.0,
                    );
                }
            }
        }
    }

    for p in 0..nt {
        for a in 0..na {
            let u = val(index.u[a][p]);
            s.check(
                "integrality",
                || format!("u a={a} p={p}"),
                (u - u.round()).abs(),
                1.0,
            );
            if a + 1 < na {
                s.check(
                    "age_priority",
                    || format!("a={} p={p}", a + 1),
                    val(index.u[a + 1][p]) - u,
                    1.0,
                );
            }
        }
    }

    for i in 0..ns {
        let lead = inst.suppliers[i].lead_time as usize;
        for v in 0..nv {
            let shelf = inst.vaccines[v].shelf_life as usize;
            for p in 0..nt {
                let arrived: f64 = order_window(p, shelf, lead)
                    .map(|(lo, hi)| (lo..=hi).map(|pp| val(index.x[i][v][pp])).sum())
                    .unwrap_or(0.0);
                let shipped: f64 = (0..nj)
                    .flat_map(|j| (0..=p).map(move |pp| (j, pp)))
                    .map(|(j, pp)| val(index.y[i][j][v][pp]))
                    .sum();
                let inv = val(index.inv[i][v][p]);
                s.check(
                    "supplier_inventory",
                    || format!("i={i} v={v} p={p}"),
                    (inv - (arrived - shipped)).abs(),
                    arrived.max(shipped),
                );
                s.check("nonnegative", || format!("inv i={i} v={v} p={p}"), -inv, 1.0);
            }
        }
        for p in 0..nt {
            let held: f64 = (0..nv).map(|v| val(index.inv[i][v][p])).sum();
            let cap = inst.suppliers[i].capacity as f64;
            s.check("supplier_capacity", || format!("i={i} p={p}"), held - cap, cap);
        }
    }

    for j in 0..nj {
        for v in 0..nv {
            let shelf = inst.vaccines[v].shelf_life as usize;
            for p in 0..nt {
                let lo = p.saturating_sub(shelf);
                let inflow: f64 = (0..ns)
                    .flat_map(|i| (lo..=p).map(move |pp| (i, pp)))
                    .map(|(i, pp)| val(index.y[i][j][v][pp]))
                    .sum();
                let outflow: f64 = (0..nk)
                    .flat_map(|k| (lo..=p).map(move |pp| (k, pp)))
                    .map(|(k, pp)| val(index.w[j][k][v][pp]))
                    .sum();
                let invd = val(index.invd[j][v][p]);
                s.check(
                    "dc_inventory",
                    || format!("j={j} v={v} p={p}"),
                    (invd - (inflow - outflow)).abs(),
                    inflow.max(outflow),
                );
                s.check("nonnegative", || format!("invd j={j} v={v} p={p}"), -invd, 1.0);
            }
        }
        for p in 0..nt {
            let held: f64 = (0..nv).map(|v| val(index.invd[j][v][p])).sum();
            let cap = inst.network.dc_capacity[j] as f64;
            s.check("dc_capacity", || format!("j={j} p={p}"), held - cap, cap);
        }
    }
    s.out
}
