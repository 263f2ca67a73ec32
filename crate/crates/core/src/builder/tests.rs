use super::*;
use crate::model_data::{generate_instance, Dimensions, SizeSpec};

fn small() -> Instance {
    let dims = Dimensions {
        n_suppliers: 2,
        n_dcs: 1,
        n_vcs: 2,
        n_vaccines: 1,
        n_age_groups: 2,
        n_periods: 4,
    };
    generate_instance(SizeSpec::Explicit(dims), 3).unwrap()
}

#[test]
fn window_bounds() {
    assert_eq!(order_window(0, 3, 1), None);
    assert_eq!(order_window(1, 3, 1), Some((0, 0)));
    assert_eq!(order_window(5, 2, 1), Some((3, 4)));
    assert_eq!(order_window(4, 0, 0), Some((4, 4)));
    assert_eq!(order_window(4, 1, 2), None);
}

#[test]
fn demand_caps_follow_backlog_recursion() {
    let inst = small();
    let caps = demand_caps(&inst);
    let omega = inst.demand.service_floor;
    for (k, per_v) in caps.iter().enumerate() {
        let d = &inst.demand.demand[k][0];
        let mut expect = 0.0;
        for p in 0..d.len() {
            expect = d[p] as f64 + (1.0 - omega) * expect;
            assert!((per_v[0][p] - expect).abs() < 1e-9);
        }
    }
}

#[test]
fn row_names_are_unique_and_indexed() {
    let inst = small();
    let (model, index) = build_deterministic(&inst).unwrap();
    assert_eq!(model.var_by_name("X[0,0,1]"), Some(index.x[0][0][1]));
    assert_eq!(model.row_by_name("budget[1]"), Some(index.budget_rows[1]));
    let row = model.row(index.max_order_rows[1][0][2]);
    assert_eq!(row.rhs, inst.suppliers[1].max_order[0] as f64);
    assert!(index.robust.is_none());
}

#[test]
fn indicators_branch_first() {
    let inst = small();
    let (model, index) = build_deterministic(&inst).unwrap();
    let yb = index.yb[0][0][0];
    let u = index.u[0][0];
    assert!(model.branch_priority(yb) > model.branch_priority(u));
}
