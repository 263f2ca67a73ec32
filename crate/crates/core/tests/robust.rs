mod common;

use coldchain::builder::build_deterministic;
use coldchain::lp::{MilpModel, RowId, Sense, VarId, VarKind};
use coldchain::robust::{
    build_robust, robustify_objective, robustify_row, RhsUncertainty, RobustConfig, RobustError,
    UncertainEntry, UncertainRowSpec,
};
use coldchain::solver::{solve_lp, solve_milp, SolveOptions, SolveStatus};
use common::{close, exact, tiny_instance};
use proptest::prelude::*;

/// `max x` subject to the single row `a x <= b`, with `x` in `[lower, 100]`.
fn one_row(a: f64, b: f64, sense: Sense, lower: f64, maximize: bool) -> (MilpModel, VarId, RowId) {
    let mut m = MilpModel::new("one");
    let x = m.add_variable("x", lower, 100.0, VarKind::Continuous).unwrap();
    m.set_objective_coefficient(x, if maximize { -1.0 } else { 1.0 }).unwrap();
    let r = m.add_constraint("r", [(x, a)], sense, b).unwrap();
    (m, x, r)
}

fn optimum_x(m: &MilpModel, x: VarId) -> f64 {
    let s = solve_lp(m, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    s.value(x)
}

fn rhs_spec(row: RowId, gamma: f64, nominal: f64, deviation: f64) -> UncertainRowSpec {
    UncertainRowSpec {
        row,
        entries: Vec::new(),
        gamma,
        rhs: Some(RhsUncertainty { nominal, deviation }),
    }
}

#[test]
fn rhs_budget_shifts_the_limit() {
    for (gamma, expected) in [(0.0, 10.0), (0.5, 9.0), (1.0, 8.0)] {
        let (mut m, x, r) = one_row(1.0, 10.0, Sense::Le, 0.0, true);
        let vars = robustify_row(&mut m, &rhs_spec(r, gamma, 10.0, 2.0)).unwrap();
        assert!(vars.p_rhs.is_some());
        assert!(close(optimum_x(&m, x), expected, 1e-9), "gamma {gamma}");
    }
}

#[test]
fn coefficient_budget_shrinks_the_feasible_range() {
    for (gamma, expected) in [(0.0, 10.0), (0.5, 5.0), (1.0, 10.0 / 3.0)] {
        let (mut m, x, r) = one_row(1.0, 10.0, Sense::Le, 0.0, true);
        let spec = UncertainRowSpec {
            row: r,
            entries: vec![UncertainEntry { var: x, nominal: 1.0, deviation: 2.0 }],
            gamma,
            rhs: None,
        };
        let vars = robustify_row(&mut m, &spec).unwrap();
        assert_eq!(vars.y, vec![x]);
        assert!(close(optimum_x(&m, x), expected, 1e-9), "gamma {gamma}");
    }
}

#[test]
fn free_variable_gets_absolute_value_carrier() {
    // -x <= 3 with coefficient -1 +- 1: worst case 2|x| <= 3 for x < 0
    let (mut m, x, r) = one_row(-1.0, 3.0, Sense::Le, -5.0, false);
    let spec = UncertainRowSpec {
        row: r,
        entries: vec![UncertainEntry { var: x, nominal: -1.0, deviation: 1.0 }],
        gamma: 1.0,
        rhs: None,
    };
    let vars = robustify_row(&mut m, &spec).unwrap();
    assert_ne!(vars.y[0], x);
    assert!(close(optimum_x(&m, x), -1.5, 1e-9));
}

#[test]
fn greater_equal_row_protects_from_below() {
    let (mut m, x, r) = one_row(1.0, 3.0, Sense::Ge, 0.0, false);
    robustify_row(&mut m, &rhs_spec(r, 1.0, 3.0, 1.0)).unwrap();
    assert!(close(optimum_x(&m, x), 4.0, 1e-9));
}

#[test]
fn row_errors() {
    let (mut m, x, r) = one_row(1.0, 10.0, Sense::Le, 0.0, true);
    assert!(matches!(
        robustify_row(&mut m, &rhs_spec(RowId(9), 1.0, 10.0, 1.0)),
        Err(RobustError::UnknownRow(9))
    ));
    assert!(matches!(
        robustify_row(&mut m, &rhs_spec(r, 2.0, 10.0, 1.0)),
        Err(RobustError::GammaOutOfRange { .. })
    ));
    assert!(matches!(
        robustify_row(&mut m, &rhs_spec(r, 1.0, 10.0, -1.0)),
        Err(RobustError::BadDeviation(_))
    ));
    let eq = m.add_constraint("eq", [(x, 1.0)], Sense::Eq, 1.0).unwrap();
    assert!(matches!(
        robustify_row(&mut m, &rhs_spec(eq, 1.0, 1.0, 0.5)),
        Err(RobustError::EqualityRow(_))
    ));
}

#[test]
fn objective_uncertainty() {
    for (gamma, expected) in [(0.0, 3.0), (1.0, 6.0)] {
        let (mut m, x, _) = one_row(1.0, 3.0, Sense::Ge, 0.0, false);
        assert!(robustify_objective(&mut m, &[(x, 1.0)], gamma).unwrap().is_some());
        let s = solve_lp(&m, &SolveOptions::default()).unwrap();
        assert!(close(s.objective, expected, 1e-9), "gamma {gamma}: {}", s.objective);
    }
}

#[test]
fn objective_without_entries_is_unchanged() {
    let (mut m, _, _) = one_row(1.0, 3.0, Sense::Ge, 0.0, false);
    let before = (m.num_vars(), m.num_rows(), m.objective().to_vec());
    assert_eq!(robustify_objective(&mut m, &[], 1.0).unwrap(), None);
    assert_eq!(before, (m.num_vars(), m.num_rows(), m.objective().to_vec()));
}

fn milp_z(m: &MilpModel) -> f64 {
    let s = solve_milp(m, &exact()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    s.objective
}

#[test]
fn zero_budget_recovers_nominal() {
    let inst = tiny_instance(1, 4);
    let (det, _) = build_deterministic(&inst).unwrap();
    let rob = build_robust(&inst, &RobustConfig::new(0.0, 0.1)).unwrap();
    assert!(close(milp_z(&det), milp_z(&rob.model), 1e-6));
    let rob = build_robust(&inst, &RobustConfig::new(1.0, 0.0)).unwrap();
    assert!(close(milp_z(&det), milp_z(&rob.model), 1e-6));
}

#[test]
fn full_budget_matches_shrunk_nominals() {
    let inst = tiny_instance(2, 9);
    let rob = build_robust(&inst, &RobustConfig::new(1.0, 0.1)).unwrap();
    let shrunk = inst.with_budget_factor(0.9).with_max_order_factor(0.9);
    let (det, _) = build_deterministic(&shrunk).unwrap();
    assert!(close(milp_z(&det), milp_z(&rob.model), 1e-6));
}

#[test]
fn gamma_above_one_is_clamped_with_warning() {
    let inst = tiny_instance(1, 2);
    let clamped = build_robust(&inst, &RobustConfig::new(2.5, 0.1)).unwrap();
    assert_eq!(clamped.warnings.len(), 1);
    assert!(clamped.warnings[0].contains("2.5"));
    let one = build_robust(&inst, &RobustConfig::new(1.0, 0.1)).unwrap();
    assert!(one.warnings.is_empty());
    assert!(close(milp_z(&clamped.model), milp_z(&one.model), 1e-9));
}

#[test]
fn robust_duals_are_indexed() {
    let inst = tiny_instance(2, 1);
    let d = inst.dimensions;
    let rob = build_robust(&inst, &RobustConfig::new(0.5, 0.1)).unwrap();
    let duals = rob.index.robust.as_ref().unwrap();
    assert_eq!(duals.r1.len(), d.n_suppliers);
    assert_eq!(duals.h1[0].len(), d.n_vaccines);
    assert_eq!(duals.h1[0][0].len(), d.n_periods);
    assert_eq!(duals.r2.len(), d.n_suppliers);
    assert_eq!(duals.h2.len(), d.n_suppliers);
    let (det, _) = build_deterministic(&inst).unwrap();
    let protected_rows = d.n_suppliers * d.n_vaccines * d.n_periods + d.n_suppliers;
    assert_eq!(rob.model.num_vars(), det.num_vars() + 2 * protected_rows);
    assert_eq!(rob.model.num_rows(), det.num_rows() + protected_rows);
}

#[test]
fn invalid_config_rejected() {
    let inst = tiny_instance(1, 0);
    let mut cfg = RobustConfig::new(0.5, -0.1);
    assert!(matches!(build_robust(&inst, &cfg), Err(RobustError::InvalidConfig(_))));
    cfg.deviation_fraction = 0.1;
    cfg.budget_deviation = Some(vec![1.0, 2.0]);
    assert!(matches!(build_robust(&inst, &cfg), Err(RobustError::InvalidConfig(_))));
}

#[test]
fn explicit_deviations_override_fraction() {
    let inst = tiny_instance(1, 3);
    let mut cfg = RobustConfig::new(1.0, 0.5);
    cfg.maxorder_deviation = Some(vec![vec![0.0]]);
    cfg.budget_deviation = Some(vec![0.0]);
    let rob = build_robust(&inst, &cfg).unwrap();
    let (det, _) = build_deterministic(&inst).unwrap();
    assert!(close(milp_z(&det), milp_z(&rob.model), 1e-6));
}

#[test]
fn config_rejects_unknown_fields() {
    let err = serde_json::from_str::<RobustConfig>(r#"{"gamma": 1.0, "gama": 2}"#);
    assert!(err.is_err());
    let cfg: RobustConfig = serde_json::from_str(r#"{"gamma": 0.5}"#).unwrap();
    assert_eq!(cfg, RobustConfig::new(0.5, 0.1));
}

proptest! {
    #[test]
    fn rhs_protection_is_linear_in_gamma(b in 1.0f64..100.0, frac in 0.0f64..0.9, gamma in 0.0f64..=1.0) {
        let dev = frac * b;
        let (mut m, x, r) = one_row(1.0, b, Sense::Le, 0.0, true);
        robustify_row(&mut m, &rhs_spec(r, gamma, b, dev)).unwrap();
        prop_assert!(close(optimum_x(&m, x), b - gamma * dev, 1e-7));
    }

    #[test]
    fn coefficient_protection_matches_worst_case(a in 0.5f64..5.0, dev in 0.0f64..5.0, gamma in 0.0f64..=1.0) {
        let (mut m, x, r) = one_row(a, 10.0, Sense::Le, 0.0, true);
        let spec = UncertainRowSpec {
            row: r,
            entries: vec![UncertainEntry { var: x, nominal: a, deviation: dev }],
            gamma,
            rhs: None,
        };
        robustify_row(&mut m, &spec).unwrap();
        prop_assert!(close(optimum_x(&m, x), 10.0 / (a + gamma * dev), 1e-7));
    }
}
