use super::*;
use engine::geometric_scaling;

#[test]
fn gap_is_relative_and_clamped() {
    assert_eq!(relative_gap(f64::INFINITY, 0.0), f64::INFINITY);
    assert_eq!(relative_gap(10.0, 12.0), 0.0);
    assert!((relative_gap(200.0, 150.0) - 0.25).abs() < 1e-15);
    assert!((relative_gap(0.5, 0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn scaling_uses_powers_of_two_and_spares_binaries() {
    let mut m = MilpModel::new("s");
    let x = m.add_nonneg("x").unwrap();
    let u = m.add_binary("u").unwrap();
    m.add_constraint("budget", [(x, 17.0)], Sense::Le, 3e8).unwrap();
    m.add_constraint("link", [(x, 1.0), (u, -5e4)], Sense::Le, 0.0).unwrap();
    let (rows, cols) = geometric_scaling(&m);
    assert_eq!(cols[u.0], 1.0);
    for f in rows.iter().chain(&cols) {
        assert_eq!(f.log2().fract(), 0.0, "{f}");
    }
}

#[test]
fn status_strings() {
    assert_eq!(SolveStatus::FeasibleGap.to_string(), "feasible-gap");
    assert_eq!(SolveStatus::LimitHit.to_string(), "limit-hit");
    assert!(!SolveStatus::LimitHit.has_solution());
    assert!(SolveStatus::FeasibleGap.has_solution());
}

#[test]
fn node_log_format() {
    let line = NodeLog {
        node: 3,
        depth: 2,
        bound: 1.5,
        incumbent: f64::INFINITY,
        gap: f64::INFINITY,
    }
    .to_string();
    assert_eq!(line, "node=3 depth=2 bound=1.500000000e0 incumbent=inf gap=inf");
}
