use super::*;

#[test]
fn carrier_reuses_nonnegative_variable() {
    let mut m = MilpModel::new("c");
    let x = m.add_nonneg("x").unwrap();
    assert_eq!(abs_carrier(&mut m, x, "r").unwrap(), x);
    assert_eq!(m.num_rows(), 0);
    let f = m
        .add_variable("f", -1.0, 1.0, crate::lp::VarKind::Continuous)
        .unwrap();
    let y = abs_carrier(&mut m, f, "r").unwrap();
    assert_ne!(y, f);
    assert_eq!(m.num_rows(), 2);
}

#[test]
fn deviation_checks() {
    assert!(check_deviation(0.0).is_ok());
    assert!(check_deviation(-1e-9).is_err());
    assert!(check_deviation(f64::NAN).is_err());
}

#[test]
fn uncertain_count_includes_rhs() {
    let spec = UncertainRowSpec {
        row: RowId(0),
        entries: vec![UncertainEntry {
            var: VarId(0),
            nominal: 1.0,
            deviation: 0.1,
        }],
        gamma: 1.0,
        rhs: Some(RhsUncertainty {
            nominal: 1.0,
            deviation: 0.1,
        }),
    };
    assert_eq!(spec.uncertain_count(), 2);
}
