mod common;

use coldchain::analysis::{
    emit_report, gamma_sweep, plot_path, render_csv, render_plot_csv, run_budget_order_sensitivity,
    run_budget_sweep, run_ladder_instances, Direction, PerturbationScenario, Report, ReportFormat,
    RunSettings,
};
use coldchain::solver::SolveStatus;
use common::{close, exact, tiny_instance};

fn settings() -> RunSettings {
    RunSettings {
        solve: exact(),
        ..Default::default()
    }
}

#[test]
fn all_unchanged_scenario_rejected() {
    assert!(PerturbationScenario::new(Direction::Unchanged, Direction::Unchanged, 0.1).is_err());
    assert!(PerturbationScenario::new(Direction::Increased, Direction::Unchanged, 0.0).is_err());
    assert!(run_budget_order_sensitivity(&tiny_instance(1, 0), 0.0, &settings()).is_err());
}

#[test]
fn grid_runs_from_both_up_to_both_down() {
    let grid = PerturbationScenario::grid(0.1).unwrap();
    assert_eq!(grid.len(), 8);
    assert_eq!(
        (grid[0].budget, grid[0].max_order),
        (Direction::Increased, Direction::Increased)
    );
    assert_eq!(
        (grid[7].budget, grid[7].max_order),
        (Direction::Decreased, Direction::Decreased)
    );
    let mut labels: Vec<String> = grid.iter().map(|s| s.label()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), 8);
}

#[test]
fn scenario_scales_both_parameters() {
    let inst = tiny_instance(2, 1);
    let s = PerturbationScenario::new(Direction::Decreased, Direction::Increased, 0.1).unwrap();
    let out = s.apply(&inst);
    for (a, b) in inst.suppliers.iter().zip(&out.suppliers) {
        assert!(close(b.budget, 0.9 * a.budget, 1e-12));
        assert_eq!(b.max_order[0], (a.max_order[0] as f64 * 1.1).round() as i64);
    }
}

#[test]
fn sensitivity_report_shape() {
    let inst = tiny_instance(2, 2);
    let report = run_budget_order_sensitivity(&inst, 0.1, &settings()).unwrap();
    assert_eq!(report.rows.len(), 8);
    let baseline = report.baseline.as_ref().unwrap();
    assert_eq!(baseline.status, SolveStatus::Optimal);
    for row in &report.rows {
        if let (Some(z), Some(b)) = (row.z, baseline.z) {
            assert!(close(row.change_pct.unwrap(), 100.0 * (z - b) / b, 1e-9));
        }
    }
    assert!(report.check("max_z_at_both_increased").is_some());
    assert!(report.check("min_z_at_both_decreased").is_some());
    let csv = render_csv(&report);
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn relaxing_both_limits_never_raises_z() {
    let inst = tiny_instance(2, 2);
    let report = run_budget_order_sensitivity(&inst, 0.1, &settings()).unwrap();
    let base = report.baseline.as_ref().unwrap().z.unwrap();
    let up_up = report.rows[0].z.unwrap();
    assert!(up_up <= base + 1e-6 * base.abs().max(1.0));
    if let Some(down_down) = report.rows[7].z {
        assert!(down_down >= base - 1e-6 * base.abs().max(1.0));
    }
}

#[test]
fn zero_cut_matches_baseline() {
    let inst = tiny_instance(2, 3);
    let report = run_budget_sweep(&inst, &[0.0], &settings()).unwrap();
    let base = report.baseline.as_ref().unwrap();
    let row = &report.rows[0];
    assert_eq!(row.status, base.status);
    assert!(close(row.z.unwrap(), base.z.unwrap(), 1e-9));
    assert!(row.change_pct.unwrap().abs() < 1e-6);
}

#[test]
fn full_cut_is_infeasible_unless_relaxed() {
    let inst = tiny_instance(1, 3);
    let report = run_budget_sweep(&inst, &[1.0], &settings()).unwrap();
    assert_eq!(report.rows[0].status, SolveStatus::Infeasible);
    assert!(!report.rows[0].relaxed_service);
    assert!(!report.check("all_rows_solved").unwrap().holds);

    let relaxed = RunSettings {
        relax_service_on_infeasible: true,
        ..settings()
    };
    let report = run_budget_sweep(&inst, &[1.0], &relaxed).unwrap();
    assert!(report.rows[0].relaxed_service);
    assert_eq!(report.rows[0].status, SolveStatus::Optimal);
}

#[test]
fn bad_sweep_inputs_rejected() {
    let inst = tiny_instance(1, 0);
    assert!(run_budget_sweep(&inst, &[1.5], &settings()).is_err());
    assert!(gamma_sweep(&inst, &[0.5, 0.25], 0.1, &settings()).is_err());
    assert!(gamma_sweep(&inst, &[0.0, 2.0], 0.1, &settings()).is_err());
}

#[test]
fn gamma_sweep_without_deviations_is_flat() {
    let inst = tiny_instance(2, 4);
    let report = gamma_sweep(&inst, &[0.0, 1.0], 0.0, &settings()).unwrap();
    assert!(close(report.rows[0].z.unwrap(), report.rows[1].z.unwrap(), 1e-9));
}

#[test]
fn gamma_sweep_is_monotone() {
    let inst = tiny_instance(2, 4);
    let report = gamma_sweep(&inst, &[0.0, 0.5, 1.0], 0.1, &settings()).unwrap();
    assert!(report.check("z_non_decreasing").unwrap().holds, "{report:?}");
}

#[test]
fn ladder_single_and_zero_demand() {
    let mut zero = tiny_instance(1, 6);
    for row in zero.demand.demand.iter_mut().flatten() {
        row.iter_mut().for_each(|d| *d = 0);
    }
    let report = run_ladder_instances("t", vec![("zero".into(), 1.0, zero)], &settings()).unwrap();
    assert!(report.all_checks_hold());
    let row = &report.rows[0];
    for x in [row.p1, row.p2, row.p3, row.z] {
        assert!(x.unwrap().abs() < 1e-9);
    }
}

fn empty_report() -> Report {
    Report {
        title: "empty".into(),
        x_label: "level".into(),
        baseline: None,
        rows: Vec::new(),
        checks: Vec::new(),
    }
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let (main, plot) = emit_report(&empty_report(), ReportFormat::Csv, &path).unwrap();
    assert_eq!(main, path);
    assert_eq!(plot, plot_path(&path));
    assert_eq!(std::fs::read_to_string(&main).unwrap().lines().count(), 1);
    assert_eq!(std::fs::read_to_string(&plot).unwrap(), "level,p3\n");
}

#[test]
fn reports_are_reproducible() {
    let inst = tiny_instance(2, 5);
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for n in 0..2 {
        let report = run_budget_sweep(&inst, &[0.1, 0.3], &settings()).unwrap();
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            let path = dir.path().join(format!("run{n}-{format:?}.out"));
            let (main, plot) = emit_report(&report, format, &path).unwrap();
            bodies.push((std::fs::read(main).unwrap(), std::fs::read(plot).unwrap()));
        }
    }
    assert_eq!(bodies[0], bodies[2]);
    assert_eq!(bodies[1], bodies[3]);
    assert!(!String::from_utf8_lossy(&bodies[0].0).contains("wall_time"));
}

#[test]
fn timings_add_a_column() {
    let inst = tiny_instance(1, 5);
    let timed = RunSettings {
        record_timings: true,
        ..settings()
    };
    let report = run_budget_sweep(&inst, &[0.1], &timed).unwrap();
    let csv = render_csv(&report);
    assert!(csv.lines().next().unwrap().ends_with(",wall_time_s"));
    assert_eq!(render_plot_csv(&report).lines().next().unwrap(), "budget_cut,p3");
}
