//! Experiment harnesses: the instance ladder, the budget and max-order
//! sensitivity grid, the budget-cut sweep and the Γ sweep, plus report
//! emission.
//!
//! Scenario solves run in parallel; rows are always assembled in scenario
//! order, so reports do not depend on scheduling.

mod report;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::builder::{objective_components, Components, VariableIndex};
use crate::lp::MilpModel;
use crate::model_data::{generate_instance, GenerateError, Instance, SizeSpec};
use crate::robust::{build_for_instance, RobustConfig, RobustError};
use crate::solver::{check_solution, solve_milp, Solution, SolveError, SolveOptions, SolveStatus};

pub use report::{emit_report, plot_path, render_csv, render_plot_csv, ReportFormat};

/// Budget cut fractions of the default sweep.
pub const DEFAULT_BUDGET_CUTS: [f64; 8] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50];
/// Absolute tolerance of the trend checks.
pub const TREND_TOL: f64 = 1e-6;
/// Tolerance of the per-solve solution checks.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Build(#[from] RobustError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// How every solve of a harness is run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Robust configuration applied to every solve; `None` keeps whatever
    /// the instance itself carries.
    pub robust: Option<RobustConfig>,
    pub solve: SolveOptions,
    /// Re-solve infeasible budget-sweep levels with a zero service floor.
    pub relax_service_on_infeasible: bool,
    /// Record wall times in report rows. Off by default so that reports are
    /// byte-for-byte reproducible.
    pub record_timings: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            robust: None,
            solve: SolveOptions::default(),
            relax_service_on_infeasible: false,
            record_timings: false,
        }
    }
}

/// A solved instance with everything needed to inspect the result.
#[derive(Debug, Clone)]
pub struct SolvedCase {
    pub model: MilpModel,
    pub index: VariableIndex,
    pub solution: Solution,
    pub components: Option<Components>,
    /// Row, bound, integrality and structural violations of the returned
    /// point at [`CHECK_TOL`]; `None` without a solution.
    pub violations: Option<usize>,
    pub warnings: Vec<String>,
}

/// Builds (robust when configured) and solves one instance.
pub fn solve_instance(inst: &Instance, settings: &RunSettings) -> Result<SolvedCase, AnalysisError> {
    let with_cfg;
    let inst = match &settings.robust {
        Some(cfg) => {
            let mut copy = inst.clone();
            copy.robust = Some(cfg.clone());
            with_cfg = copy;
            &with_cfg
        }
        None => inst,
    };
    let built = build_for_instance(inst)?;
    let solution = solve_milp(&built.model, &settings.solve)?;
    let (components, violations) = if solution.status.has_solution() {
        let c = objective_components(inst, &built.index, &solution.values)
            .expect("solution covers every indexed variable");
        let report = check_solution(&built.model, &solution.values, CHECK_TOL, Some((inst, &built.index)))
            .expect("solution sized to the model");
        (Some(c), Some(report.violation_count()))
    } else {
        (None, None)
    };
    Ok(SolvedCase {
        model: built.model,
        index: built.index,
        solution,
        components,
        violations,
        warnings: built.warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    /// Numeric x value: preset id, cut fraction, Γ, or scenario number.
    pub level: f64,
    pub status: SolveStatus,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    pub z: Option<f64>,
    /// Percent change of Z against the baseline row.
    pub change_pct: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: u64,
    /// Solved with the service floor set to zero.
    pub relaxed_service: bool,
    /// Violation count of the solution checks.
    pub violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ReportRow {
    fn from_case(label: String, level: f64, case: &SolvedCase, settings: &RunSettings) -> Self {
        let c = case.components;
        let sol = &case.solution;
        Self {
            label,
            level,
            status: sol.status,
            p1: c.map(|c| c.p1),
            p2: c.map(|c| c.p2),
            p3: c.map(|c| c.p3),
            z: c.map(|c| c.z),
            change_pct: None,
            gap: sol.status.has_solution().then_some(sol.gap),
            nodes: sol.nodes,
            relaxed_service: false,
            violations: case.violations,
            wall_time_s: settings
                .record_timings
                .then(|| sol.wall_time.as_secs_f64()),
        }
    }

    fn with_baseline(mut self, baseline: Option<f64>) -> Self {
        self.change_pct = match (self.z, baseline) {
            (Some(z), Some(b)) if b != 0.0 => Some(100.0 * (z - b) / b.abs()),
            _ => None,
        };
        self
    }
}

/// Outcome of one qualitative check over a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    /// Meaning of the `level` column, used as the plot x axis.
    pub x_label: String,
    pub baseline: Option<ReportRow>,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<TrendCheck>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&TrendCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// `(label, value)` pairs of the rows that have a value for `field`.
fn series(rows: &[ReportRow], field: impl Fn(&ReportRow) -> Option<f64>) -> Vec<(&str, f64)> {
    rows.iter()
        .filter_map(|r| field(r).map(|x| (r.label.as_str(), x)))
        .collect()
}

/// Checks that adjacent values never move against `direction` (+1 for
/// non-decreasing, -1 for non-increasing) by more than `tol`.
fn monotone_check(name: &str, points: &[(&str, f64)], direction: f64, tol: f64) -> TrendCheck {
    let breaks: Vec<String> = points
        .windows(2)
        .filter(|w| direction * (w[1].1 - w[0].1) < -tol)
        .map(|w| format!("{} {} -> {} {}", w[0].0, w[0].1, w[1].0, w[1].1))
        .collect();
    TrendCheck {
        name: name.to_string(),
        holds: breaks.is_empty(),
        detail: if breaks.is_empty() {
            format!("{} points", points.len())
        } else {
            breaks.join("; ")
        },
    }
}

fn unsolved_check(rows: &[ReportRow]) -> Option<TrendCheck> {
    let missing: Vec<&str> = rows
        .iter()
        .filter(|r| r.z.is_none())
        .map(|r| r.label.as_str())
        .collect();
    (!missing.is_empty()).then(|| TrendCheck {
        name: "all_rows_solved".into(),
        holds: false,
        detail: format!("no solution for {}", missing.join(", ")),
    })
}

/// Solves labelled instances in parallel, keeping input order.
fn solve_all(
    cases: Vec<(String, f64, Instance)>,
    settings: &RunSettings,
) -> Result<Vec<(ReportRow, Instance)>, AnalysisError> {
    cases
        .into_par_iter()
        .map(|(label, level, inst)| {
            let case = solve_instance(&inst, settings)?;
            Ok((ReportRow::from_case(label, level, &case, settings), inst))
        })
        .collect()
}

/// Objective decomposition along a list of labelled instances.
///
/// Checks that Z never decreases along the list and that P3 grows with
/// successive growth ratios that do not increase.
pub fn run_ladder_instances(
    title: &str,
    instances: Vec<(String, f64, Instance)>,
    settings: &RunSettings,
) -> Result<Report, AnalysisError> {
    let rows: Vec<ReportRow> = solve_all(instances, settings)?
        .into_iter()
        .map(|(r, _)| r)
        .collect();
    let mut checks = vec![monotone_check(
        "z_non_decreasing",
        &series(&rows, |r| r.z),
        1.0,
        TREND_TOL,
    )];
    let p3 = series(&rows, |r| r.p3);
    checks.push(monotone_check("p3_non_decreasing", &p3, 1.0, TREND_TOL));
    let ratios: Vec<(&str, f64)> = p3
        .windows(2)
        .filter(|w| w[0].1 > 0.0)
        .map(|w| (w[1].0, w[1].1 / w[0].1))
        .collect();
    checks.push(monotone_check("p3_growth_ratio_non_increasing", &ratios, -1.0, TREND_TOL));
    checks.extend(unsolved_check(&rows));
    Ok(Report {
        title: title.to_string(),
        x_label: "preset".into(),
        baseline: None,
        rows,
        checks,
    })
}

/// Generates and solves the given presets with one seed.
pub fn run_ladder(presets: &[u8], seed: u64, settings: &RunSettings) -> Result<Report, AnalysisError> {
    let instances = presets
        .iter()
        .map(|&id| {
            let inst = generate_instance(SizeSpec::Preset(id), seed)?;
            Ok((format!("preset-{id}"), id as f64, inst))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    run_ladder_instances("ladder", instances, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increased,
    Unchanged,
    Decreased,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Increased => 1.0,
            Direction::Unchanged => 0.0,
            Direction::Decreased => -1.0,
        }
    }

    fn short(self) -> &'static str {
        match self {
            Direction::Increased => "up",
            Direction::Unchanged => "same",
            Direction::Decreased => "down",
        }
    }
}

/// Joint perturbation of every supplier budget and maximum order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationScenario {
    pub budget: Direction,
    pub max_order: Direction,
    pub magnitude: f64,
}

impl PerturbationScenario {
    pub fn new(budget: Direction, max_order: Direction, magnitude: f64) -> Result<Self, AnalysisError> {
        if budget == Direction::Unchanged && max_order == Direction::Unchanged {
            return Err(AnalysisError::InvalidInput(
                "a scenario must change the budget or the maximum order".into(),
            ));
        }
        if !(magnitude > 0.0 && magnitude < 1.0) {
            return Err(AnalysisError::InvalidInput(format!(
                "perturbation magnitude must lie in (0, 1), got {magnitude}"
            )));
        }
        Ok(Self {
            budget,
            max_order,
            magnitude,
        })
    }

    /// The eight scenarios, both parameters increased first and both
    /// decreased last.
    pub fn grid(magnitude: f64) -> Result<Vec<Self>, AnalysisError> {
        use Direction::*;
        [
            (Increased, Increased),
            (Increased, Unchanged),
            (Increased, Decreased),
            (Unchanged, Increased),
            (Unchanged, Decreased),
            (Decreased, Increased),
            (Decreased, Unchanged),
            (Decreased, Decreased),
        ]
        .into_iter()
        .map(|(b, m)| Self::new(b, m, magnitude))
        .collect()
    }

    pub fn label(&self) -> String {
        format!("budget-{}/orders-{}", self.budget.short(), self.max_order.short())
    }

    pub fn apply(&self, inst: &Instance) -> Instance {
        inst.with_budget_factor(1.0 + self.budget.sign() * self.magnitude)
            .with_max_order_factor(1.0 + self.max_order.sign() * self.magnitude)
    }
}

/// Solves the eight budget/max-order scenarios against the unperturbed
/// baseline.
///
/// Checks that Z is largest with both parameters increased and smallest
/// with both decreased.
pub fn run_budget_order_sensitivity(
    inst: &Instance,
    magnitude: f64,
    settings: &RunSettings,
) -> Result<Report, AnalysisError> {
    let scenarios = PerturbationScenario::grid(magnitude)?;
    let baseline_case = solve_instance(inst, settings)?;
    let baseline = ReportRow::from_case("baseline".into(), 0.0, &baseline_case, settings);
    let base_z = baseline.z;
    let cases = scenarios
        .iter()
        .enumerate()
        .map(|(n, s)| (s.label(), (n + 1) as f64, s.apply(inst)))
        .collect();
    let rows: Vec<ReportRow> = solve_all(cases, settings)?
        .into_iter()
        .map(|(r, _)| r.with_baseline(base_z))
        .collect();

    let z = series(&rows, |r| r.z);
    let extreme = |name: &str, label: String, want_max: bool| {
        let target = z.iter().find(|(l, _)| *l == label).map(|p| p.1);
        let holds = match target {
            Some(t) => z.iter().all(|&(_, x)| {
                if want_max {
                    t >= x - TREND_TOL
                } else {
                    t <= x + TREND_TOL
                }
            }),
            None => false,
        };
        let (best_label, best) = z
            .iter()
            .copied()
            .reduce(|a, b| {
                if (want_max && b.1 > a.1) || (!want_max && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .unwrap_or(("none", f64::NAN));
        TrendCheck {
            name: name.to_string(),
            holds,
            detail: format!(
                "{label} z={}; {} at {best_label} z={best}",
                target.map_or("none".to_string(), |t| t.to_string()),
                if want_max { "max" } else { "min" }
            ),
        }
    };
    use Direction::*;
    let mut checks = vec![
        extreme(
            "max_z_at_both_increased",
            PerturbationScenario::new(Increased, Increased, magnitude)?.label(),
            true,
        ),
        extreme(
            "min_z_at_both_decreased",
            PerturbationScenario::new(Decreased, Decreased, magnitude)?.label(),
            false,
        ),
    ];
    checks.extend(unsolved_check(&rows));
    Ok(Report {
        title: "budget and max-order sensitivity".into(),
        x_label: "scenario".into(),
        baseline: Some(baseline),
        rows,
        checks,
    })
}

fn zero_service_floor(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    out.demand.service_floor = 0.0;
    out.demand.service_floor_override = None;
    out
}

/// Cuts every supplier budget by each fraction in turn.
///
/// Checks that transportation cost does not increase and deprivation cost
/// does not decrease as the cut deepens. Infeasible levels are reported;
/// with `relax_service_on_infeasible` they are re-solved with a zero
/// service floor and flagged.
pub fn run_budget_sweep(
    inst: &Instance,
    fractions: &[f64],
    settings: &RunSettings,
) -> Result<Report, AnalysisError> {
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(AnalysisError::InvalidInput(format!(
            "budget cut fraction {f} outside [0, 1]"
        )));
    }
    let baseline_case = solve_instance(inst, settings)?;
    let baseline = ReportRow::from_case("baseline".into(), 0.0, &baseline_case, settings);
    let base_z = baseline.z;
    let cases = fractions
        .iter()
        .map(|&f| (format!("cut-{f}"), f, inst.with_budget_factor(1.0 - f)))
        .collect();
    let solved = solve_all(cases, settings)?;
    let rows: Vec<ReportRow> = solved
        .into_par_iter()
        .map(|(row, cut)| {
            if row.status != SolveStatus::Infeasible || !settings.relax_service_on_infeasible {
                return Ok(row.with_baseline(base_z));
            }
            let case = solve_instance(&zero_service_floor(&cut), settings)?;
            let mut relaxed = ReportRow::from_case(row.label, row.level, &case, settings);
            relaxed.relaxed_service = true;
            Ok(relaxed.with_baseline(base_z))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let mut checks = vec![
        monotone_check("p2_non_increasing", &series(&rows, |r| r.p2), -1.0, TREND_TOL),
        monotone_check("p3_non_decreasing", &series(&rows, |r| r.p3), 1.0, TREND_TOL),
    ];
    checks.extend(unsolved_check(&rows));
    Ok(Report {
        title: "budget cut sweep".into(),
        x_label: "budget_cut".into(),
        baseline: Some(baseline),
        rows,
        checks,
    })
}

/// Robust solves over increasing Γ with deviations at
/// `deviation_fraction` of the nominal values.
///
/// Checks that Z never decreases in Γ.
pub fn gamma_sweep(
    inst: &Instance,
    gammas: &[f64],
    deviation_fraction: f64,
    settings: &RunSettings,
) -> Result<Report, AnalysisError> {
    if gammas.windows(2).any(|w| w[1] < w[0]) {
        return Err(AnalysisError::InvalidInput("gammas must be sorted ascending".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(AnalysisError::InvalidInput(format!("gamma {g} outside [0, 1]")));
    }
    let rows: Vec<ReportRow> = gammas
        .par_iter()
        .map(|&g| {
            let run = RunSettings {
                robust: Some(RobustConfig::new(g, deviation_fraction)),
                ..settings.clone()
            };
            let case = solve_instance(inst, &run)?;
            Ok(ReportRow::from_case(format!("gamma-{g}"), g, &case, settings))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let mut checks = vec![monotone_check(
        "z_non_decreasing",
        &series(&rows, |r| r.z),
        1.0,
        TREND_TOL,
    )];
    checks.extend(unsolved_check(&rows));
    Ok(Report {
        title: "gamma sweep".into(),
        x_label: "gamma".into(),
        baseline: None,
        rows,
        checks,
    })
}
