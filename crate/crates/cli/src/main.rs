mod args;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::Parser;
use coldchain::analysis::{
    emit_report, gamma_sweep, run_budget_order_sensitivity, run_budget_sweep, run_ladder,
    solve_instance, Report, ReportFormat, RunSettings,
};
use coldchain::builder::Components;
use coldchain::lp::mps::write_mps;
use coldchain::model_data::{
    generate_instance, load_instance, save_instance, validate_instance, Instance, SizeSpec,
};
use coldchain::robust::{build_for_instance, RobustConfig};
use coldchain::solver::{check_solution, SolveOptions, SolveStatus};
use serde::{Deserialize, Serialize};
use serde_json::json;

use args::*;

/// Bad arguments or inputs (exit 2) versus a run that did not succeed
/// (exit 1).
enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a, cli.json),
        Command::Solve(a) => solve(a, cli.json),
        Command::Sensitivity(a) => sensitivity(a, cli.json),
        Command::GammaSweep(a) => gamma(a, cli.json),
        Command::Validate(a) => validate(a, cli.json),
        Command::Ladder(a) => ladder(a, cli.json),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn out_dir(explicit: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = explicit
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

fn source_json(common: &Common) -> serde_json::Value {
    let s = &common.source;
    json!({
        "instance": s.instance,
        "preset": s.preset,
        "size": s.size,
        "seed": common.seed,
    })
}

fn load(common: &Common) -> Result<Instance, Failure> {
    let s = &common.source;
    let inst = if let Some(path) = &s.instance {
        load_instance(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
    } else {
        let size = match (s.preset, s.size) {
            (Some(p), _) => SizeSpec::Preset(p),
            (None, Some(d)) => SizeSpec::Explicit(d),
            (None, None) => unreachable!("clap requires a source"),
        };
        generate_instance(size, common.seed).map_err(|e| usage(e.to_string()))?
    };
    Ok(inst)
}

fn robust_config(args: &RobustArgs, inst: &Instance) -> Result<Option<RobustConfig>, Failure> {
    if !args.robust && args.gamma.is_none() {
        return Ok(None);
    }
    let cfg = RobustConfig::new(args.gamma.unwrap_or(1.0), args.deviation);
    let d = inst.dimensions;
    let problems = cfg.violations(d.n_suppliers, d.n_vaccines);
    if !problems.is_empty() {
        return Err(usage(problems.join("; ")));
    }
    Ok(Some(cfg))
}

fn warn_gamma(cfg: Option<&RobustConfig>) {
    if let Some(cfg) = cfg.filter(|c| c.gamma > 1.0) {
        eprintln!(
            "warning: gamma {} exceeds the single-parameter row budget; clamped to 1",
            cfg.gamma
        );
    }
}

fn solve_options(a: &SolverArgs) -> Result<SolveOptions, Failure> {
    let time_limit = match a.time_limit {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(usage(format!("time limit must be positive, got {t}")))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let opts = SolveOptions {
        feasibility_tol: a.feasibility_tol,
        integrality_tol: a.integrality_tol,
        mip_gap: a.gap,
        node_limit: a.node_limit,
        time_limit,
        branching: a.branching.into(),
        node_order: a.node_order.into(),
        scaling: !a.no_scaling,
        ..SolveOptions::default()
    };
    Ok(opts)
}

fn echo(config: &serde_json::Value) {
    eprintln!("effective config: {config}");
}

fn print_summary(json_out: bool, summary: &serde_json::Value, human: &[String]) {
    if json_out {
        println!("{summary}");
    } else {
        for line in human {
            println!("{line}");
        }
    }
}

fn generate(a: &GenerateArgs, json_out: bool) -> Outcome {
    let inst = load(&a.common)?;
    let path = match &a.output {
        Some(p) => p.clone(),
        None => out_dir(&a.common.out_dir)?.join("instance.json"),
    };
    echo(&json!({"command": "generate", "source": source_json(&a.common), "output": path}));
    save_instance(&inst, &path).with_context(|| format!("writing {}", path.display()))?;
    let d = inst.dimensions;
    print_summary(
        json_out,
        &json!({"output": path, "dimensions": d}),
        &[format!(
            "wrote {} (T={} J={} K={} V={} S={} A={})",
            path.display(),
            d.n_periods,
            d.n_dcs,
            d.n_vcs,
            d.n_vaccines,
            d.n_suppliers,
            d.n_age_groups
        )],
    );
    Ok(true)
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    robust: Option<&'a RobustConfig>,
    status: SolveStatus,
    objective: f64,
    bound: f64,
    gap: f64,
    nodes: u64,
    components: Option<Components>,
    warnings: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
    values: BTreeMap<&'a str, f64>,
}

#[derive(Deserialize)]
struct SolutionInput {
    robust: Option<RobustConfig>,
    values: BTreeMap<String, f64>,
}

fn solve(a: &SolveArgs, json_out: bool) -> Outcome {
    let mut inst = load(&a.common)?;
    let cfg = robust_config(&a.robust, &inst)?;
    if cfg.is_some() {
        inst.robust = cfg;
    }
    let opts = solve_options(&a.solver)?;
    let path = match &a.output {
        Some(p) => p.clone(),
        None => out_dir(&a.common.out_dir)?.join("solution.json"),
    };
    echo(&json!({
        "command": "solve",
        "source": source_json(&a.common),
        "robust": inst.robust,
        "solve": opts,
        "output": path,
        "mps": a.mps,
        "timings": a.timings,
    }));
    let settings = RunSettings {
        solve: opts,
        ..RunSettings::default()
    };
    let case = solve_instance(&inst, &settings).map_err(|e| match e {
        coldchain::analysis::AnalysisError::Build(b) => usage(b.to_string()),
        other => Failure::Run(other.into()),
    })?;
    for w in &case.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(mps) = &a.mps {
        let text = write_mps(&case.model).context("writing MPS")?;
        fs::write(mps, text).with_context(|| format!("writing {}", mps.display()))?;
    }
    let sol = &case.solution;
    let values = if sol.values.is_empty() {
        BTreeMap::new()
    } else {
        case.model
            .variables()
            .iter()
            .map(|v| (v.name.as_str(), sol.values[v.id.0]))
            .collect()
    };
    let file = SolutionFile {
        robust: inst.robust.as_ref(),
        status: sol.status,
        objective: sol.objective,
        bound: sol.bound,
        gap: sol.gap,
        nodes: sol.nodes,
        components: case.components,
        warnings: &case.warnings,
        wall_time_s: a.timings.then(|| sol.wall_time.as_secs_f64()),
        values,
    };
    let mut text = serde_json::to_string_pretty(&file).context("serializing solution")?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;

    let mut human = vec![format!(
        "status {}  objective {}  bound {}  gap {:.3e}  nodes {}",
        sol.status, sol.objective, sol.bound, sol.gap, sol.nodes
    )];
    if let Some(c) = case.components {
        human.push(format!("P1 {}  P2 {}  P3 {}  Z {}", c.p1, c.p2, c.p3, c.z));
    }
    human.push(format!("wrote {}", path.display()));
    print_summary(
        json_out,
        &json!({
            "status": sol.status,
            "objective": sol.objective,
            "bound": sol.bound,
            "gap": sol.gap,
            "nodes": sol.nodes,
            "components": case.components,
            "output": path,
        }),
        &human,
    );
    Ok(sol.status == SolveStatus::Optimal)
}

fn report_format(f: Format) -> (ReportFormat, &'static str) {
    match f {
        Format::Csv => (ReportFormat::Csv, "csv"),
        Format::Json => (ReportFormat::Json, "json"),
    }
}

/// Writes a report, prints its checks, and says whether every row was
/// solved to optimality.
fn finish_report(
    report: &Report,
    dir: &Path,
    stem: &str,
    fmt: Format,
    json_out: bool,
) -> Result<(bool, serde_json::Value), Failure> {
    let (format, ext) = report_format(fmt);
    let path = dir.join(format!("{stem}.{ext}"));
    let (main, plot) =
        emit_report(report, format, &path).with_context(|| format!("writing {}", path.display()))?;
    let all_optimal = report
        .rows
        .iter()
        .chain(&report.baseline)
        .all(|r| r.status == SolveStatus::Optimal);
    if !json_out {
        println!("{}: wrote {} and {}", report.title, main.display(), plot.display());
        for row in report.baseline.iter().chain(&report.rows) {
            println!(
                "  {:<28} {:<13} Z {}",
                row.label,
                row.status.to_string(),
                row.z.map_or("-".to_string(), |z| z.to_string())
            );
        }
        for c in &report.checks {
            println!("  check {}: {} ({})", c.name, if c.holds { "ok" } else { "FAILED" }, c.detail);
        }
    }
    let summary = json!({
        "title": report.title,
        "output": main,
        "plot": plot,
        "rows": report.rows.len(),
        "all_optimal": all_optimal,
        "checks": report.checks,
    });
    Ok((all_optimal, summary))
}

fn analysis_error(e: coldchain::analysis::AnalysisError) -> Failure {
    use coldchain::analysis::AnalysisError as E;
    match e {
        E::InvalidInput(_) | E::Generate(_) | E::Build(_) => usage(e.to_string()),
        E::Solve(_) => Failure::Run(e.into()),
    }
}

fn sensitivity(a: &SensitivityArgs, json_out: bool) -> Outcome {
    let inst = load(&a.common)?;
    let cfg = robust_config(&a.robust, &inst)?;
    let settings = RunSettings {
        robust: cfg,
        solve: solve_options(&a.solver)?,
        relax_service_on_infeasible: a.relax_service,
        record_timings: a.report.timings,
    };
    let dir = out_dir(&a.common.out_dir)?;
    echo(&json!({
        "command": "sensitivity",
        "source": source_json(&a.common),
        "robust": settings.robust,
        "solve": settings.solve,
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "magnitude": a.magnitude,
        "cuts": a.cuts,
        "relax_service": a.relax_service,
        "format": format!("{:?}", a.report.format).to_lowercase(),
        "timings": a.report.timings,
        "out_dir": dir,
    }));
    warn_gamma(settings.robust.as_ref());
    let mut ok = true;
    let mut summaries = Vec::new();
    if a.mode != SensitivityMode::Sweep {
        let r = run_budget_order_sensitivity(&inst, a.magnitude, &settings).map_err(analysis_error)?;
        let (done, s) = finish_report(&r, &dir, "sensitivity-grid", a.report.format, json_out)?;
        ok &= done;
        summaries.push(s);
    }
    if a.mode != SensitivityMode::Grid {
        let r = run_budget_sweep(&inst, &a.cuts, &settings).map_err(analysis_error)?;
        let (done, s) = finish_report(&r, &dir, "budget-sweep", a.report.format, json_out)?;
        ok &= done;
        summaries.push(s);
    }
    if json_out {
        println!("{}", json!({ "reports": summaries }));
    }
    Ok(ok)
}

fn gamma(a: &GammaSweepArgs, json_out: bool) -> Outcome {
    let inst = load(&a.common)?;
    let settings = RunSettings {
        solve: solve_options(&a.solver)?,
        record_timings: a.report.timings,
        ..RunSettings::default()
    };
    let dir = out_dir(&a.common.out_dir)?;
    echo(&json!({
        "command": "gamma-sweep",
        "source": source_json(&a.common),
        "gammas": a.gammas,
        "deviation": a.deviation,
        "solve": settings.solve,
        "format": format!("{:?}", a.report.format).to_lowercase(),
        "timings": a.report.timings,
        "out_dir": dir,
    }));
    let r = gamma_sweep(&inst, &a.gammas, a.deviation, &settings).map_err(analysis_error)?;
    let (ok, s) = finish_report(&r, &dir, "gamma-sweep", a.report.format, json_out)?;
    if json_out {
        println!("{s}");
    }
    Ok(ok)
}

fn ladder(a: &LadderArgs, json_out: bool) -> Outcome {
    let dir = out_dir(&a.out_dir)?;
    // presets all have three suppliers; vaccine counts vary but only the
    // scalar fields are set here
    let cfg = if a.robust.robust || a.robust.gamma.is_some() {
        let cfg = RobustConfig::new(a.robust.gamma.unwrap_or(1.0), a.robust.deviation);
        let problems = cfg.violations(3, 1);
        if !problems.is_empty() {
            return Err(usage(problems.join("; ")));
        }
        Some(cfg)
    } else {
        None
    };
    let settings = RunSettings {
        robust: cfg,
        solve: solve_options(&a.solver)?,
        record_timings: a.report.timings,
        ..RunSettings::default()
    };
    echo(&json!({
        "command": "ladder",
        "presets": a.presets,
        "seed": a.seed,
        "robust": settings.robust,
        "solve": settings.solve,
        "format": format!("{:?}", a.report.format).to_lowercase(),
        "timings": a.report.timings,
        "out_dir": dir,
    }));
    warn_gamma(settings.robust.as_ref());
    let r = run_ladder(&a.presets, a.seed, &settings).map_err(analysis_error)?;
    let (ok, s) = finish_report(&r, &dir, "ladder", a.report.format, json_out)?;
    if json_out {
        println!("{s}");
    }
    Ok(ok)
}

fn validate(a: &ValidateArgs, json_out: bool) -> Outcome {
    let mut inst = load(&a.common)?;
    echo(&json!({
        "command": "validate",
        "source": source_json(&a.common),
        "solution": a.solution,
        "tol": a.tol,
    }));
    let violations: Vec<String> = validate_instance(&inst).iter().map(|v| v.to_string()).collect();
    let mut human: Vec<String> = violations.iter().map(|v| format!("instance: {v}")).collect();
    let mut solution_issues: Vec<String> = Vec::new();
    if let Some(path) = &a.solution {
        if !violations.is_empty() {
            return Err(usage("cannot check a solution against an invalid instance"));
        }
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let input: SolutionInput =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if input.robust.is_some() {
            inst.robust = input.robust;
        }
        let built = build_for_instance(&inst).map_err(|e| usage(e.to_string()))?;
        if input.values.is_empty() {
            return Err(usage(format!("{} carries no solution values", path.display())));
        }
        let values: Vec<f64> = built
            .model
            .variables()
            .iter()
            .map(|v| {
                input
                    .values
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| usage(format!("solution lacks variable {}", v.name)))
            })
            .collect::<Result<_, _>>()?;
        let report = check_solution(&built.model, &values, a.tol, Some((&inst, &built.index)))
            .context("checking solution")?;
        let ev = &report.evaluation;
        solution_issues.extend(
            ev.row_violations
                .iter()
                .map(|r| format!("row {} slack {}", r.name, r.slack)),
        );
        solution_issues.extend(ev.bound_violations.iter().map(|b| {
            format!("bound {} = {} outside [{}, {}]", b.name, b.value, b.lower, b.upper)
        }));
        solution_issues.extend(
            ev.integrality_violations
                .iter()
                .map(|i| format!("integrality {} = {}", i.name, i.value)),
        );
        solution_issues.extend(
            report
                .structure
                .iter()
                .map(|s| format!("{} at {} by {}", s.rule, s.at, s.amount)),
        );
        human.extend(solution_issues.iter().map(|s| format!("solution: {s}")));
        human.push(format!("objective {}", ev.objective));
    }
    let clean = violations.is_empty() && solution_issues.is_empty();
    human.push(if clean { "valid".into() } else { "INVALID".into() });
    print_summary(
        json_out,
        &json!({
            "valid": clean,
            "instance_violations": violations,
            "solution_violations": solution_issues,
        }),
        &human,
    );
    Ok(clean)
}
