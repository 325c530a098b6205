//! Subcommand implementations. Each returns whether the command succeeded.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use bpflux::study::{convergence_study, rows_to_csv, semi_discrete_study, StudyRow};
use bpflux::{check_internal_ssp, ButcherTableau, Grid1D, ProblemSpec, RunReport};
use serde::Serialize;

use crate::config::{RunConfig, UsageError};

/// Contents of `report.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub scheme: String,
    pub gamma: f64,
    pub cfl_number: f64,
    pub bounds_mode: String,
    pub reconstruction: String,
    #[serde(flatten)]
    pub report: RunReport,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Serialize)]
struct StudySummary<'a> {
    config: &'a RunConfig,
    rows: &'a [StudyRow],
    /// Per-mesh run reports; empty for semi-discrete studies.
    reports: &'a [RunReport],
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn out_dir(config: &RunConfig) -> anyhow::Result<&Path> {
    let dir = config.out_dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

struct Simulated {
    problem: ProblemSpec,
    grid: Grid1D,
    u: Vec<f64>,
    summary: RunSummary,
}

fn simulate(config: &RunConfig) -> anyhow::Result<Simulated> {
    let problem = config.problem()?;
    let grid = Grid1D::new(config.n_cells, problem.domain)?;
    let scheme = config.scheme_config();
    let start = Instant::now();
    let (u, report) = bpflux::run_simulation(&scheme, &problem, &grid)?;
    let summary = RunSummary {
        problem: config.problem.to_string(),
        scheme: config.scheme.to_string(),
        gamma: config.gamma,
        cfl_number: config.cfl_number,
        bounds_mode: serde_json::to_value(config.bounds_mode)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        reconstruction: scheme.reconstruction.to_string(),
        report,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Simulated {
        problem,
        grid,
        u: u.into_inner(),
        summary,
    })
}

fn print_summary(s: &RunSummary) {
    let r = &s.report;
    let e1 =
        r.e1.map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
    println!(
        "{} {} N={} t={}: E1 {e1}, delta {:.3e}, mass drift {:.1e}, {} steps in {:.2}s",
        s.problem,
        s.scheme,
        r.n_cells,
        r.final_time,
        r.delta,
        r.mass_drift,
        r.n_steps,
        s.wall_time_seconds
    );
}

pub fn run(config: &RunConfig) -> anyhow::Result<bool> {
    let Simulated {
        grid, u, summary, ..
    } = simulate(config)?;
    let dir = out_dir(config)?;
    write(&dir.join("config.json"), &(config.to_json() + "\n"))?;
    write(
        &dir.join("report.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let mut csv = String::from("x_center,u\n");
    for (x, v) in grid.cell_centers().iter().zip(&u) {
        writeln!(csv, "{x:.17e},{v:.17e}")?;
    }
    write(&dir.join("profile.csv"), &csv)?;
    print_summary(&summary);
    Ok(true)
}

pub fn convergence(config: &RunConfig) -> anyhow::Result<bool> {
    let meshes = config.study_meshes()?;
    let scheme = config.scheme_config();
    let (rows, reports) = if config.semi_discrete {
        let problem = config.base_problem()?;
        let rows = semi_discrete_study(
            &problem,
            &meshes,
            scheme.reconstruction,
            &scheme.limiter,
            config.jobs,
        )?;
        (rows, Vec::new())
    } else {
        let problem = config.problem()?;
        convergence_study(&scheme, &problem, &meshes, config.jobs)?
    };
    let dir = out_dir(config)?;
    let csv = rows_to_csv(&rows);
    write(&dir.join("convergence.csv"), &csv)?;
    let summary = StudySummary {
        config,
        rows: &rows,
        reports: &reports,
    };
    write(
        &dir.join("convergence.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    print!("{csv}");
    Ok(true)
}

pub fn plot_data(config: &RunConfig) -> anyhow::Result<bool> {
    let Simulated {
        problem,
        grid,
        u,
        summary,
    } = simulate(config)?;
    let t = summary.report.final_time;
    let label = if problem.reference().is_some() {
        "u_reference"
    } else {
        "u_exact"
    };
    let exact: Option<Vec<f64>> = problem
        .has_exact_solution(t)
        .then(|| {
            grid.cell_centers()
                .iter()
                .map(|&x| problem.exact_solution(x, t))
                .collect::<bpflux::Result<_>>()
        })
        .transpose()?;
    let mut csv = String::from("x,u_numerical");
    if exact.is_some() {
        write!(csv, ",{label}")?;
    }
    csv.push('\n');
    for (i, (x, v)) in grid.cell_centers().iter().zip(&u).enumerate() {
        write!(csv, "{x:.17e},{v:.17e}")?;
        if let Some(e) = &exact {
            write!(csv, ",{:.17e}", e[i])?;
        }
        csv.push('\n');
    }
    write(&out_dir(config)?.join("plot.csv"), &csv)?;
    print_summary(&summary);
    Ok(true)
}

fn resolve_tableau(spec: &str) -> anyhow::Result<ButcherTableau> {
    let named = match spec {
        "euler" => Some(ButcherTableau::euler()),
        "ssp54" => Some(ButcherTableau::ssp54()),
        "exe-rk5" => Some(ButcherTableau::exe_rk5()),
        "rk76" => Some(ButcherTableau::rk76()),
        _ => None,
    };
    if let Some(t) = named {
        return Ok(t);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(UsageError(format!("unknown tableau '{spec}'")).into());
    }
    let text = fs::read_to_string(path)?;
    let t: ButcherTableau = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("invalid tableau file {spec}: {e}")))?;
    let m = t.stages();
    if t.a.len() != m || t.c.len() != m || t.a.iter().any(|r| r.len() != m) {
        return Err(UsageError(format!("tableau {spec} has inconsistent dimensions")).into());
    }
    Ok(t)
}

pub fn ssp_check(tableau: &str, mu: f64) -> anyhow::Result<bool> {
    let t = resolve_tableau(tableau)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(UsageError(format!("mu must be positive, got {mu}")).into());
    }
    let report = check_internal_ssp(&t, mu)?;
    println!("tableau {}, mu = {mu}", t.name);
    println!("stages_ok: {}", report.stages_ok);
    println!("update_ok: {}", report.update_ok);
    for v in &report.violations {
        println!("  {v}");
    }
    Ok(report.stages_ok && report.update_ok)
}
