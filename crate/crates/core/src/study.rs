//! Grid convergence studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{eoc, format_eoc, format_sci3, l1_distance};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::limiters::{space_limited_flux, LimiterConfig};
use crate::problem::ProblemSpec;
use crate::reconstruction::Reconstruction;
use crate::simulation::{run_simulation, RunReport, SchemeConfig};
use crate::spatial::{flux_divergence, SpatialOperator};

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n_cells: usize,
    pub e1: f64,
    pub eoc: Option<f64>,
    /// Bound-violation margin; absent for semi-discrete studies.
    pub delta: Option<f64>,
}

/// Fills the `eoc` column of `rows`.
fn attach_eoc(rows: &mut [StudyRow]) -> Result<()> {
    let errors: Vec<f64> = rows.iter().map(|r| r.e1).collect();
    let ns: Vec<usize> = rows.iter().map(|r| r.n_cells).collect();
    for (row, rate) in rows.iter_mut().zip(eoc(&errors, &ns)?) {
        row.eoc = rate;
    }
    Ok(())
}

fn check_meshes(meshes: &[usize]) -> Result<()> {
    if meshes.len() < 2 {
        return Err(Error::Config(
            "a convergence study needs at least two meshes".into(),
        ));
    }
    if meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("mesh sizes must increase strictly".into()));
    }
    Ok(())
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}"))),
    }
}

/// Runs `config` on every mesh in parallel and tabulates E1, EOC and delta.
/// `jobs` caps the number of worker threads.
pub fn convergence_study(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    meshes: &[usize],
    jobs: Option<usize>,
) -> Result<(Vec<StudyRow>, Vec<RunReport>)> {
    check_meshes(meshes)?;
    let reports = in_pool(jobs, || {
        meshes
            .par_iter()
            .map(|&n| {
                let grid = Grid1D::new(n, problem.domain)?;
                run_simulation(config, problem, &grid).map(|(_, r)| r)
            })
            .collect::<Result<Vec<RunReport>>>()
    })??;
    let mut rows = reports
        .iter()
        .map(|r| {
            let e1 = r.e1.ok_or_else(|| {
                Error::Precondition(format!("no exact solution at t = {}", r.final_time))
            })?;
            Ok(StudyRow {
                n_cells: r.n_cells,
                e1,
                eoc: None,
                delta: Some(r.delta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    attach_eoc(&mut rows)?;
    Ok((rows, reports))
}

/// L1 distance between the flux differences `dx du_i/dt` of the
/// semi-discrete operator at the initial cell averages and the exact
/// `-(f(u_0(x_{i+1/2})) - f(u_0(x_{i-1/2})))`.
pub fn semi_discrete_error(
    problem: &ProblemSpec,
    n_cells: usize,
    reconstruction: Reconstruction,
    limiter: &LimiterConfig,
) -> Result<f64> {
    if limiter.kind.is_fct() {
        return Err(Error::Config(format!(
            "{} limiting has no semi-discrete form",
            limiter.kind
        )));
    }
    let grid = Grid1D::new(n_cells, problem.domain)?;
    let u = problem.initial_cell_averages(&grid)?;
    let rhs = semi_discrete_rhs(problem, &grid, &u, reconstruction, limiter)?;
    let dx = grid.dx();
    let face_flux: Vec<f64> = (0..n_cells)
        .map(|k| problem.flux.eval(problem.initial_value(grid.interface(k))))
        .collect();
    let exact = flux_divergence(&face_flux, dx);
    Ok(dx * l1_distance(&rhs, &exact, dx))
}

fn semi_discrete_rhs(
    problem: &ProblemSpec,
    grid: &Grid1D,
    u: &[f64],
    reconstruction: Reconstruction,
    limiter: &LimiterConfig,
) -> Result<Vec<f64>> {
    let op = SpatialOperator::new(problem, grid, reconstruction).with_limiter(*limiter);
    let faces = op.faces(u, u)?;
    let flux = space_limited_flux(&faces, u, limiter, &op.bounds(u))?.flux;
    Ok(flux_divergence(&flux, grid.dx()))
}

/// Semi-discrete convergence table.
pub fn semi_discrete_study(
    problem: &ProblemSpec,
    meshes: &[usize],
    reconstruction: Reconstruction,
    limiter: &LimiterConfig,
    jobs: Option<usize>,
) -> Result<Vec<StudyRow>> {
    check_meshes(meshes)?;
    let errors = in_pool(jobs, || {
        meshes
            .par_iter()
            .map(|&n| semi_discrete_error(problem, n, reconstruction, limiter))
            .collect::<Result<Vec<f64>>>()
    })??;
    let mut rows: Vec<StudyRow> = meshes
        .iter()
        .zip(errors)
        .map(|(&n_cells, e1)| StudyRow {
            n_cells,
            e1,
            eoc: None,
            delta: None,
        })
        .collect();
    attach_eoc(&mut rows)?;
    Ok(rows)
}

/// CSV rendering `N,E1,EOC,delta` with three significant digits.
pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("N,E1,EOC,delta\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.n_cells,
            format_sci3(r.e1),
            format_eoc(r.eoc),
            r.delta.map(format_sci3).unwrap_or_default()
        ));
    }
    s
}
