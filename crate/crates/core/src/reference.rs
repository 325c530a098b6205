//! Fine-grid reference solutions for problems without a closed-form
//! solution, with a plain-text cache.
//!
//! The reference is a first-order local Lax-Friedrichs run on a very fine
//! mesh. First-order monotone schemes converge to the entropy solution, so
//! the profile stands in for the exact solution when measuring errors.
//!
//! Cache format: CSV with a `# t=<time>` comment line, a `x,u` header row and
//! one `x_center,value` row per cell, values printed with round-trip precision.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::problem::ProblemSpec;

/// Cells of the default KPP reference mesh.
pub const KPP_REFERENCE_CELLS: usize = 51_200;
/// Courant number of the reference run.
pub const REFERENCE_CFL: f64 = 0.2;

/// Cell-centred values of a reference solution at a fixed time, evaluated
/// as a piecewise constant function.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    time: f64,
    x_left: f64,
    x_right: f64,
    values: Vec<f64>,
}

impl ReferenceProfile {
    pub fn new(time: f64, domain: (f64, f64), values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || domain.0 >= domain.1 {
            return Err(Error::Config("empty reference profile".into()));
        }
        Ok(Self {
            time,
            x_left: domain.0,
            x_right: domain.1,
            values,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    /// Value of the cell containing `x` (periodically wrapped).
    pub fn value_at(&self, x: f64) -> f64 {
        let len = self.x_right - self.x_left;
        let s = (x - self.x_left).rem_euclid(len) / len;
        let n = self.values.len();
        let i = ((s * n as f64) as usize).min(n - 1);
        self.values[i]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut out = BufWriter::new(fs::File::create(path)?);
        let n = self.values.len();
        let dx = (self.x_right - self.x_left) / n as f64;
        writeln!(
            out,
            "# t={:?} domain={:?},{:?}",
            self.time, self.x_left, self.x_right
        )?;
        writeln!(out, "x,u")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:?},{:?}", self.x_left + (i as f64 + 0.5) * dx, v)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut lines = reader.lines();
        let meta = lines
            .next()
            .ok_or_else(|| Error::Parse("empty reference file".into()))??;
        let (time, domain) = parse_meta(&meta)?;
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        if header.trim() != "x,u" {
            return Err(Error::Parse(format!("unexpected header '{header}'")));
        }
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let value = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::Parse(format!("malformed row '{line}'")))?;
            values.push(
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{e}: '{line}'")))?,
            );
        }
        Self::new(time, domain, values)
    }
}

fn parse_meta(line: &str) -> Result<(f64, (f64, f64))> {
    let bad = || Error::Parse(format!("malformed reference metadata '{line}'"));
    let rest = line.strip_prefix("# t=").ok_or_else(bad)?;
    let (t, dom) = rest.split_once(" domain=").ok_or_else(bad)?;
    let (a, b) = dom.split_once(',').ok_or_else(bad)?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok((parse(t)?, (parse(a)?, parse(b)?)))
}

/// First-order LLF forward-Euler solution of `problem` at its final time on
/// `n_cells` cells. The wave-speed bound uses the two cell averages.
pub fn llf_reference(problem: &ProblemSpec, n_cells: usize, cfl: f64) -> Result<ReferenceProfile> {
    let grid = Grid1D::new(n_cells, problem.domain)?;
    let mut u = problem.initial_cell_averages(&grid)?.into_inner();
    let dx = grid.dx();
    let n = n_cells;
    let flux = problem.flux;
    let mut fu = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut t = 0.0;
    let t_end = problem.final_time;
    while t < t_end {
        for (f, &v) in fu.iter_mut().zip(&u) {
            *f = flux.eval(v);
        }
        let mut lam_max: f64 = 0.0;
        for k in 0..n {
            let j = if k + 1 == n { 0 } else { k + 1 };
            let lam = flux.wave_speed_bound(u[k], u[j], u[k], u[j]);
            lam_max = lam_max.max(lam);
            h[k] = 0.5 * (fu[k] + fu[j]) - 0.5 * lam * (u[j] - u[k]);
        }
        let mut dt = cfl * dx / lam_max;
        if t + dt > t_end {
            dt = t_end - t;
        }
        let r = dt / dx;
        let mut prev = h[n - 1];
        for i in 0..n {
            u[i] -= r * (h[i] - prev);
            prev = h[i];
        }
        t += dt;
    }
    ReferenceProfile::new(t_end, problem.domain, u)
}

/// Loads the reference cached at `path` if it matches `problem` and
/// `n_cells`; otherwise computes it and writes the cache.
pub fn load_or_build_reference(
    problem: &ProblemSpec,
    n_cells: usize,
    path: &Path,
) -> Result<ReferenceProfile> {
    if path.exists() {
        match ReferenceProfile::read_csv(path) {
            Ok(r)
                if r.n_cells() == n_cells
                    && (r.time() - problem.final_time).abs() <= 1e-12
                    && (r.x_left - problem.domain.0).abs() <= 1e-12
                    && (r.x_right - problem.domain.1).abs() <= 1e-12 =>
            {
                return Ok(r);
            }
            Ok(_) => log::warn!(
                "reference cache {} does not match, rebuilding",
                path.display()
            ),
            Err(e) => log::warn!("unreadable reference cache {}: {e}", path.display()),
        }
    }
    log::info!("building {n_cells}-cell reference solution");
    let r = llf_reference(problem, n_cells, REFERENCE_CFL)?;
    r.write_csv(path)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemPreset;

    #[test]
    fn piecewise_constant_lookup() {
        let r = ReferenceProfile::new(1.0, (0.0, 1.0), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.value_at(0.1), 1.0);
        assert_eq!(r.value_at(0.3), 2.0);
        assert_eq!(r.value_at(0.99), 4.0);
        assert_eq!(r.value_at(1.1), 1.0);
        assert_eq!(r.value_at(-0.1), 4.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("bpflux-ref-{}", std::process::id()));
        let path = dir.join("ref.csv");
        let r = ReferenceProfile::new(0.75, (0.0, 2.0), vec![0.1, 1.0 / 3.0, -2.5e-17]).unwrap();
        r.write_csv(&path).unwrap();
        let back = ReferenceProfile::read_csv(&path).unwrap();
        assert_eq!(r, back);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn llf_reference_preserves_mass_and_bounds() {
        let p = ProblemSpec::preset(ProblemPreset::Kpp)
            .with_final_time(0.1)
            .unwrap();
        let r = llf_reference(&p, 200, 0.2).unwrap();
        let grid = Grid1D::new(200, p.domain).unwrap();
        let m0 = p.initial_cell_averages(&grid).unwrap().mass(grid.dx());
        let m1: f64 = r.values().iter().sum::<f64>() * grid.dx();
        assert!((m0 - m1).abs() < 1e-13);
        assert!(r
            .values()
            .iter()
            .all(|&v| (-1e-14..=1.0 + 1e-14).contains(&v)));
    }
}
