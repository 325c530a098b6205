//! Error norms, convergence rates and bound-violation statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{wrap, Grid1D, MIN_CELLS};
use crate::problem::ProblemSpec;

/// Point values at the cell centers from cell averages, exact for
/// polynomials of degree four.
pub fn point_reconstruct(u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len();
    if n < MIN_CELLS {
        return Err(Error::Precondition(format!(
            "point reconstruction needs at least {MIN_CELLS} cells, got {n}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let at = |o| u[wrap(n, i, o)];
            (9.0 * at(-2) - 116.0 * at(-1) + 2134.0 * u[i] - 116.0 * at(1) + 9.0 * at(2)) / 1920.0
        })
        .collect())
}

/// `dx * sum |v_i - w_i|`.
pub fn l1_distance(v: &[f64], w: &[f64], dx: f64) -> f64 {
    dx * v.iter().zip(w).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Discrete L1 error of the point-reconstructed state against the exact
/// (or reference) solution at the cell centers.
pub fn l1_error(u: &[f64], problem: &ProblemSpec, grid: &Grid1D, t: f64) -> Result<f64> {
    let points = point_reconstruct(u)?;
    let exact = grid
        .cell_centers()
        .iter()
        .map(|&x| problem.exact_solution(x, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(l1_distance(&points, &exact, grid.dx()))
}

/// Experimental orders of convergence; entry `k` compares runs `k - 1` and
/// `k`, entry 0 is `None`, as is any rate involving a zero error.
pub fn eoc(errors: &[f64], n_values: &[usize]) -> Result<Vec<Option<f64>>> {
    if errors.len() != n_values.len() {
        return Err(Error::Precondition(
            "errors and mesh sizes differ in length".into(),
        ));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "mesh sizes must increase strictly".into(),
        ));
    }
    let mut out = vec![None];
    for k in 1..errors.len() {
        let (e0, e1) = (errors[k - 1], errors[k]);
        out.push(if e0 > 0.0 && e1 > 0.0 {
            Some((e0 / e1).ln() / (n_values[k] as f64 / n_values[k - 1] as f64).ln())
        } else {
            None
        });
    }
    out.truncate(errors.len());
    Ok(out)
}

/// Worst undershoot and overshoot margins of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    /// `min (u - umin)` over all samples.
    pub delta_minus: f64,
    /// `min (umax - u)` over all samples.
    pub delta_plus: f64,
    pub delta: f64,
}

/// Running minimum of the margins to `[umin, umax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTracker {
    umin: f64,
    umax: f64,
    delta_minus: f64,
    delta_plus: f64,
    samples: usize,
}

impl BoundTracker {
    pub fn new(umin: f64, umax: f64) -> Self {
        Self {
            umin,
            umax,
            delta_minus: f64::INFINITY,
            delta_plus: f64::INFINITY,
            samples: 0,
        }
    }

    pub fn observe(&mut self, u: &[f64]) {
        for &v in u {
            self.delta_minus = self.delta_minus.min(v - self.umin);
            self.delta_plus = self.delta_plus.min(self.umax - v);
        }
        self.samples += 1;
    }

    pub fn result(&self) -> Option<BoundViolation> {
        (self.samples > 0).then(|| BoundViolation {
            delta_minus: self.delta_minus,
            delta_plus: self.delta_plus,
            delta: self.delta_minus.min(self.delta_plus),
        })
    }
}

/// Bound-violation margins over a history of states.
pub fn bound_violation<'a>(
    history: impl IntoIterator<Item = &'a [f64]>,
    umin: f64,
    umax: f64,
) -> Result<BoundViolation> {
    let mut tracker = BoundTracker::new(umin, umax);
    history.into_iter().for_each(|u| tracker.observe(u));
    tracker
        .result()
        .ok_or_else(|| Error::Precondition("empty state history".into()))
}

/// Scientific notation with three significant digits, e.g. `1.35e-07`.
pub fn format_sci3(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            let sign = if e < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", e.abs())
        }
        None => s,
    }
}

/// Convergence rate with two decimals, blank when undefined.
pub fn format_eoc(eoc: Option<f64>) -> String {
    eoc.map(|v| format!("{v:.2}")).unwrap_or_default()
}
