//! High-order interface traces from cell averages.
//!
//! Every reconstruction returns, for each cell `i`, the trace `minus[i]` at
//! the left interface `x_{i-1/2}` and the trace `plus[i]` at the right
//! interface `x_{i+1/2}`. Stencils wrap periodically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MIN_CELLS;
use crate::limiters::CellBounds;

/// Regularisation of the nonlinear weights.
pub const WENO_EPSILON: f64 = 1e-40;

/// Reconstructed traces `û_i^-` (at `x_{i-1/2}`) and `û_i^+` (at `x_{i+1/2}`).
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceValues {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

/// Available reconstructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruction {
    /// Fifth-order WENO with Jiang-Shu smoothness indicators.
    Weno5,
    /// Fifth-order linear (non-WENO) upwind-biased reconstruction.
    Linear5,
    /// Piecewise constant: traces equal the cell averages.
    FirstOrder,
}

impl Reconstruction {
    pub fn reconstruct(&self, u: &[f64]) -> Result<InterfaceValues> {
        match self {
            Reconstruction::Weno5 => weno5_reconstruct(u),
            Reconstruction::Linear5 => linear5_reconstruct(u),
            Reconstruction::FirstOrder => Ok(InterfaceValues {
                minus: u.to_vec(),
                plus: u.to_vec(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Reconstruction::Weno5 => "weno5",
            Reconstruction::Linear5 => "linear5",
            Reconstruction::FirstOrder => "first-order",
        }
    }
}

impl fmt::Display for Reconstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reconstruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weno5" => Ok(Reconstruction::Weno5),
            "linear5" => Ok(Reconstruction::Linear5),
            "first-order" => Ok(Reconstruction::FirstOrder),
            _ => Err(Error::Config(format!("unknown reconstruction '{s}'"))),
        }
    }
}

fn check_len(u: &[f64]) -> Result<()> {
    if u.len() < MIN_CELLS {
        return Err(Error::Precondition(format!(
            "reconstruction needs at least {MIN_CELLS} cells, got {}",
            u.len()
        )));
    }
    Ok(())
}

/// Applies `face` to the stencil `(u_{i-2}, ..., u_{i+2})` for the right
/// trace and to the mirrored stencil for the left trace.
fn reconstruct_with(u: &[f64], face: impl Fn(f64, f64, f64, f64, f64) -> f64) -> InterfaceValues {
    let n = u.len();
    let at = |i: usize, o: isize| u[crate::grid::wrap(n, i, o)];
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, c, d, e) = (at(i, -2), at(i, -1), u[i], at(i, 1), at(i, 2));
        plus.push(face(a, b, c, d, e));
        minus.push(face(e, d, c, b, a));
    }
    InterfaceValues { minus, plus }
}

/// Left-biased WENO5 value at the right face of the central cell of
/// `(a, b, c, d, e) = (u_{i-2}, ..., u_{i+2})`.
#[inline]
fn weno5_face(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;

    let b0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let b1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let b2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);

    let w0 = 0.1 / (WENO_EPSILON + b0).powi(2);
    let w1 = 0.6 / (WENO_EPSILON + b1).powi(2);
    let w2 = 0.3 / (WENO_EPSILON + b2).powi(2);
    (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)
}

/// Linear fifth-order value at the right face of the central cell.
#[inline]
fn linear5_face(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    (2.0 * a - 13.0 * b + 47.0 * c + 27.0 * d - 3.0 * e) / 60.0
}

/// Classical fifth-order WENO reconstruction (Jiang-Shu indicators,
/// `eps = 1e-40`, exponent 2).
pub fn weno5_reconstruct(u: &[f64]) -> Result<InterfaceValues> {
    check_len(u)?;
    Ok(reconstruct_with(u, weno5_face))
}

/// Fifth-order linear reconstruction. The left trace of cell `i` is
/// `(-3u_{i-2} + 27u_{i-1} + 47u_i - 13u_{i+1} + 2u_{i+2}) / 60`, the right
/// trace its mirror image.
pub fn linear5_reconstruct(u: &[f64]) -> Result<InterfaceValues> {
    check_len(u)?;
    Ok(reconstruct_with(u, linear5_face))
}

/// Where the slope limiter anchors its blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeLimitAnchor {
    /// Blend towards the average of the state being reconstructed.
    StageAverage,
    /// Blend towards the average at the beginning of the time step.
    PreviousStep,
}

/// Barth-Jespersen type scaling of both traces of each cell towards
/// `anchors[i]` so that they lie in `[lower_i, upper_i]`.
pub fn slope_limit_bp(
    iv: &InterfaceValues,
    anchors: &[f64],
    bounds: &CellBounds,
) -> Result<InterfaceValues> {
    let n = anchors.len();
    if iv.plus.len() != n || iv.minus.len() != n || bounds.lower.len() != n {
        return Err(Error::Precondition(
            "length mismatch in slope limiter".into(),
        ));
    }
    let mut out = iv.clone();
    for i in 0..n {
        let (lo, hi, y) = (bounds.lower[i], bounds.upper[i], anchors[i]);
        if !(y >= lo && y <= hi) {
            return Err(Error::Precondition(format!(
                "anchor {y} of cell {i} lies outside [{lo}, {hi}]"
            )));
        }
        let theta = [iv.minus[i], iv.plus[i]]
            .into_iter()
            .map(|trace| limiter_factor(trace, y, lo, hi))
            .fold(1.0, f64::min);
        if theta < 1.0 {
            out.minus[i] = (y + theta * (iv.minus[i] - y)).clamp(lo, hi);
            out.plus[i] = (y + theta * (iv.plus[i] - y)).clamp(lo, hi);
        }
    }
    Ok(out)
}

#[inline]
fn limiter_factor(trace: f64, anchor: f64, lo: f64, hi: f64) -> f64 {
    if trace > hi {
        ((hi - anchor) / (trace - anchor)).clamp(0.0, 1.0)
    } else if trace < lo {
        ((lo - anchor) / (trace - anchor)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}
