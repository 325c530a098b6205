//! Admissible bounds and flux-correction factors.
//!
//! The spatial limiters (GMC, LMC) correct the antidiffusive fluxes of one
//! semi-discrete right-hand side. The space-time limiters correct the
//! difference between a low-order forward Euler flux and the combined
//! flux of a Runge-Kutta stage or update, with GMC, LMC or FCT bounds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{flux_difference, wrap};
use crate::problem::ProblemSpec;
use crate::spatial::FaceData;

/// Relative threshold below which a flux sum counts as zero.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-14;
/// Largest bound violation tolerated after a limited update whose time step
/// satisfies the CFL condition.
pub const BOUND_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimiterKind {
    None,
    /// Global monolithic convex limiting.
    Gmc,
    /// Local monolithic convex limiting.
    Lmc,
    /// Zalesak's flux-corrected transport.
    Fct,
    /// Facewise flux-corrected transport.
    LocalFct,
}

impl LimiterKind {
    pub fn name(&self) -> &'static str {
        match self {
            LimiterKind::None => "none",
            LimiterKind::Gmc => "gmc",
            LimiterKind::Lmc => "lmc",
            LimiterKind::Fct => "fct",
            LimiterKind::LocalFct => "local-fct",
        }
    }

    /// FCT bounds depend on the time step and have no semi-discrete form.
    pub fn is_fct(&self) -> bool {
        matches!(self, LimiterKind::Fct | LimiterKind::LocalFct)
    }
}

impl fmt::Display for LimiterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LimiterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            LimiterKind::None,
            LimiterKind::Gmc,
            LimiterKind::Lmc,
            LimiterKind::Fct,
            LimiterKind::LocalFct,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown limiter '{s}'")))
    }
}

/// Which bounds each cell must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMode {
    /// Minimum and maximum of the initial data, the same for every cell.
    GlobalInitialData,
    /// Extrema over the cell and its two neighbors.
    LocalStencil,
}

impl FromStr for BoundsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" | "global-initial-data" => Ok(BoundsMode::GlobalInitialData),
            "local" | "local-stencil" => Ok(BoundsMode::LocalStencil),
            _ => Err(Error::Config(format!("unknown bounds mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimiterConfig {
    pub kind: LimiterKind,
    /// Relaxation of the GMC/LMC bounds; ignored by FCT kinds.
    pub gamma: f64,
    pub bounds_mode: BoundsMode,
}

impl LimiterConfig {
    pub fn none() -> Self {
        Self {
            kind: LimiterKind::None,
            gamma: 0.0,
            bounds_mode: BoundsMode::GlobalInitialData,
        }
    }

    pub fn gmc(gamma: f64) -> Self {
        Self {
            kind: LimiterKind::Gmc,
            gamma,
            bounds_mode: BoundsMode::GlobalInitialData,
        }
    }

    pub fn is_active(&self) -> bool {
        self.kind != LimiterKind::None
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// The relaxation that enters the CFL condition.
    pub fn effective_gamma(&self) -> f64 {
        if self.kind.is_fct() {
            0.0
        } else {
            self.gamma
        }
    }
}

/// Per-cell admissible interval `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CellBounds {
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Self {
        Self {
            lower: vec![lower; n],
            upper: vec![upper; n],
        }
    }

    /// First cell leaving its interval by more than `tol`, with the amount.
    pub fn first_violation(&self, u: &[f64], tol: f64) -> Option<(usize, f64)> {
        u.iter().enumerate().find_map(|(i, &v)| {
            let amount = (self.lower[i] - v).max(v - self.upper[i]);
            (amount > tol || !v.is_finite()).then_some((i, amount))
        })
    }
}

/// Bounds `Q_i^-` and `Q_i^+` on the sum of limited fluxes of each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsPair {
    pub qminus: Vec<f64>,
    pub qplus: Vec<f64>,
}

/// One correction factor per interface.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionFactors {
    pub alpha: Vec<f64>,
}

/// Limited interface flux with the factors that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Limited {
    pub flux: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn cell_bounds(u: &[f64], mode: BoundsMode, problem: &ProblemSpec) -> CellBounds {
    match mode {
        BoundsMode::GlobalInitialData => {
            CellBounds::uniform(u.len(), problem.global_umin, problem.global_umax)
        }
        BoundsMode::LocalStencil => local_bounds(u),
    }
}

fn local_bounds(u: &[f64]) -> CellBounds {
    let n = u.len();
    let (mut lower, mut upper) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (a, b, c) = (u[wrap(n, i, -1)], u[i], u[wrap(n, i, 1)]);
        lower.push(a.min(b).min(c));
        upper.push(a.max(b).max(c));
    }
    CellBounds { lower, upper }
}

/// GMC bounds `Q_i^± = d_i [(u^±_i - ū^L_i) + gamma (u^±_i - u_i)]`.
pub fn gmc_bounds(
    u: &[f64],
    bar_aggregate: &[f64],
    d: &[f64],
    bounds: &CellBounds,
    gamma: f64,
) -> BoundsPair {
    let n = u.len();
    let mut q = BoundsPair {
        qminus: Vec::with_capacity(n),
        qplus: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        q.qminus
            .push(d[i] * ((lo - bar_aggregate[i]) + gamma * (lo - u[i])));
        q.qplus
            .push(d[i] * ((hi - bar_aggregate[i]) + gamma * (hi - u[i])));
    }
    q
}

#[inline]
fn ratio(q: f64, p: f64) -> f64 {
    if p.abs() <= ZERO_SUM_TOLERANCE * (1.0 + q.abs()) {
        1.0
    } else {
        (q / p).clamp(0.0, 1.0)
    }
}

/// Zalesak-type correction factors for fluxes `antidiff` and bounds `q`.
pub fn zalesak_factors(antidiff: &[f64], q: &BoundsPair) -> CorrectionFactors {
    let n = antidiff.len();
    let mut rplus = Vec::with_capacity(n);
    let mut rminus = Vec::with_capacity(n);
    for i in 0..n {
        let right = antidiff[i];
        let left = -antidiff[(i + n - 1) % n];
        let pplus = right.max(0.0) + left.max(0.0);
        let pminus = right.min(0.0) + left.min(0.0);
        rplus.push(ratio(q.qplus[i], pplus));
        rminus.push(ratio(q.qminus[i], pminus));
    }
    let alpha = (0..n)
        .map(|k| {
            let j = if k + 1 == n { 0 } else { k + 1 };
            let f = antidiff[k];
            if f > 0.0 {
                rplus[k].min(rminus[j])
            } else if f < 0.0 {
                rminus[k].min(rplus[j])
            } else {
                1.0
            }
        })
        .collect();
    CorrectionFactors { alpha }
}

/// Facewise clip of `f = F_ij` given the bounds of both cells sharing the face.
#[inline]
fn clip(f: f64, qij_minus: f64, qij_plus: f64, qji_minus: f64, qji_plus: f64) -> f64 {
    if f > 0.0 {
        qij_plus.min(f).min(-qji_minus).max(0.0)
    } else {
        qij_minus.max(f).max(-qji_plus).min(0.0)
    }
}

/// LMC limited fluxes with facewise bounds
/// `Q_ij^± = lambda [(u^±_i - ū^L_ij) + gamma (u^±_i - u_i)]`.
pub fn lmc_limit(
    antidiff: &[f64],
    u: &[f64],
    bar_low: &[f64],
    lambda: &[f64],
    bounds: &CellBounds,
    gamma: f64,
) -> Vec<f64> {
    lmc_limit_scaled(antidiff, u, bar_low, lambda, bounds, gamma, 1.0)
}

fn lmc_limit_scaled(
    antidiff: &[f64],
    u: &[f64],
    bar_low: &[f64],
    lambda: &[f64],
    bounds: &CellBounds,
    gamma: f64,
    scale: f64,
) -> Vec<f64> {
    let n = antidiff.len();
    (0..n)
        .map(|k| {
            let j = if k + 1 == n { 0 } else { k + 1 };
            let w = scale * lambda[k];
            let q = |c: usize, m: f64| w * ((m - bar_low[k]) + gamma * (m - u[c]));
            clip(
                antidiff[k],
                q(k, bounds.lower[k]),
                q(k, bounds.upper[k]),
                q(j, bounds.lower[j]),
                q(j, bounds.upper[j]),
            )
        })
        .collect()
}

/// FCT bounds `Q_i^± = (dx/dt)(u^±_i - u^FE_i)`, halved for the facewise
/// (localized) variant.
pub fn fct_bounds(
    u_fe: &[f64],
    dt: f64,
    dx: f64,
    bounds: &CellBounds,
    localized: bool,
) -> Result<BoundsPair> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Precondition(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if let Some((cell, amount)) = bounds.first_violation(u_fe, BOUND_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "low-order predictor leaves its bounds by {amount:e} in cell {cell}"
        )));
    }
    Ok(fct_bounds_unchecked(u_fe, dt, dx, bounds, localized))
}

fn fct_bounds_unchecked(
    u_fe: &[f64],
    dt: f64,
    dx: f64,
    bounds: &CellBounds,
    localized: bool,
) -> BoundsPair {
    let scale = if localized { 0.5 * dx / dt } else { dx / dt };
    BoundsPair {
        qminus: u_fe
            .iter()
            .zip(&bounds.lower)
            .map(|(&v, &lo)| scale * (lo - v))
            .collect(),
        qplus: u_fe
            .iter()
            .zip(&bounds.upper)
            .map(|(&v, &hi)| scale * (hi - v))
            .collect(),
    }
}

fn clamp_signs(q: &mut BoundsPair) {
    q.qminus.iter_mut().for_each(|v| *v = v.min(0.0));
    q.qplus.iter_mut().for_each(|v| *v = v.max(0.0));
}

fn facewise_with_bounds(antidiff: &[f64], q: &BoundsPair) -> Vec<f64> {
    let n = antidiff.len();
    (0..n)
        .map(|k| {
            let j = if k + 1 == n { 0 } else { k + 1 };
            clip(
                antidiff[k],
                q.qminus[k],
                q.qplus[k],
                q.qminus[j],
                q.qplus[j],
            )
        })
        .collect()
}

fn factors_from_limited(antidiff: &[f64], limited: &[f64]) -> Vec<f64> {
    antidiff
        .iter()
        .zip(limited)
        .map(|(&f, &g)| if f == 0.0 || f == g { 1.0 } else { g / f })
        .collect()
}

/// `low - F*` per interface, or `high` where the flux is untouched.
fn corrected_flux(low: &[f64], high: &[f64], antidiff: &[f64], limited: &[f64]) -> Vec<f64> {
    (0..low.len())
        .map(|k| {
            if limited[k] == antidiff[k] {
                high[k]
            } else {
                low[k] - limited[k]
            }
        })
        .collect()
}

/// Interface flux of a semi-discrete right-hand side limited by `cfg`
/// (`None`, GMC or LMC).
pub fn space_limited_flux(
    faces: &FaceData,
    u: &[f64],
    cfg: &LimiterConfig,
    bounds: &CellBounds,
) -> Result<Limited> {
    let n = faces.n();
    match cfg.kind {
        LimiterKind::None => Ok(Limited {
            flux: faces.lf_high.clone(),
            alpha: vec![1.0; n],
        }),
        LimiterKind::Gmc => {
            let q = gmc_bounds(u, &faces.bar_aggregate(), &faces.d(), bounds, cfg.gamma);
            let alpha = zalesak_factors(&faces.antidiff, &q).alpha;
            let flux = crate::spatial::blended_flux(faces, &alpha);
            Ok(Limited { flux, alpha })
        }
        LimiterKind::Lmc => {
            let limited = lmc_limit(
                &faces.antidiff,
                u,
                &faces.bar_low,
                &faces.lambda,
                bounds,
                cfg.gamma,
            );
            Ok(Limited {
                flux: corrected_flux(&faces.lf_low, &faces.lf_high, &faces.antidiff, &limited),
                alpha: factors_from_limited(&faces.antidiff, &limited),
            })
        }
        LimiterKind::Fct | LimiterKind::LocalFct => Err(Error::Config(format!(
            "{} limiting has no semi-discrete form",
            cfg.kind
        ))),
    }
}

/// Data of the step start shared by all space-time limited updates of a step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub u_n: &'a [f64],
    /// Interface data of `u_n`; its low-order flux is `H^FE`.
    pub faces_n: &'a FaceData,
    pub bounds: &'a CellBounds,
    pub dt: f64,
    pub dx: f64,
}

/// Result of a space-time limited update.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitedUpdate {
    pub state: Vec<f64>,
    /// Flux such that `state = u_n - dt/dx (flux diff)`.
    pub flux: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Whether `(1 + gamma) c dt d_i / dx <= 1` held in every cell.
    pub cfl_ok: bool,
}

/// Limits `y = u_n - dt/dx (target diff)` against the predictor
/// `u_n - c dt/dx (H^FE diff)`. `target` is `sum_s a_ms H^(s)` for a stage
/// with `c = c_m`, or `sum_m b_m H^(m)` for the final update with `c = 1`.
pub fn stage_limit(
    ctx: &StepContext<'_>,
    c: f64,
    target: &[f64],
    cfg: &LimiterConfig,
) -> Result<LimitedUpdate> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::Precondition(format!(
            "stage abscissa must be nonnegative, got {c}"
        )));
    }
    let n = ctx.u_n.len();
    let r = ctx.dt / ctx.dx;
    let fe_flux: Vec<f64> = ctx.faces_n.lf_low.iter().map(|&h| c * h).collect();
    let antidiff: Vec<f64> = fe_flux.iter().zip(target).map(|(&a, &b)| a - b).collect();
    let d = ctx.faces_n.d();
    let nu_max = d.iter().fold(0.0_f64, |m, &di| m.max(di)) * c * r * (1.0 + cfg.effective_gamma());
    let cfl_ok = nu_max <= 1.0 + 1e-12;

    let (flux, alpha) = match cfg.kind {
        LimiterKind::None => (target.to_vec(), vec![1.0; n]),
        LimiterKind::Gmc => {
            let mut q = gmc_bounds(
                ctx.u_n,
                &ctx.faces_n.bar_aggregate(),
                &d,
                ctx.bounds,
                cfg.gamma,
            );
            q.qminus.iter_mut().for_each(|v| *v *= c);
            q.qplus.iter_mut().for_each(|v| *v *= c);
            clamp_signs(&mut q);
            let alpha = zalesak_factors(&antidiff, &q).alpha;
            let flux = (0..n)
                .map(|k| {
                    if alpha[k] == 1.0 {
                        target[k]
                    } else {
                        fe_flux[k] - alpha[k] * antidiff[k]
                    }
                })
                .collect();
            (flux, alpha)
        }
        LimiterKind::Lmc => {
            let f = ctx.faces_n;
            let limited = lmc_limit_scaled(
                &antidiff, ctx.u_n, &f.bar_low, &f.lambda, ctx.bounds, cfg.gamma, c,
            );
            (
                corrected_flux(&fe_flux, target, &antidiff, &limited),
                factors_from_limited(&antidiff, &limited),
            )
        }
        LimiterKind::Fct | LimiterKind::LocalFct => {
            let y_fe: Vec<f64> = ctx
                .u_n
                .iter()
                .zip(flux_difference(&fe_flux))
                .map(|(&u, df)| u - r * df)
                .collect();
            let localized = cfg.kind == LimiterKind::LocalFct;
            let mut q = if cfl_ok {
                fct_bounds(&y_fe, ctx.dt, ctx.dx, ctx.bounds, localized)?
            } else {
                fct_bounds_unchecked(&y_fe, ctx.dt, ctx.dx, ctx.bounds, localized)
            };
            clamp_signs(&mut q);
            if localized {
                let limited = facewise_with_bounds(&antidiff, &q);
                (
                    corrected_flux(&fe_flux, target, &antidiff, &limited),
                    factors_from_limited(&antidiff, &limited),
                )
            } else {
                let alpha = zalesak_factors(&antidiff, &q).alpha;
                let flux = (0..n)
                    .map(|k| {
                        if alpha[k] == 1.0 {
                            target[k]
                        } else {
                            fe_flux[k] - alpha[k] * antidiff[k]
                        }
                    })
                    .collect();
                (flux, alpha)
            }
        }
    };

    let state: Vec<f64> = ctx
        .u_n
        .iter()
        .zip(flux_difference(&flux))
        .map(|(&u, df)| u - r * df)
        .collect();
    if cfg.is_active() && cfl_ok {
        if let Some((cell, amount)) = ctx.bounds.first_violation(&state, BOUND_TOLERANCE) {
            return Err(Error::BoundViolation { cell, amount });
        }
    }
    Ok(LimitedUpdate {
        state,
        flux,
        alpha,
        cfl_ok,
    })
}

/// Limits the final Runge-Kutta update with combined flux `h_rk`.
pub fn final_stage_limit(
    ctx: &StepContext<'_>,
    h_rk: &[f64],
    cfg: &LimiterConfig,
) -> Result<LimitedUpdate> {
    stage_limit(ctx, 1.0, h_rk, cfg)
}
