//! Single time steps of the explicit Runge-Kutta methods, in flux form.
//!
//! Every stage is written as `y = u_n - dt/dx (H diff)` for a combined
//! interface flux `H`, so limited and unlimited updates conserve mass up to
//! round-off.

use crate::error::{Error, Result};
use crate::grid::flux_difference;
use crate::limiters::{final_stage_limit, stage_limit, LimiterConfig, StepContext};
use crate::spatial::{flux_divergence, SpatialOperator};
use crate::tableau::{extrapolation_substeps, ButcherTableau, ShuOsher};

/// Result of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: Vec<f64>,
    /// Stage values `y^(2), ..., y^(M)` in evaluation order.
    pub stages: Vec<Vec<f64>>,
    /// `dt / dx * max_i d_i` at the step start.
    pub courant: f64,
}

/// Where space-time limiting is applied inside a Butcher-form step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpaceTimeLimiting {
    pub stage: Option<LimiterConfig>,
    pub last: Option<LimiterConfig>,
}

fn check_finite(y: &[f64], stage: usize, time: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { stage, time })
    }
}

fn apply_flux(u_n: &[f64], flux: &[f64], r: f64) -> Vec<f64> {
    u_n.iter()
        .zip(flux_difference(flux))
        .map(|(&u, d)| u - r * d)
        .collect()
}

fn combine(weights: &[f64], fluxes: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&w, h) in weights.iter().zip(fluxes) {
        if w != 0.0 {
            out.iter_mut().zip(h).for_each(|(o, &v)| *o += w * v);
        }
    }
    out
}

fn courant(d: &[f64], dt: f64, dx: f64) -> f64 {
    d.iter().fold(0.0_f64, |m, &v| m.max(v)) * dt / dx
}

/// Forward Euler step `u_n + dt F(u_n)`.
pub fn euler_step(
    op: &SpatialOperator<'_>,
    u_n: &[f64],
    dt: f64,
    time: f64,
) -> Result<StepOutcome> {
    let eval = op.evaluate(u_n, u_n)?;
    let dx = op.grid.dx();
    let state = apply_flux(u_n, &eval.flux, dt / dx);
    check_finite(&state, 1, time)?;
    Ok(StepOutcome {
        state,
        stages: Vec::new(),
        courant: courant(&eval.faces.d(), dt, dx),
    })
}

/// Five-stage SSP step in the Shu-Osher form with its printed coefficients.
pub fn ssp54_step(
    op: &SpatialOperator<'_>,
    u_n: &[f64],
    dt: f64,
    time: f64,
) -> Result<StepOutcome> {
    let so = ShuOsher::ssp54();
    let dx = op.grid.dx();
    let mut ys: Vec<Vec<f64>> = vec![u_n.to_vec()];
    let mut rhs: Vec<Vec<f64>> = Vec::with_capacity(5);
    let mut max_d = 0.0;
    for (row, (alpha, beta)) in so.alpha.iter().zip(&so.beta).enumerate() {
        let l = ys.len() - 1;
        let eval = op.evaluate(&ys[l], u_n)?;
        if l == 0 {
            max_d = courant(&eval.faces.d(), dt, dx);
        }
        rhs.push(flux_divergence(&eval.flux, dx));
        let mut y = vec![0.0; u_n.len()];
        for (k, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
            if a != 0.0 {
                y.iter_mut().zip(&ys[k]).for_each(|(o, &v)| *o += a * v);
            }
            if b != 0.0 {
                y.iter_mut()
                    .zip(&rhs[k])
                    .for_each(|(o, &v)| *o += b * dt * v);
            }
        }
        check_finite(&y, row + 1, time)?;
        ys.push(y);
    }
    let state = ys.pop().expect("five stages");
    ys.remove(0);
    Ok(StepOutcome {
        state,
        stages: ys,
        courant: max_d,
    })
}

/// One step of the method `tableau`, optionally limiting each stage and/or
/// the final update with the space-time limiter.
pub fn generic_erk_step(
    tableau: &ButcherTableau,
    op: &SpatialOperator<'_>,
    u_n: &[f64],
    dt: f64,
    limiting: SpaceTimeLimiting,
    time: f64,
) -> Result<StepOutcome> {
    let n = u_n.len();
    let dx = op.grid.dx();
    let r = dt / dx;
    let first = op.evaluate(u_n, u_n)?;
    let faces_n = first.faces;
    let bounds = op.bounds(u_n);
    let ctx = StepContext {
        u_n,
        faces_n: &faces_n,
        bounds: &bounds,
        dt,
        dx,
    };
    let mut fluxes = vec![first.flux];
    let mut stages = Vec::with_capacity(tableau.stages());
    for m in 1..tableau.stages() {
        let target = combine(&tableau.a[m][..m], &fluxes, n);
        let y = match &limiting.stage {
            Some(cfg) => stage_limit(&ctx, tableau.c[m], &target, cfg)?.state,
            None => apply_flux(u_n, &target, r),
        };
        check_finite(&y, m + 1, time)?;
        fluxes.push(op.evaluate(&y, u_n)?.flux);
        stages.push(y);
    }
    let h_rk = combine(&tableau.b, &fluxes, n);
    let state = match &limiting.last {
        Some(cfg) => final_stage_limit(&ctx, &h_rk, cfg)?.state,
        None => apply_flux(u_n, &h_rk, r),
    };
    check_finite(&state, tableau.stages() + 1, time)?;
    Ok(StepOutcome {
        state,
        stages,
        courant: courant(&faces_n.d(), dt, dx),
    })
}

/// Euler extrapolation step of order `order` computed through its sequential
/// Euler sub-steps, with an optionally limited final update.
pub fn extrapolation_step(
    order: usize,
    op: &SpatialOperator<'_>,
    u_n: &[f64],
    dt: f64,
    last: Option<&LimiterConfig>,
    time: f64,
) -> Result<StepOutcome> {
    let tableau = ButcherTableau::extrapolated_euler(order)?;
    let n = u_n.len();
    let dx = op.grid.dx();
    let first = op.evaluate(u_n, u_n)?;
    let faces_n = first.faces;
    let mut fluxes = vec![first.flux];
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(tableau.stages());
    for (idx, step) in extrapolation_substeps(order).iter().enumerate() {
        let source = if step.source == 0 {
            u_n
        } else {
            &stages[step.source - 1]
        };
        let y = apply_flux(
            source,
            &fluxes[step.source],
            dt / (step.divisor as f64 * dx),
        );
        check_finite(&y, idx + 2, time)?;
        fluxes.push(op.evaluate(&y, u_n)?.flux);
        stages.push(y);
    }
    let h_rk = combine(&tableau.b, &fluxes, n);
    let state = match last {
        Some(cfg) => {
            let bounds = op.bounds(u_n);
            let ctx = StepContext {
                u_n,
                faces_n: &faces_n,
                bounds: &bounds,
                dt,
                dx,
            };
            final_stage_limit(&ctx, &h_rk, cfg)?.state
        }
        None => apply_flux(u_n, &h_rk, dt / dx),
    };
    check_finite(&state, tableau.stages() + 1, time)?;
    Ok(StepOutcome {
        state,
        stages,
        courant: courant(&faces_n.d(), dt, dx),
    })
}

/// Eleven-stage fifth-order Euler extrapolation step.
pub fn exe_rk5_step(
    op: &SpatialOperator<'_>,
    u_n: &[f64],
    dt: f64,
    last: Option<&LimiterConfig>,
    time: f64,
) -> Result<StepOutcome> {
    extrapolation_step(5, op, u_n, dt, last, time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::problem::{ProblemPreset, ProblemSpec};
    use crate::reconstruction::Reconstruction;

    fn setup(preset: ProblemPreset, n: usize) -> (ProblemSpec, Grid1D) {
        let p = ProblemSpec::preset(preset);
        let g = Grid1D::new(n, p.domain).unwrap();
        (p, g)
    }

    #[test]
    fn constant_state_is_fixed_by_every_method() {
        let (p, g) = setup(ProblemPreset::Burgers, 16);
        let p = p.with_constant_initial(0.3);
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5);
        let u = vec![0.3; 16];
        let dt = 0.1;
        let check = |s: StepOutcome| assert!(s.state.iter().all(|&v| (v - 0.3).abs() < 1e-15));
        check(ssp54_step(&op, &u, dt, 0.0).unwrap());
        check(exe_rk5_step(&op, &u, dt, None, 0.0).unwrap());
        for t in [ButcherTableau::rk76(), ButcherTableau::euler()] {
            check(generic_erk_step(&t, &op, &u, dt, SpaceTimeLimiting::default(), 0.0).unwrap());
        }
    }

    #[test]
    fn euler_tableau_is_forward_euler() {
        let (p, g) = setup(ProblemPreset::AdvectionSmooth, 20);
        let u = p.initial_cell_averages(&g).unwrap();
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5);
        let dt = 0.01;
        let a = generic_erk_step(
            &ButcherTableau::euler(),
            &op,
            &u,
            dt,
            SpaceTimeLimiting::default(),
            0.0,
        )
        .unwrap();
        let rhs = op.rhs(&u).unwrap();
        for i in 0..20 {
            assert!((a.state[i] - (u[i] + dt * rhs[i])).abs() < 1e-15);
        }
        let b = euler_step(&op, &u, dt, 0.0).unwrap();
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn shu_osher_and_butcher_forms_agree() {
        let (p, g) = setup(ProblemPreset::Burgers, 50);
        let u = p.initial_cell_averages(&g).unwrap();
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5);
        let dt = 0.4 * g.dx();
        let so = ssp54_step(&op, &u, dt, 0.0).unwrap();
        let bt = generic_erk_step(
            &ButcherTableau::ssp54(),
            &op,
            &u,
            dt,
            SpaceTimeLimiting::default(),
            0.0,
        )
        .unwrap();
        for (a, b) in so.state.iter().zip(&bt.state) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn extrapolation_matches_butcher_form() {
        let (p, g) = setup(ProblemPreset::Burgers, 40);
        let u = p.initial_cell_averages(&g).unwrap();
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5);
        let dt = 0.3 * g.dx();
        for order in 2..=5 {
            let e = extrapolation_step(order, &op, &u, dt, None, 0.0).unwrap();
            let t = ButcherTableau::extrapolated_euler(order).unwrap();
            let b = generic_erk_step(&t, &op, &u, dt, SpaceTimeLimiting::default(), 0.0).unwrap();
            for (x, y) in e.state.iter().zip(&b.state) {
                assert!((x - y).abs() < 1e-13, "order {order}");
            }
        }
    }

    #[test]
    fn nan_is_reported_with_stage() {
        let (p, g) = setup(ProblemPreset::AdvectionSmooth, 10);
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5);
        let mut u = vec![0.5; 10];
        u[3] = f64::NAN;
        let r = ssp54_step(&op, &u, 0.01, 0.25);
        assert!(matches!(r, Err(Error::NonFinite { stage: 1, time }) if time == 0.25));
    }
}
