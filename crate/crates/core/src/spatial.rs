//! Numerical fluxes, bar states and the semi-discrete right-hand sides.
//!
//! All per-interface arrays use the interface numbering of [`Grid1D`]:
//! entry `k` belongs to `x_{k+1/2}`, between cells `k` and `k + 1`.

use crate::error::Result;
use crate::grid::{flux_difference, Grid1D};
use crate::limiters::{cell_bounds, space_limited_flux, CellBounds, LimiterConfig};
use crate::problem::{FluxFunction, ProblemSpec};
use crate::reconstruction::{slope_limit_bp, InterfaceValues, Reconstruction, SlopeLimitAnchor};

/// Lax-Friedrichs flux `H(u_L, u_R)` with wave-speed bound `lambda`.
#[inline]
pub fn lf_flux(flux: FluxFunction, u_left: f64, u_right: f64, lambda: f64) -> f64 {
    0.5 * (flux.eval(u_left) + flux.eval(u_right)) - 0.5 * lambda * (u_right - u_left)
}

/// Intermediate state of the two-wave Lax-Friedrichs Riemann fan.
#[inline]
pub fn bar_state_low(flux: FluxFunction, u_left: f64, u_right: f64, lambda: f64) -> f64 {
    0.5 * (u_left + u_right) - (flux.eval(u_right) - flux.eval(u_left)) / (2.0 * lambda)
}

/// Per-interface quantities of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceData {
    /// Low-order flux from the cell averages.
    pub lf_low: Vec<f64>,
    /// High-order flux from the reconstructed traces.
    pub lf_high: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Low-order bar states `ū^L_{k+1/2}`.
    pub bar_low: Vec<f64>,
    /// Antidiffusive flux `lf_low - lf_high`; cell `k` receives `+F` and
    /// cell `k + 1` receives `-F`.
    pub antidiff: Vec<f64>,
}

impl FaceData {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `d_i = lambda_{i+1/2} + lambda_{i-1/2}`.
    pub fn d(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| self.lambda[i] + self.lambda[(i + n - 1) % n])
            .collect()
    }

    /// Cell-wise weighted bar state `ū^L_i`.
    pub fn bar_aggregate(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let l = (i + n - 1) % n;
                (self.lambda[i] * self.bar_low[i] + self.lambda[l] * self.bar_low[l])
                    / (self.lambda[i] + self.lambda[l])
            })
            .collect()
    }
}

/// Fills the interface arrays for cell averages `u` with traces `iv`.
pub fn assemble_faces(u: &[f64], iv: &InterfaceValues, flux: FluxFunction) -> FaceData {
    let n = u.len();
    let mut faces = FaceData {
        lf_low: Vec::with_capacity(n),
        lf_high: Vec::with_capacity(n),
        lambda: Vec::with_capacity(n),
        bar_low: Vec::with_capacity(n),
        antidiff: Vec::with_capacity(n),
    };
    for k in 0..n {
        let j = if k + 1 == n { 0 } else { k + 1 };
        let lam = flux.wave_speed_bound(u[k], u[j], iv.plus[k], iv.minus[j]);
        let low = lf_flux(flux, u[k], u[j], lam);
        let high = lf_flux(flux, iv.plus[k], iv.minus[j], lam);
        faces.lambda.push(lam);
        faces.lf_low.push(low);
        faces.lf_high.push(high);
        faces.bar_low.push(bar_state_low(flux, u[k], u[j], lam));
        faces.antidiff.push(low - high);
    }
    faces
}

/// `-(H_{i+1/2} - H_{i-1/2}) / dx` for an interface flux `h`.
pub fn flux_divergence(h: &[f64], dx: f64) -> Vec<f64> {
    flux_difference(h).map(|d| -d / dx).collect()
}

/// Low-order right-hand side in bar-state (fluctuation) form.
pub fn low_order_rhs(faces: &FaceData, u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let l = (i + n - 1) % n;
            (faces.lambda[i] * (faces.bar_low[i] - u[i])
                + faces.lambda[l] * (faces.bar_low[l] - u[i]))
                / dx
        })
        .collect()
}

/// Low-order right-hand side in flux-difference form.
pub fn low_order_rhs_flux_form(faces: &FaceData, dx: f64) -> Vec<f64> {
    flux_divergence(&faces.lf_low, dx)
}

/// Unlimited high-order right-hand side.
pub fn high_order_rhs(faces: &FaceData, dx: f64) -> Vec<f64> {
    flux_divergence(&faces.lf_high, dx)
}

/// Interface flux `H^L - alpha F`, taking the high-order flux verbatim where
/// `alpha == 1`.
pub fn blended_flux(faces: &FaceData, alpha: &[f64]) -> Vec<f64> {
    faces
        .lf_low
        .iter()
        .zip(&faces.lf_high)
        .zip(faces.antidiff.iter().zip(alpha))
        .map(|((&low, &high), (&f, &a))| if a == 1.0 { high } else { low - a * f })
        .collect()
}

/// Flux-corrected right-hand side for a spatial limiter (`None`, GMC or LMC).
pub fn limited_rhs(
    faces: &FaceData,
    u: &[f64],
    limiter: &LimiterConfig,
    bounds: &CellBounds,
    dx: f64,
) -> Result<Vec<f64>> {
    let limited = space_limited_flux(faces, u, limiter, bounds)?;
    Ok(flux_divergence(&limited.flux, dx))
}

/// Space discretization: reconstruction, optional slope limiting, Lax-Friedrichs
/// fluxes and an optional spatial flux limiter.
#[derive(Debug, Clone)]
pub struct SpatialOperator<'a> {
    pub problem: &'a ProblemSpec,
    pub grid: &'a Grid1D,
    pub reconstruction: Reconstruction,
    pub slope_limit: Option<SlopeLimitAnchor>,
    /// Limiter applied to every right-hand side evaluation.
    pub limiter: LimiterConfig,
}

/// Result of evaluating the space discretization on one state.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub faces: FaceData,
    /// Interface flux actually used (limited if a spatial limiter is set).
    pub flux: Vec<f64>,
}

impl<'a> SpatialOperator<'a> {
    pub fn new(problem: &'a ProblemSpec, grid: &'a Grid1D, reconstruction: Reconstruction) -> Self {
        Self {
            problem,
            grid,
            reconstruction,
            slope_limit: None,
            limiter: LimiterConfig::none(),
        }
    }

    pub fn with_limiter(mut self, limiter: LimiterConfig) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_slope_limit(mut self, anchor: Option<SlopeLimitAnchor>) -> Self {
        self.slope_limit = anchor;
        self
    }

    pub fn bounds(&self, u: &[f64]) -> CellBounds {
        cell_bounds(u, self.limiter.bounds_mode, self.problem)
    }

    /// Interface data of `y`. `u_n` is the state at the start of the step,
    /// used as the anchor for [`SlopeLimitAnchor::PreviousStep`].
    pub fn faces(&self, y: &[f64], u_n: &[f64]) -> Result<FaceData> {
        let mut iv = self.reconstruction.reconstruct(y)?;
        if let Some(anchor) = self.slope_limit {
            let anchors = match anchor {
                SlopeLimitAnchor::StageAverage => y,
                SlopeLimitAnchor::PreviousStep => u_n,
            };
            iv = slope_limit_bp(&iv, anchors, &self.bounds(anchors))?;
        }
        Ok(assemble_faces(y, &iv, self.problem.flux))
    }

    /// Faces and the (possibly limited) interface flux of `y`.
    pub fn evaluate(&self, y: &[f64], u_n: &[f64]) -> Result<Evaluation> {
        let faces = self.faces(y, u_n)?;
        let flux = if self.limiter.is_active() {
            space_limited_flux(&faces, y, &self.limiter, &self.bounds(y))?.flux
        } else {
            faces.lf_high.clone()
        };
        Ok(Evaluation { faces, flux })
    }

    /// `du/dt` at state `y`.
    pub fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let eval = self.evaluate(y, y)?;
        Ok(flux_divergence(&eval.flux, self.grid.dx()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiters::{BoundsMode, LimiterKind};
    use crate::problem::ProblemPreset;
    use proptest::prelude::*;

    const ADV: FluxFunction = FluxFunction::LinearAdvection(1.0);

    #[test]
    fn lf_flux_examples() {
        assert_eq!(lf_flux(FluxFunction::Burgers, 0.3, 0.3, 2.0), 0.045);
        assert_eq!(lf_flux(ADV, 1.0, 0.0, 1.0), 1.0);
        assert_eq!(lf_flux(FluxFunction::Burgers, 1.0, -1.0, 1.0), 1.5);
    }

    #[test]
    fn bar_state_examples() {
        assert_eq!(bar_state_low(FluxFunction::Kpp, 0.2, 0.2, 1.0), 0.2);
        assert_eq!(bar_state_low(ADV, 0.7, 0.1, 1.0), 0.7);
        assert_eq!(bar_state_low(FluxFunction::Burgers, 0.0, 1.0, 1.0), 0.25);
    }

    fn faces_of(u: &[f64], recon: Reconstruction, flux: FluxFunction) -> FaceData {
        assemble_faces(u, &recon.reconstruct(u).unwrap(), flux)
    }

    #[test]
    fn constant_state_has_no_antidiffusion() {
        let u = vec![0.3; 10];
        let f = faces_of(&u, Reconstruction::Weno5, FluxFunction::Burgers);
        assert!(f.antidiff.iter().all(|&a| a.abs() < 1e-16));
        assert!(f.bar_low.iter().all(|&b| (b - 0.3).abs() < 1e-16));
        assert!(low_order_rhs(&f, &u, 0.1).iter().all(|&r| r.abs() < 1e-14));
    }

    #[test]
    fn first_order_traces_give_zero_antidiffusion() {
        let u: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let f = faces_of(&u, Reconstruction::FirstOrder, FluxFunction::Kpp);
        assert_eq!(f.lf_low, f.lf_high);
        assert!(f.antidiff.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn upwind_form_for_advection() {
        let u = [0.1, 0.5, 0.2, 0.9, 0.4, 0.0];
        let f = faces_of(&u, Reconstruction::Weno5, ADV);
        let dx = 0.25;
        let rhs = low_order_rhs(&f, &u, dx);
        for i in 0..u.len() {
            let up = u[(i + u.len() - 1) % u.len()];
            assert!((rhs[i] - (up - u[i]) / dx).abs() < 1e-14);
        }
    }

    #[test]
    fn fluctuation_and_flux_forms_agree() {
        let u: Vec<f64> = (0..20).map(|i| 0.5 + (i as f64).cos()).collect();
        let f = faces_of(&u, Reconstruction::Weno5, FluxFunction::Burgers);
        let a = low_order_rhs(&f, &u, 0.05);
        let b = low_order_rhs_flux_form(&f, 0.05);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn limited_rhs_extremes() {
        let u: Vec<f64> = (0..16)
            .map(|i| if (4..9).contains(&i) { 1.0 } else { 0.0 })
            .collect();
        let f = faces_of(&u, Reconstruction::Weno5, ADV);
        let dx = 1.0 / 16.0;
        let ones = vec![1.0; 16];
        assert_eq!(
            flux_divergence(&blended_flux(&f, &ones), dx),
            high_order_rhs(&f, dx)
        );
        let zeros = vec![0.0; 16];
        let lo = flux_divergence(&blended_flux(&f, &zeros), dx);
        for (a, b) in lo.iter().zip(low_order_rhs(&f, &u, dx)) {
            assert!((a - b).abs() < 1e-12);
        }
        let none = limited_rhs(
            &f,
            &u,
            &LimiterConfig::none(),
            &CellBounds::uniform(16, 0.0, 1.0),
            dx,
        )
        .unwrap();
        assert_eq!(none, high_order_rhs(&f, dx));
    }

    #[test]
    fn operator_matches_manual_assembly() {
        let p = ProblemSpec::preset(ProblemPreset::AdvectionNonsmooth);
        let g = Grid1D::new(40, p.domain).unwrap();
        let u = p.initial_cell_averages(&g).unwrap();
        let op = SpatialOperator::new(&p, &g, Reconstruction::Weno5).with_limiter(LimiterConfig {
            kind: LimiterKind::Gmc,
            gamma: 0.0,
            bounds_mode: BoundsMode::GlobalInitialData,
        });
        let rhs = op.rhs(&u).unwrap();
        let f = faces_of(&u, Reconstruction::Weno5, p.flux);
        let manual = limited_rhs(&f, &u, &op.limiter, &op.bounds(&u), g.dx()).unwrap();
        assert_eq!(rhs, manual);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn bar_states_stay_between_neighbors(
            ul in -2.0..2.0f64,
            ur in -2.0..2.0f64,
            uhl in -2.0..2.0f64,
            uhr in -2.0..2.0f64,
            which in 0usize..3,
        ) {
            let (flux, ul, ur) = match which {
                0 => (FluxFunction::Burgers, ul, ur),
                1 => (ADV, ul, ur),
                _ => (FluxFunction::Kpp, 0.25 * (ul + 2.0), 0.25 * (ur + 2.0)),
            };
            let lam = flux.wave_speed_bound(ul, ur, uhl, uhr);
            let bar = bar_state_low(flux, ul, ur, lam);
            prop_assert!(bar >= ul.min(ur) - 1e-14 && bar <= ul.max(ur) + 1e-14);
        }
    }

    proptest! {
        #[test]
        fn discrete_mass_is_conserved(
            u in prop::collection::vec(-1.0..1.0f64, 5..40),
            gamma in 0.0..2.0f64,
        ) {
            let f = faces_of(&u, Reconstruction::Weno5, FluxFunction::Burgers);
            let b = CellBounds::uniform(u.len(), -1.0, 1.0);
            for limiter in [LimiterConfig::none(), LimiterConfig::gmc(gamma)] {
                let rhs = limited_rhs(&f, &u, &limiter, &b, 0.1).unwrap();
                prop_assert!(rhs.iter().sum::<f64>().abs() < 1e-11);
            }
        }

        #[test]
        fn low_order_rhs_is_local_extremum_diminishing(
            u in prop::collection::vec(-1.0..1.0f64, 5..40),
        ) {
            let n = u.len();
            let f = faces_of(&u, Reconstruction::Weno5, FluxFunction::Burgers);
            let rhs = low_order_rhs(&f, &u, 0.1);
            for i in 0..n {
                let (l, r) = (u[(i + n - 1) % n], u[(i + 1) % n]);
                if u[i] >= l && u[i] >= r {
                    prop_assert!(rhs[i] <= 1e-13);
                }
                if u[i] <= l && u[i] <= r {
                    prop_assert!(rhs[i] >= -1e-13);
                }
            }
        }
    }
}
