//! Scheme configurations and the time-stepping loop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{l1_error, BoundTracker};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::integrate::{
    euler_step, exe_rk5_step, generic_erk_step, ssp54_step, SpaceTimeLimiting, StepOutcome,
};
use crate::limiters::{BoundsMode, LimiterConfig, LimiterKind};
use crate::problem::ProblemSpec;
use crate::reconstruction::{Reconstruction, SlopeLimitAnchor};
use crate::spatial::SpatialOperator;
use crate::state::StateVector;
use crate::tableau::ButcherTableau;

/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    Euler,
    Ssp54,
    ExeRk5,
    Rk76,
}

impl TimeScheme {
    pub fn tableau(&self) -> ButcherTableau {
        match self {
            TimeScheme::Euler => ButcherTableau::euler(),
            TimeScheme::Ssp54 => ButcherTableau::ssp54(),
            TimeScheme::ExeRk5 => ButcherTableau::exe_rk5(),
            TimeScheme::Rk76 => ButcherTableau::rk76(),
        }
    }
}

/// Where the flux limiter acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    None,
    /// Every right-hand side evaluation.
    Space,
    /// Every right-hand side evaluation and the final update.
    SpaceAndFinal,
    /// Only the final update.
    Final,
    /// Every stage and the final update.
    StagewiseAndFinal,
}

/// Named schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemePreset {
    /// First-order LLF with forward Euler.
    Llf,
    Ssp54Baseline,
    Ssp54Gmc,
    ExeRk5Baseline,
    ExeRk5Gmc,
    Rk76Baseline,
    Rk76Gmc,
    SwRk76Gmc,
    Rk76Fct,
    Rk76LocalFct,
    Ssp54Lmc,
}

impl SchemePreset {
    pub const ALL: [SchemePreset; 11] = [
        SchemePreset::Llf,
        SchemePreset::Ssp54Baseline,
        SchemePreset::Ssp54Gmc,
        SchemePreset::ExeRk5Baseline,
        SchemePreset::ExeRk5Gmc,
        SchemePreset::Rk76Baseline,
        SchemePreset::Rk76Gmc,
        SchemePreset::SwRk76Gmc,
        SchemePreset::Rk76Fct,
        SchemePreset::Rk76LocalFct,
        SchemePreset::Ssp54Lmc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemePreset::Llf => "llf",
            SchemePreset::Ssp54Baseline => "ssp54-baseline",
            SchemePreset::Ssp54Gmc => "ssp54-gmc",
            SchemePreset::ExeRk5Baseline => "exe-rk5-baseline",
            SchemePreset::ExeRk5Gmc => "exe-rk5-gmc",
            SchemePreset::Rk76Baseline => "rk76-baseline",
            SchemePreset::Rk76Gmc => "rk76-gmc",
            SchemePreset::SwRk76Gmc => "sw-rk76-gmc",
            SchemePreset::Rk76Fct => "rk76-fct",
            SchemePreset::Rk76LocalFct => "rk76-local-fct",
            SchemePreset::Ssp54Lmc => "ssp54-lmc",
        }
    }
}

impl fmt::Display for SchemePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// A complete fully discrete scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub time: TimeScheme,
    pub placement: Placement,
    pub limiter: LimiterConfig,
    pub cfl: f64,
    pub reconstruction: Reconstruction,
    /// Slope limiting of the traces; off unless set.
    pub slope_limit: Option<SlopeLimitAnchor>,
}

impl SchemeConfig {
    /// Preset with relaxation `gamma`, global bounds, WENO5 and CFL 0.4.
    pub fn preset(preset: SchemePreset, gamma: f64) -> Self {
        use LimiterKind as K;
        use Placement as P;
        use TimeScheme as T;
        let (time, placement, kind) = match preset {
            SchemePreset::Llf => (T::Euler, P::None, K::None),
            SchemePreset::Ssp54Baseline => (T::Ssp54, P::None, K::None),
            SchemePreset::Ssp54Gmc => (T::Ssp54, P::Space, K::Gmc),
            SchemePreset::ExeRk5Baseline => (T::ExeRk5, P::None, K::None),
            SchemePreset::ExeRk5Gmc => (T::ExeRk5, P::SpaceAndFinal, K::Gmc),
            SchemePreset::Rk76Baseline => (T::Rk76, P::None, K::None),
            SchemePreset::Rk76Gmc => (T::Rk76, P::Final, K::Gmc),
            SchemePreset::SwRk76Gmc => (T::Rk76, P::StagewiseAndFinal, K::Gmc),
            SchemePreset::Rk76Fct => (T::Rk76, P::Final, K::Fct),
            SchemePreset::Rk76LocalFct => (T::Rk76, P::Final, K::LocalFct),
            SchemePreset::Ssp54Lmc => (T::Ssp54, P::Space, K::Lmc),
        };
        let reconstruction = if preset == SchemePreset::Llf {
            Reconstruction::FirstOrder
        } else {
            Reconstruction::Weno5
        };
        Self {
            time,
            placement,
            limiter: LimiterConfig {
                kind,
                gamma,
                bounds_mode: BoundsMode::GlobalInitialData,
            },
            cfl: DEFAULT_CFL,
            reconstruction,
            slope_limit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.limiter.validate()?;
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::Config(format!(
                "CFL number must be positive, got {}",
                self.cfl
            )));
        }
        let limited = self.placement != Placement::None;
        if limited != self.limiter.is_active() {
            return Err(Error::Config(format!(
                "placement {:?} is inconsistent with limiter {}",
                self.placement, self.limiter.kind
            )));
        }
        if self.limiter.kind.is_fct()
            && matches!(self.placement, Placement::Space | Placement::SpaceAndFinal)
        {
            return Err(Error::Config(format!(
                "{} limiting cannot be applied to the semi-discrete operator",
                self.limiter.kind
            )));
        }
        Ok(())
    }

    /// Time step `cfl dx / (1 + gamma)`.
    pub fn time_step(&self, dx: f64) -> f64 {
        self.cfl * dx / (1.0 + self.limiter.gamma)
    }

    fn space_limiter(&self) -> LimiterConfig {
        match self.placement {
            Placement::Space | Placement::SpaceAndFinal => self.limiter,
            _ => LimiterConfig {
                kind: LimiterKind::None,
                ..self.limiter
            },
        }
    }

    fn space_time(&self) -> SpaceTimeLimiting {
        match self.placement {
            Placement::None | Placement::Space => SpaceTimeLimiting::default(),
            Placement::SpaceAndFinal | Placement::Final => SpaceTimeLimiting {
                stage: None,
                last: Some(self.limiter),
            },
            Placement::StagewiseAndFinal => SpaceTimeLimiting {
                stage: Some(self.limiter),
                last: Some(self.limiter),
            },
        }
    }

    /// Advances `u_n` by one step of size `dt`.
    pub fn step(
        &self,
        op: &SpatialOperator<'_>,
        u_n: &[f64],
        dt: f64,
        time: f64,
    ) -> Result<StepOutcome> {
        let st = self.space_time();
        match (self.time, st.stage, st.last) {
            (TimeScheme::Euler, None, None) => euler_step(op, u_n, dt, time),
            (TimeScheme::Ssp54, None, None) => ssp54_step(op, u_n, dt, time),
            (TimeScheme::ExeRk5, None, last) => exe_rk5_step(op, u_n, dt, last.as_ref(), time),
            (scheme, _, _) => generic_erk_step(&scheme.tableau(), op, u_n, dt, st, time),
        }
    }
}

/// Snapshot passed to a run observer after every accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'a> {
    pub step: usize,
    pub t: f64,
    pub state: &'a [f64],
    /// Intermediate stage values of the step.
    pub stages: &'a [Vec<f64>],
}

/// Diagnostics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_cells: usize,
    pub final_time: f64,
    pub dt: f64,
    /// Discrete L1 error, when an exact or reference solution is available.
    pub e1: Option<f64>,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub delta: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// `|mass_final - mass_initial| / max(|mass_initial|, 1e-300)`.
    pub mass_drift: f64,
    pub n_steps: usize,
    /// Steps whose time step exceeded the bound-preserving CFL limit.
    pub cfl_violations: usize,
}

/// Runs `config` on `problem` from `t = 0` to its final time.
pub fn run_simulation(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    grid: &Grid1D,
) -> Result<(StateVector, RunReport)> {
    run_simulation_with(config, problem, grid, |_| {})
}

/// As [`run_simulation`], calling `observer` after every step.
pub fn run_simulation_with(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    grid: &Grid1D,
    mut observer: impl FnMut(&StepRecord<'_>),
) -> Result<(StateVector, RunReport)> {
    config.validate()?;
    let op = SpatialOperator::new(problem, grid, config.reconstruction)
        .with_limiter(config.space_limiter())
        .with_slope_limit(config.slope_limit);
    let dx = grid.dx();
    let mut u = problem.initial_cell_averages(grid)?.into_inner();
    let mass_initial = dx * u.iter().sum::<f64>();
    let mut tracker = BoundTracker::new(problem.global_umin, problem.global_umax);
    tracker.observe(&u);

    let sample_stages = config.placement == Placement::StagewiseAndFinal;
    let gamma_cfl = 1.0 + config.limiter.effective_gamma();
    let dt_full = config.time_step(dx);
    let t_end = problem.final_time;
    let mut t = 0.0;
    let mut n_steps = 0;
    let mut cfl_violations = 0;
    while t < t_end {
        let dt = if t + dt_full >= t_end * (1.0 - 1e-14) {
            t_end - t
        } else {
            dt_full
        };
        let out = config.step(&op, &u, dt, t)?;
        if gamma_cfl * out.courant > 1.0 + 1e-12 {
            if cfl_violations == 0 {
                log::warn!(
                    "time step {dt:e} violates the bound-preserving CFL condition at t = {t} (nu = {:.3})",
                    gamma_cfl * out.courant
                );
            }
            cfl_violations += 1;
        }
        if sample_stages {
            out.stages.iter().for_each(|y| tracker.observe(y));
        }
        u = out.state;
        tracker.observe(&u);
        t = if dt == t_end - t { t_end } else { t + dt };
        n_steps += 1;
        observer(&StepRecord {
            step: n_steps,
            t,
            state: &u,
            stages: &out.stages,
        });
    }

    let mass_final = dx * u.iter().sum::<f64>();
    let e1 = if problem.has_exact_solution(t_end) {
        Some(l1_error(&u, problem, grid, t_end)?)
    } else {
        None
    };
    let bv = tracker.result().expect("initial state observed");
    let report = RunReport {
        n_cells: grid.n_cells(),
        final_time: t_end,
        dt: dt_full,
        e1,
        delta_minus: bv.delta_minus,
        delta_plus: bv.delta_plus,
        delta: bv.delta,
        mass_initial,
        mass_final,
        mass_drift: (mass_final - mass_initial).abs() / mass_initial.abs().max(1e-300),
        n_steps,
        cfl_violations,
    };
    Ok((StateVector::new(u), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemPreset;

    #[test]
    fn preset_names_round_trip() {
        for p in SchemePreset::ALL {
            assert_eq!(p.name().parse::<SchemePreset>().unwrap(), p);
            SchemeConfig::preset(p, 1.0).validate().unwrap();
        }
        assert!("ssp54".parse::<SchemePreset>().is_err());
    }

    #[test]
    fn fct_in_space_is_rejected() {
        let mut c = SchemeConfig::preset(SchemePreset::Ssp54Gmc, 0.0);
        c.limiter.kind = LimiterKind::Fct;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn constant_data_stays_constant() {
        let p = ProblemSpec::preset(ProblemPreset::AdvectionNonsmooth)
            .with_constant_initial(0.4)
            .with_final_time(0.1)
            .unwrap();
        let g = Grid1D::new(20, p.domain).unwrap();
        for preset in SchemePreset::ALL {
            let (u, r) = run_simulation(&SchemeConfig::preset(preset, 1.0), &p, &g).unwrap();
            assert!(u.iter().all(|&v| (v - 0.4).abs() < 1e-15), "{preset}");
            assert!(r.delta.abs() < 1e-15);
            assert!(r.mass_drift < 1e-15);
            assert_eq!(r.e1, Some(r.e1.unwrap()));
        }
    }

    #[test]
    fn final_time_is_hit_exactly() {
        let p = ProblemSpec::preset(ProblemPreset::AdvectionSmooth)
            .with_final_time(0.123)
            .unwrap();
        let g = Grid1D::new(25, p.domain).unwrap();
        let mut last = 0.0;
        let (_, r) = run_simulation_with(
            &SchemeConfig::preset(SchemePreset::Llf, 0.0),
            &p,
            &g,
            |rec| {
                assert!(rec.t > last);
                last = rec.t;
            },
        )
        .unwrap();
        assert_eq!(last, 0.123);
        assert_eq!(r.n_steps, (0.123_f64 / (0.4 / 25.0)).ceil() as usize);
    }

    #[test]
    fn zero_final_time_takes_no_steps() {
        let p = ProblemSpec::preset(ProblemPreset::BurgersGaussian);
        let g = Grid1D::new(10, p.domain).unwrap();
        let (u, r) =
            run_simulation(&SchemeConfig::preset(SchemePreset::Rk76Gmc, 0.0), &p, &g).unwrap();
        assert_eq!(r.n_steps, 0);
        assert_eq!(u, p.initial_cell_averages(&g).unwrap());
    }
}
