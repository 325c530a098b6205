//! Benchmark problems: flux functions, initial data, exact and reference
//! solutions, and wave-speed bounds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::reference::ReferenceProfile;
use crate::state::StateVector;

/// Lower floor on every wave-speed bound; the bound divides bar states.
pub const MIN_WAVE_SPEED: f64 = 1e-14;

/// Scalar flux functions `f(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FluxFunction {
    /// `f(u) = a u`.
    LinearAdvection(f64),
    /// `f(u) = u^2 / 2`.
    Burgers,
    /// Nonconvex two-branch flux with a break at `u = 1/2`.
    Kpp,
}

impl FluxFunction {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            FluxFunction::LinearAdvection(a) => a * u,
            FluxFunction::Burgers => 0.5 * u * u,
            FluxFunction::Kpp => {
                if u < 0.5 {
                    0.25 * u * (1.0 - u)
                } else {
                    0.5 * u * (u - 1.0) + 3.0 / 16.0
                }
            }
        }
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            FluxFunction::LinearAdvection(a) => a,
            FluxFunction::Burgers => u,
            FluxFunction::Kpp => {
                if u < 0.5 {
                    0.25 * (1.0 - 2.0 * u)
                } else {
                    u - 0.5
                }
            }
        }
    }

    /// Upper bound `lambda_{i+1/2}` for the wave speed at the interface
    /// between cells with averages `u_i`, `u_j` and traces `uhat_ip`
    /// (from the left cell) and `uhat_jm` (from the right cell).
    #[inline]
    pub fn wave_speed_bound(&self, u_i: f64, u_j: f64, uhat_ip: f64, uhat_jm: f64) -> f64 {
        match *self {
            FluxFunction::LinearAdvection(a) => a.abs().max(MIN_WAVE_SPEED),
            FluxFunction::Kpp => 1.0,
            FluxFunction::Burgers => u_i
                .abs()
                .max(u_j.abs())
                .max(uhat_ip.abs())
                .max(uhat_jm.abs())
                .max(MIN_WAVE_SPEED),
        }
    }
}

/// Initial data of the benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `exp(-100 (x - 0.5)^2)` on `(0, 1)`.
    Gaussian,
    /// Gaussian hump, square pulse and semi-ellipse on `(0, 1)`.
    ThreeBody,
    /// `0.5 + sin(x)` on `(0, 2 pi)`.
    SinePlusHalf,
    /// `0` on `[0, 0.35]`, `1` on `(0.35, 1]`.
    StepKpp,
    /// Constant state, allowed on any domain.
    Constant(f64),
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Gaussian => (-100.0 * (x - 0.5).powi(2)).exp(),
            InitialCondition::ThreeBody => {
                let s = 2.0 * x;
                if (s - 0.3).abs() <= 0.25 {
                    (-300.0 * (s - 0.3).powi(2)).exp()
                } else if (s - 0.9).abs() <= 0.2 {
                    1.0
                } else if (s - 1.6).abs() <= 0.2 {
                    let r = (s - 1.6) / 0.2;
                    (1.0 - r * r).max(0.0).sqrt()
                } else {
                    0.0
                }
            }
            InitialCondition::SinePlusHalf => 0.5 + x.sin(),
            InitialCondition::StepKpp => {
                if x <= 0.35 {
                    0.0
                } else {
                    1.0
                }
            }
            InitialCondition::Constant(c) => c,
        }
    }

    /// Points where the data or its derivatives jump.
    fn breakpoints(&self) -> &'static [f64] {
        match self {
            InitialCondition::ThreeBody => &[0.025, 0.275, 0.35, 0.55, 0.7, 0.9],
            InitialCondition::StepKpp => &[0.35],
            _ => &[],
        }
    }

    /// Global `(min, max)` of the data over its domain.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            InitialCondition::Gaussian => (0.0, 1.0),
            InitialCondition::ThreeBody => (0.0, 1.0),
            InitialCondition::SinePlusHalf => (-0.5, 1.5),
            InitialCondition::StepKpp => (0.0, 1.0),
            InitialCondition::Constant(c) => (c, c),
        }
    }

    fn natural_domain(&self) -> Option<(f64, f64)> {
        match self {
            InitialCondition::Gaussian
            | InitialCondition::ThreeBody
            | InitialCondition::StepKpp => Some((0.0, 1.0)),
            InitialCondition::SinePlusHalf => Some((0.0, 2.0 * PI)),
            InitialCondition::Constant(_) => None,
        }
    }
}

/// Named benchmark configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemPreset {
    /// Linear advection of the Gaussian, `a = 1`, `T = 1`.
    AdvectionSmooth,
    /// Linear advection of the three-body data, `a = 1`, `T = 1`.
    AdvectionNonsmooth,
    /// Burgers equation with `0.5 + sin x`, `T = 0.5`.
    Burgers,
    /// KPP flux with step data, `T = 1`.
    Kpp,
    /// Burgers flux with Gaussian data; used for the semi-discrete accuracy test.
    BurgersGaussian,
}

impl ProblemPreset {
    pub const ALL: [ProblemPreset; 5] = [
        ProblemPreset::AdvectionSmooth,
        ProblemPreset::AdvectionNonsmooth,
        ProblemPreset::Burgers,
        ProblemPreset::Kpp,
        ProblemPreset::BurgersGaussian,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemPreset::AdvectionSmooth => "advection-smooth",
            ProblemPreset::AdvectionNonsmooth => "advection-nonsmooth",
            ProblemPreset::Burgers => "burgers",
            ProblemPreset::Kpp => "kpp",
            ProblemPreset::BurgersGaussian => "burgers-gaussian",
        }
    }
}

impl fmt::Display for ProblemPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }
}

/// A scalar conservation law `u_t + f(u)_x = 0` with periodic boundary
/// conditions and the global bounds of its initial data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub flux: FluxFunction,
    pub initial: InitialCondition,
    pub domain: (f64, f64),
    pub final_time: f64,
    pub global_umin: f64,
    pub global_umax: f64,
    reference: Option<Arc<ReferenceProfile>>,
}

impl ProblemSpec {
    pub fn new(
        flux: FluxFunction,
        initial: InitialCondition,
        domain: (f64, f64),
        final_time: f64,
    ) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(Error::Config(format!("invalid final time {final_time}")));
        }
        if let Some(natural) = initial.natural_domain() {
            let tol = 1e-12;
            if (natural.0 - domain.0).abs() > tol || (natural.1 - domain.1).abs() > tol {
                return Err(Error::Config(format!(
                    "{initial:?} data is defined on ({}, {}), not ({}, {})",
                    natural.0, natural.1, domain.0, domain.1
                )));
            }
        } else if domain.0.partial_cmp(&domain.1) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Config("degenerate domain".into()));
        }
        let (global_umin, global_umax) = initial.range();
        Ok(Self {
            flux,
            initial,
            domain,
            final_time,
            global_umin,
            global_umax,
            reference: None,
        })
    }

    pub fn preset(preset: ProblemPreset) -> Self {
        let built = match preset {
            ProblemPreset::AdvectionSmooth => Self::new(
                FluxFunction::LinearAdvection(1.0),
                InitialCondition::Gaussian,
                (0.0, 1.0),
                1.0,
            ),
            ProblemPreset::AdvectionNonsmooth => Self::new(
                FluxFunction::LinearAdvection(1.0),
                InitialCondition::ThreeBody,
                (0.0, 1.0),
                1.0,
            ),
            ProblemPreset::Burgers => Self::new(
                FluxFunction::Burgers,
                InitialCondition::SinePlusHalf,
                (0.0, 2.0 * PI),
                0.5,
            ),
            ProblemPreset::Kpp => Self::new(
                FluxFunction::Kpp,
                InitialCondition::StepKpp,
                (0.0, 1.0),
                1.0,
            ),
            ProblemPreset::BurgersGaussian => Self::new(
                FluxFunction::Burgers,
                InitialCondition::Gaussian,
                (0.0, 1.0),
                0.0,
            ),
        };
        built.expect("presets are valid")
    }

    pub fn with_final_time(mut self, final_time: f64) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(Error::Config(format!("invalid final time {final_time}")));
        }
        self.final_time = final_time;
        Ok(self)
    }

    /// Replaces the initial data by a constant on the same domain.
    pub fn with_constant_initial(mut self, value: f64) -> Self {
        self.initial = InitialCondition::Constant(value);
        self.global_umin = value;
        self.global_umax = value;
        self.reference = None;
        self
    }

    /// Attaches a precomputed reference solution used where no closed form exists.
    pub fn with_reference(mut self, reference: Arc<ReferenceProfile>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn reference(&self) -> Option<&ReferenceProfile> {
        self.reference.as_deref()
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    /// Initial data at `x`, periodically extended.
    pub fn initial_value(&self, x: f64) -> f64 {
        self.initial.eval(self.wrap(x))
    }

    fn wrap(&self, x: f64) -> f64 {
        let (a, _) = self.domain;
        a + (x - a).rem_euclid(self.length())
    }

    /// Whether `exact_solution(., t)` can be evaluated.
    pub fn has_exact_solution(&self, t: f64) -> bool {
        self.exact_solution(self.domain.0, t).is_ok()
    }

    /// Exact (or reference) solution `u(x, t)`.
    pub fn exact_solution(&self, x: f64, t: f64) -> Result<f64> {
        if let InitialCondition::Constant(c) = self.initial {
            return Ok(c);
        }
        if t == 0.0 {
            return Ok(self.initial_value(x));
        }
        match self.flux {
            FluxFunction::LinearAdvection(a) => Ok(self.initial_value(x - a * t)),
            FluxFunction::Burgers => match self.initial {
                InitialCondition::SinePlusHalf => burgers_sine_solution(x, t),
                _ => Err(Error::Precondition(format!(
                    "no closed-form Burgers solution for {:?} data",
                    self.initial
                ))),
            },
            FluxFunction::Kpp => match &self.reference {
                Some(r) if (r.time() - t).abs() <= 1e-12 => Ok(r.value_at(x)),
                Some(r) => Err(Error::Precondition(format!(
                    "reference solution is stored at t = {}, requested t = {t}",
                    r.time()
                ))),
                None => Err(Error::Precondition(
                    "KPP solution requires a reference profile".into(),
                )),
            },
        }
    }

    /// Exact cell averages of the initial data on `grid`.
    pub fn initial_cell_averages(&self, grid: &Grid1D) -> Result<StateVector> {
        let (a, b) = grid.domain();
        if (a - self.domain.0).abs() > 1e-12 || (b - self.domain.1).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "grid domain ({a}, {b}) does not match problem domain ({}, {})",
                self.domain.0, self.domain.1
            )));
        }
        let breaks = self.initial.breakpoints();
        let values = (0..grid.n_cells())
            .map(|i| {
                let (lo, hi) = grid.cell_edges(i);
                let mut cuts = vec![lo];
                cuts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
                cuts.push(hi);
                let average = if cuts.len() == 2 {
                    gauss_legendre5_mean(|x| self.initial.eval(x), lo, hi)
                } else {
                    cuts.windows(2)
                        .map(|w| {
                            (w[1] - w[0])
                                * gauss_legendre5_mean(|x| self.initial.eval(x), w[0], w[1])
                        })
                        .sum::<f64>()
                        / grid.dx()
                };
                average.clamp(self.global_umin, self.global_umax)
            })
            .collect();
        Ok(StateVector::new(values))
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(&s, &w)| w * f(mid + half * s))
        .sum::<f64>()
}

/// Mean value of `f` on `[a, b]` by the five-point rule, normalized so that
/// constants are reproduced exactly.
fn gauss_legendre5_mean(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let total: f64 = GL5_WEIGHTS.iter().sum();
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(&s, &w)| w * f(mid + half * s))
        .sum::<f64>()
        / total
}

/// Solves `u = 0.5 + sin(x - u t)` for `0 <= t < 1` by Newton's method
/// safeguarded with bisection on `[-0.5, 1.5]`.
pub fn burgers_sine_solution(x: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Precondition(format!(
            "smooth Burgers solution requires 0 <= t < 1, got t = {t}"
        )));
    }
    let residual = |u: f64| u - 0.5 - (x - u * t).sin();
    let slope = |u: f64| 1.0 + t * (x - u * t).cos();
    let (mut lo, mut hi) = (-0.5, 1.5);
    let mut u = 0.5 + x.sin();
    for _ in 0..200 {
        let r = residual(u);
        if r.abs() <= 1e-15 {
            return Ok(u);
        }
        if r < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - r / slope(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-16 * (1.0 + u.abs()) {
            return Ok(next);
        }
        u = next;
    }
    if residual(u).abs() <= 1e-13 {
        Ok(u)
    } else {
        Err(Error::Convergence(format!(
            "Burgers characteristic equation at x = {x}, t = {t}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kpp_flux_values() {
        let f = FluxFunction::Kpp;
        assert_eq!(f.eval(0.0), 0.0);
        let left: f64 = 0.25 * 0.5 * (1.0 - 0.5);
        let right: f64 = 0.5 * 0.5 * (0.5 - 1.0) + 3.0 / 16.0;
        assert!((left - 0.0625).abs() < 1e-16);
        assert!((right - 0.0625).abs() < 1e-16);
        assert!((f.eval(0.5) - 0.0625).abs() < 1e-16);
        let below = f.eval(0.5 - 1e-12);
        assert!((below - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn other_flux_values() {
        assert_eq!(FluxFunction::Burgers.eval(2.0), 2.0);
        assert_eq!(FluxFunction::LinearAdvection(1.0).eval(3.0), 3.0);
    }

    #[test]
    fn wave_speeds() {
        assert_eq!(
            FluxFunction::LinearAdvection(1.0).wave_speed_bound(5.0, -3.0, 0.0, 0.0),
            1.0
        );
        assert_eq!(FluxFunction::Kpp.wave_speed_bound(0.2, 0.9, 0.3, 0.8), 1.0);
        assert_eq!(
            FluxFunction::Burgers.wave_speed_bound(0.2, 0.9, 0.3, 0.8),
            0.9
        );
        assert_eq!(
            FluxFunction::Burgers.wave_speed_bound(-0.5, -0.5, -0.5, -0.5),
            0.5
        );
        assert_eq!(
            FluxFunction::Burgers.wave_speed_bound(0.0, 0.0, 0.0, 0.0),
            MIN_WAVE_SPEED
        );
    }

    #[test]
    fn constant_initial_averages() {
        let p = ProblemSpec::preset(ProblemPreset::Burgers).with_constant_initial(0.3);
        let g = Grid1D::new(17, p.domain).unwrap();
        let u = p.initial_cell_averages(&g).unwrap();
        assert!(u.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn step_average_splits_exactly() {
        let p = ProblemSpec::preset(ProblemPreset::Kpp);
        // 0.35 lies inside cell 7 of a 20-cell mesh: [0.35, 0.4) has edge at 0.35,
        // so use 30 cells where cell 10 is [1/3, 11/30).
        let g = Grid1D::new(30, p.domain).unwrap();
        let u = p.initial_cell_averages(&g).unwrap();
        let (lo, hi) = g.cell_edges(10);
        let expected = (hi - 0.35) / (hi - lo);
        assert!((u[10] - expected).abs() < 1e-14);
        assert_eq!(u[0], 0.0);
        assert_eq!(u[29], 1.0);
    }

    #[test]
    fn burgers_fixed_point() {
        let u = burgers_sine_solution(0.25, 0.5).unwrap();
        assert!((u - 0.5).abs() < 1e-14);
    }

    #[test]
    fn burgers_rejects_post_shock_time() {
        assert!(matches!(
            burgers_sine_solution(0.1, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn advection_full_period() {
        let p = ProblemSpec::preset(ProblemPreset::AdvectionSmooth);
        let u = p.exact_solution(0.5, 1.0).unwrap();
        assert!((u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn initial_data_at_time_zero() {
        for preset in [
            ProblemPreset::Burgers,
            ProblemPreset::Kpp,
            ProblemPreset::AdvectionNonsmooth,
        ] {
            let p = ProblemSpec::preset(preset);
            let x = p.domain.0 + 0.3 * p.length();
            assert_eq!(p.exact_solution(x, 0.0).unwrap(), p.initial.eval(x));
        }
    }

    #[test]
    fn kpp_without_reference_is_an_error() {
        let p = ProblemSpec::preset(ProblemPreset::Kpp);
        assert!(p.exact_solution(0.5, 1.0).is_err());
    }

    #[test]
    fn mismatched_domain_is_rejected() {
        assert!(ProblemSpec::new(
            FluxFunction::Burgers,
            InitialCondition::SinePlusHalf,
            (0.0, 1.0),
            0.5
        )
        .is_err());
    }

    #[test]
    fn gaussian_averages_match_error_function() {
        let p = ProblemSpec::preset(ProblemPreset::AdvectionSmooth);
        for n in [50, 200] {
            let grid = Grid1D::new(n, p.domain).unwrap();
            let u = p.initial_cell_averages(&grid).unwrap();
            for (i, &v) in u.iter().enumerate() {
                let (lo, hi) = grid.cell_edges(i);
                let exact = PI.sqrt() / 20.0
                    * (libm::erf(10.0 * (hi - 0.5)) - libm::erf(10.0 * (lo - 0.5)))
                    / grid.dx();
                assert!(
                    (v - exact).abs() < 1e-11,
                    "n = {n}, cell {i}: {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_nine() {
        let f = |x: f64| x.powi(9) - 3.0 * x.powi(4) + 1.0;
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) - 1.0) / 5.0 + 1.0;
        assert!((gauss_legendre5(f, 1.0, 2.0) - exact).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn burgers_solution_solves_characteristics(x in 0.0..2.0 * PI, t in 0.0..0.99f64) {
            let u = burgers_sine_solution(x, t).unwrap();
            prop_assert!((u - 0.5 - (x - u * t).sin()).abs() < 1e-13);
            prop_assert!((-0.5..=1.5).contains(&u));
        }
    }
}
