//! Bound-preserving flux limiting for high-order finite volume schemes.
//!
//! `bpflux` solves scalar conservation laws `u_t + f(u)_x = 0` on uniform
//! periodic meshes. A fifth-order WENO (or linear) reconstruction feeds
//! Lax-Friedrichs fluxes, explicit Runge-Kutta methods advance the cell
//! averages, and flux limiters keep the averages inside prescribed bounds.
//!
//! ```
//! use bpflux::{Grid1D, ProblemPreset, ProblemSpec, SchemeConfig, SchemePreset};
//!
//! let problem = ProblemSpec::preset(ProblemPreset::AdvectionNonsmooth)
//!     .with_final_time(0.1)
//!     .unwrap();
//! let grid = Grid1D::new(100, problem.domain).unwrap();
//! let scheme = SchemeConfig::preset(SchemePreset::Ssp54Gmc, 1.0);
//! let (_, report) = bpflux::run_simulation(&scheme, &problem, &grid).unwrap();
//! assert!(report.delta >= -1e-12);
//! ```

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod limiters;
pub mod problem;
pub mod reconstruction;
pub mod reference;
pub mod simulation;
pub mod spatial;
pub mod state;
pub mod study;
pub mod tableau;

pub use error::{Error, Result};
pub use grid::Grid1D;
pub use limiters::{BoundsMode, LimiterConfig, LimiterKind};
pub use problem::{FluxFunction, InitialCondition, ProblemPreset, ProblemSpec};
pub use reconstruction::{InterfaceValues, Reconstruction, SlopeLimitAnchor};
pub use simulation::{
    run_simulation, Placement, RunReport, SchemeConfig, SchemePreset, TimeScheme,
};
pub use state::StateVector;
pub use tableau::{check_internal_ssp, ButcherTableau};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/fluxes.md")]
    mod fluxes {}
    #[doc = include_str!("../../../book/src/limiters.md")]
    mod limiters {}
    #[doc = include_str!("../../../book/src/time-integration.md")]
    mod time_integration {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
