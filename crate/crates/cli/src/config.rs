//! Run configuration: a flat JSON document that command-line flags override.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use bpflux::reference::{load_or_build_reference, KPP_REFERENCE_CELLS};
use bpflux::{
    BoundsMode, FluxFunction, ProblemPreset, ProblemSpec, Reconstruction, SchemeConfig,
    SchemePreset,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

/// An invalid invocation, as opposed to a failed computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Bounds imposed by the limiter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Bounds {
    /// Extrema of the initial data.
    Global,
    /// Extrema over each cell and its neighbors.
    Local,
}

impl From<Bounds> for BoundsMode {
    fn from(b: Bounds) -> Self {
        match b {
            Bounds::Global => BoundsMode::GlobalInitialData,
            Bounds::Local => BoundsMode::LocalStencil,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Recon {
    Weno5,
    Linear5,
}

impl From<Recon> for Reconstruction {
    fn from(r: Recon) -> Self {
        match r {
            Recon::Weno5 => Reconstruction::Weno5,
            Recon::Linear5 => Reconstruction::Linear5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemPreset,
    pub scheme: SchemePreset,
    pub n_cells: usize,
    pub gamma: f64,
    pub cfl_number: f64,
    /// Overrides the problem's final time.
    pub final_time: Option<f64>,
    pub bounds_mode: Bounds,
    /// Overrides the scheme's reconstruction.
    pub reconstruction: Option<Recon>,
    pub out_dir: PathBuf,
    /// Mesh sizes of a convergence study.
    pub meshes: Option<Vec<usize>>,
    /// Replaces the initial data by this constant.
    pub constant: Option<f64>,
    /// Tabulate the spatial operator error instead of running in time.
    pub semi_discrete: bool,
    /// Cache file of the KPP reference solution.
    pub kpp_cache: Option<PathBuf>,
    pub reference_cells: usize,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemPreset::AdvectionSmooth,
            scheme: SchemePreset::Ssp54Gmc,
            n_cells: 100,
            gamma: 1.0,
            cfl_number: bpflux::simulation::DEFAULT_CFL,
            final_time: None,
            bounds_mode: Bounds::Global,
            reconstruction: None,
            out_dir: PathBuf::from("bpflux-out"),
            meshes: None,
            constant: None,
            semi_discrete: false,
            kpp_cache: None,
            reference_cells: KPP_REFERENCE_CELLS,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).with_context(|| path.display().to_string())
    }

    /// Mesh list of a study: at least two sizes, strictly increasing.
    pub fn study_meshes(&self) -> anyhow::Result<Vec<usize>> {
        let meshes = self
            .meshes
            .clone()
            .ok_or_else(|| usage("a convergence study needs --meshes"))?;
        if meshes.len() < 2 {
            return Err(usage("a convergence study needs at least two meshes"));
        }
        if meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("mesh sizes must increase strictly"));
        }
        Ok(meshes)
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut scheme = SchemeConfig::preset(self.scheme, self.gamma);
        scheme.cfl = self.cfl_number;
        scheme.limiter.bounds_mode = self.bounds_mode.into();
        if let Some(r) = self.reconstruction {
            scheme.reconstruction = r.into();
        }
        scheme
    }

    /// The problem without any reference solution attached.
    pub fn base_problem(&self) -> anyhow::Result<ProblemSpec> {
        let mut p = ProblemSpec::preset(self.problem);
        if let Some(t) = self.final_time {
            p = p.with_final_time(t)?;
        }
        if let Some(c) = self.constant {
            p = p.with_constant_initial(c);
        }
        Ok(p)
    }

    pub fn kpp_cache_path(&self) -> PathBuf {
        self.kpp_cache.clone().unwrap_or_else(|| {
            self.out_dir
                .join(format!("kpp-reference-{}.csv", self.reference_cells))
        })
    }

    /// The problem, with the KPP reference loaded (or built and cached)
    /// when the run needs one.
    pub fn problem(&self) -> anyhow::Result<ProblemSpec> {
        let p = self.base_problem()?;
        if p.flux != FluxFunction::Kpp || self.constant.is_some() || p.final_time == 0.0 {
            return Ok(p);
        }
        let cache = self.kpp_cache_path();
        if let Some(dir) = cache.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let r = load_or_build_reference(&p, self.reference_cells, &cache)?;
        Ok(p.with_reference(Arc::new(r)))
    }
}
