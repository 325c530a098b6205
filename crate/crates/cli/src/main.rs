use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Bounds, Recon, RunConfig, UsageError};

/// Bound-preserving flux limiting experiments for scalar conservation laws
#[derive(Parser, Debug)]
#[command(name = "bpflux", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation; writes config.json, report.json and profile.csv
    Run(RunArgs),
    /// Grid convergence study; writes convergence.csv and convergence.json
    Convergence(RunArgs),
    /// Check the internal SSP conditions of a Runge-Kutta method
    SspCheck(SspArgs),
    /// Run one simulation and write plot.csv with the exact or reference solution
    PlotData(RunArgs),
}

/// Run settings. Flags override values read from `--config`.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// advection-smooth, advection-nonsmooth, burgers, kpp or burgers-gaussian
    #[arg(long)]
    problem: Option<bpflux::ProblemPreset>,
    /// llf, ssp54-baseline, ssp54-gmc, exe-rk5-baseline, exe-rk5-gmc, rk76-baseline,
    /// rk76-gmc, sw-rk76-gmc, rk76-fct, rk76-local-fct or ssp54-lmc
    #[arg(long)]
    scheme: Option<bpflux::SchemePreset>,
    /// Number of cells
    #[arg(long)]
    n: Option<usize>,
    /// Bound relaxation of the GMC and LMC limiters
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time; defaults to the problem's
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long, value_enum)]
    bounds: Option<Bounds>,
    /// Reconstruction; defaults to the scheme's
    #[arg(long, value_enum)]
    recon: Option<Recon>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads of a convergence study
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
    /// Mesh sizes of a convergence study, e.g. 25,50,100
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    /// Replace the initial data by a constant
    #[arg(long, value_name = "VALUE")]
    constant: Option<f64>,
    /// Tabulate the error of the spatial operator at t = 0
    #[arg(long)]
    semi_discrete: bool,
    /// Cache file of the KPP reference solution
    #[arg(long, value_name = "FILE")]
    kpp_cache: Option<PathBuf>,
    /// Cells of the KPP reference solution
    #[arg(long)]
    reference_cells: Option<usize>,
}

impl RunArgs {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        set!(problem => problem, scheme => scheme, n => n_cells, gamma => gamma,
             cfl => cfl_number, bounds => bounds_mode, out => out_dir,
             reference_cells => reference_cells);
        macro_rules! set_opt {
            ($($flag:ident => $field:ident),*) => {
                $(if self.$flag.is_some() { c.$field = self.$flag; })*
            };
        }
        set_opt!(tfinal => final_time, recon => reconstruction, jobs => jobs,
                 meshes => meshes, constant => constant, kpp_cache => kpp_cache);
        c.semi_discrete |= self.semi_discrete;
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct SspArgs {
    /// euler, ssp54, exe-rk5, rk76, or a JSON file with fields name, a, b, c
    #[arg(long, default_value = "ssp54")]
    tableau: String,
    /// Step-size ratio of the check
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<UsageError>()
            || matches!(
                e.downcast_ref::<bpflux::Error>(),
                Some(bpflux::Error::Config(_) | bpflux::Error::Parse(_))
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => a.resolve().and_then(|c| commands::run(&c)),
        Command::Convergence(a) => a.resolve().and_then(|c| commands::convergence(&c)),
        Command::PlotData(a) => a.resolve().and_then(|c| commands::plot_data(&c)),
        Command::SspCheck(a) => commands::ssp_check(&a.tableau, a.mu),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if is_usage_error(&e) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
