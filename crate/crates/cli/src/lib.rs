//! Command-line front end: model selection, correlation runs, stability
//! sweeps and drive simulations, each writing CSV/JSON artifacts plus a
//! `manifest.json` into the output directory.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{build_model, execute, Command, RunManifest};
pub use config::{resolve, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "tcrystal",
    version,
    about = "Spin-string time crystal experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Eigenvalues and ground-state scalars of a model.
    Spectrum(ConfigArgs),
    /// Magnetization correlation function and its power spectrum.
    Corr(ConfigArgs),
    /// Random field and nearest-neighbour perturbation sweep.
    Stability(ConfigArgs),
    /// Stroboscopic kicked Ising ring and effective Hamiltonian check.
    Dtc(ConfigArgs),
    /// Pauli-string decomposition of a model.
    Decompose(ConfigArgs),
}

impl CommandArgs {
    pub fn split(&self) -> (Command, &ConfigArgs) {
        match self {
            CommandArgs::Spectrum(a) => (Command::Spectrum, a),
            CommandArgs::Corr(a) => (Command::Corr, a),
            CommandArgs::Stability(a) => (Command::Stability, a),
            CommandArgs::Dtc(a) => (Command::Dtc, a),
            CommandArgs::Decompose(a) => (Command::Decompose, a),
        }
    }
}

/// Flags mirror the configuration keys; a flag overrides the file value.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ghz-proj, xy-string, hj, ising or dtc-eff
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// coupling J
    #[arg(long)]
    pub j: Option<String>,
    /// inverse temperature for the thermal ensemble
    #[arg(long)]
    pub beta: Option<String>,
    /// Ising phase per bond, or `auto` for -1/n
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub count: Option<String>,
    /// pure, mixed or thermal
    #[arg(long)]
    pub ensemble: Option<String>,
    /// output directory
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// number of random field perturbations
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// all-up, ghz+ or ghz-
    #[arg(long)]
    pub state: Option<String>,
    /// true, false or auto
    #[arg(long)]
    pub compare: Option<String>,
    #[arg(long)]
    pub weight_tol: Option<String>,
    #[arg(long)]
    pub degeneracy_tol: Option<String>,
    #[arg(long)]
    pub peak_rel: Option<String>,
    #[arg(long)]
    pub stability_tol: Option<String>,
}

impl ConfigArgs {
    pub fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let fields: [(&'static str, &Option<String>); 19] = [
            ("model", &self.model),
            ("n", &self.n),
            ("j", &self.j),
            ("beta", &self.beta),
            ("phi", &self.phi),
            ("t0", &self.t0),
            ("dt", &self.dt),
            ("count", &self.count),
            ("ensemble", &self.ensemble),
            ("out", &self.out),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("steps", &self.steps),
            ("state", &self.state),
            ("compare", &self.compare),
            ("weight_tol", &self.weight_tol),
            ("degeneracy_tol", &self.degeneracy_tol),
            ("peak_rel", &self.peak_rel),
            ("stability_tol", &self.stability_tol),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

/// Resolves the configuration and runs the selected command.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    let (command, args) = cli.command.split();
    let cfg = resolve(args.config.as_deref(), &args.flag_pairs())?;
    execute(command, &cfg)
}
