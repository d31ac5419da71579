//! Command-line front end for the binormal bifurcation toolkit.

pub mod config;
pub mod error;
pub mod output;
pub mod pipelines;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, RunConfig, Settings};
use error::CliResult;
use output::Meta;

#[derive(Parser, Debug)]
#[command(name = "binormal", version, about = "Bifurcation of rotating-slipping binormal-flow solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Invocation {
    /// TOML file with the same keys as the flags (underscored)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List bifurcation radii for modes 1..=nmax
    Eigenvalues(Invocation),
    /// Kernel vector and transversality at one eigenpair
    Kernel(Invocation),
    /// Continue the bifurcating branch and export it
    Bifurcate(Invocation),
    /// Render the tangent field and filament of a profile
    Reconstruct(Invocation),
    /// Evolve a profile and measure its distance from pure rotation and slip
    CheckSteady(Invocation),
    /// Compare a profile against the classical steady family
    KidaCheck(Invocation),
    /// Run the invariant suite
    Verify(Invocation),
}

impl Command {
    fn parts(&self) -> (CommandKind, &Invocation) {
        match self {
            Command::Eigenvalues(i) => (CommandKind::Eigenvalues, i),
            Command::Kernel(i) => (CommandKind::Kernel, i),
            Command::Bifurcate(i) => (CommandKind::Bifurcate, i),
            Command::Reconstruct(i) => (CommandKind::Reconstruct, i),
            Command::CheckSteady(i) => (CommandKind::CheckSteady, i),
            Command::KidaCheck(i) => (CommandKind::KidaCheck, i),
            Command::Verify(i) => (CommandKind::Verify, i),
        }
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        let (kind, inv) = self.parts();
        let file = match &inv.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        RunConfig::resolve(kind, inv.settings.clone().over(file))
    }
}

/// Runs a resolved configuration and returns the lines to report.
pub fn dispatch(cfg: &RunConfig) -> CliResult<Vec<String>> {
    let meta = Meta::from_config(cfg);
    match cfg.command {
        CommandKind::Eigenvalues => pipelines::eigenvalues(cfg, &meta),
        CommandKind::Kernel => pipelines::kernel(cfg, &meta),
        CommandKind::Bifurcate => pipelines::bifurcate(cfg, &meta),
        CommandKind::Reconstruct => pipelines::reconstruct(cfg, &meta),
        CommandKind::CheckSteady => pipelines::check_steady(cfg, &meta),
        CommandKind::KidaCheck => pipelines::kida_check(cfg, &meta),
        CommandKind::Verify => verify::verify(cfg, &meta),
    }
}

pub fn run(cli: &Cli) -> CliResult<Vec<String>> {
    dispatch(&cli.command.resolve()?)
}
