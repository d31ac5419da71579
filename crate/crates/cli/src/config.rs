//! Run configuration. Precedence: command-line flags, then the TOML file, then defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use binormal::continuation::JacobianMode;
use binormal::{Geometry, RootBranch};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Eigenvalues,
    Kernel,
    Bifurcate,
    Reconstruct,
    CheckSteady,
    KidaCheck,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Eigenvalues => "eigenvalues",
            CommandKind::Kernel => "kernel",
            CommandKind::Bifurcate => "bifurcate",
            CommandKind::Reconstruct => "reconstruct",
            CommandKind::CheckSteady => "check-steady",
            CommandKind::KidaCheck => "kida-check",
            CommandKind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Every tunable, optional so that flags and file entries can be layered.
#[derive(Args, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// euclidean or hyperbolic
    #[arg(long)]
    pub geometry: Option<String>,
    /// Slip speed
    #[arg(long = "a", allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Symmetry order of the profile
    #[arg(long)]
    pub m: Option<usize>,
    /// Bifurcation mode (defaults to m)
    #[arg(long)]
    pub n: Option<u32>,
    /// Root branch: plus or minus
    #[arg(long)]
    pub branch: Option<String>,
    /// Use the trivial helix of this radius instead of a branch point
    #[arg(long)]
    pub r: Option<f64>,
    /// Amplitude of the branch point to analyse
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Largest amplitude traced by bifurcate
    #[arg(long)]
    pub eta_max: Option<f64>,
    /// Marching steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fourier truncation M
    #[arg(long, visible_alias = "modes")]
    pub trunc: Option<usize>,
    /// Newton tolerance on the grid residual
    #[arg(long)]
    pub tol: Option<f64>,
    /// exact or fd
    #[arg(long)]
    pub jacobian: Option<String>,
    /// Largest mode listed by eigenvalues
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Arclength nodes per 2 pi
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of 2 pi periods rendered
    #[arg(long)]
    pub periods: Option<usize>,
    /// Time at which the filament is rendered
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Evolution horizon
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Evolution time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comparison times during evolution
    #[arg(long)]
    pub checkpoints: Option<usize>,
    /// Cells per side of the (A, V) search grid
    #[arg(long)]
    pub cells: Option<usize>,
    /// Trace only positive amplitudes
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub one_sided: Option<bool>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
}

impl Settings {
    /// Fields set here win over `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(lower.$f)),* } };
        }
        pick!(
            geometry,
            a,
            m,
            n,
            branch,
            r,
            eta,
            eta_max,
            steps,
            trunc,
            tol,
            jacobian,
            nmax,
            nodes,
            periods,
            t,
            t_final,
            dt,
            checkpoints,
            cells,
            one_sided,
            out,
            format
        )
    }

    pub fn from_file(path: &Path) -> CliResult<Settings> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigFile { path: path.to_path_buf(), message: e.to_string() })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub geometry: Geometry,
    pub a: f64,
    pub m: usize,
    pub n: u32,
    pub branch: RootBranch,
    pub r: Option<f64>,
    pub eta: f64,
    pub eta_max: f64,
    pub steps: usize,
    pub trunc: usize,
    pub tol: f64,
    pub jacobian: JacobianMode,
    pub nmax: u32,
    pub nodes: usize,
    pub periods: usize,
    pub t: f64,
    pub t_final: f64,
    pub dt: f64,
    pub checkpoints: usize,
    pub cells: usize,
    pub one_sided: bool,
    pub out: PathBuf,
    pub format: Format,
}

fn finite(field: &'static str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(field, "must be finite"))
    }
}

fn positive(field: &'static str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(field, "must be positive and finite"))
    }
}

fn at_least(field: &'static str, v: usize, min: usize) -> CliResult<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("must be at least {min}")))
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, s: Settings) -> CliResult<RunConfig> {
        let geometry = match s.geometry.as_deref() {
            None => Geometry::Hyperbolic,
            Some(g) => g.parse().map_err(|_| CliError::config("geometry", format!("unknown geometry `{g}`")))?,
        };
        let branch = match s.branch.as_deref() {
            None => RootBranch::Minus,
            Some(b) => b.parse().map_err(|_| CliError::config("branch", format!("unknown branch `{b}`")))?,
        };
        let jacobian = match s.jacobian.as_deref() {
            None | Some("exact") => JacobianMode::Exact,
            Some("fd") => JacobianMode::FiniteDifference,
            Some(j) => return Err(CliError::config("jacobian", format!("expected exact or fd, got `{j}`"))),
        };
        let format = match s.format.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(f) => return Err(CliError::config("format", format!("expected csv or json, got `{f}`"))),
        };
        let m = at_least("m", s.m.unwrap_or(3), 1)?;
        let n = s.n.unwrap_or(m as u32);
        if n == 0 || !(n as usize).is_multiple_of(m) {
            return Err(CliError::config("n", format!("mode {n} is not a positive multiple of m = {m}")));
        }
        let trunc = at_least("trunc", s.trunc.unwrap_or(64), 1)?;
        if (n as usize) > trunc {
            return Err(CliError::config("trunc", format!("truncation {trunc} is below the mode {n}")));
        }
        let r = match s.r {
            None => None,
            Some(r) => {
                let r = positive("r", r)?;
                geometry.check_radius(r).map_err(|e| CliError::config("r", e.to_string()))?;
                Some(r)
            }
        };
        let eta = finite("eta", s.eta.unwrap_or(1e-2))?;
        if eta == 0.0 {
            return Err(CliError::config("eta", "must be nonzero"));
        }
        let nmax = s.nmax.unwrap_or(10);
        if nmax == 0 || nmax > 100_000 {
            return Err(CliError::config("nmax", "must lie in 1..=100000"));
        }
        Ok(RunConfig {
            command,
            geometry,
            a: finite("a", s.a.unwrap_or(0.0))?,
            m,
            n,
            branch,
            r,
            eta,
            eta_max: positive("eta_max", s.eta_max.unwrap_or(0.05))?,
            steps: at_least("steps", s.steps.unwrap_or(10), 1)?,
            trunc,
            tol: positive("tol", s.tol.unwrap_or(1e-11))?,
            jacobian,
            nmax,
            nodes: at_least("nodes", s.nodes.unwrap_or(256), 8)?,
            periods: at_least("periods", s.periods.unwrap_or(1), 1)?,
            t: finite("t", s.t.unwrap_or(0.0))?,
            t_final: positive("t_final", s.t_final.unwrap_or(0.1))?,
            dt: positive("dt", s.dt.unwrap_or(1e-4))?,
            checkpoints: at_least("checkpoints", s.checkpoints.unwrap_or(10), 1)?,
            cells: at_least("cells", s.cells.unwrap_or(201), 2)?,
            one_sided: s.one_sided.unwrap_or(false),
            out: s.out.unwrap_or_else(|| PathBuf::from("binormal-out")),
            format,
        })
    }
}
