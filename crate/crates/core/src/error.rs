use thiserror::Error;

/// Coarse error category, stable across variants. Front ends map it to exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller supplied something invalid (parameters, sizes, modes).
    Config,
    /// An iterative or marching procedure failed to converge.
    Divergence,
    /// A mathematical domain or regularity condition is violated.
    Domain,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid of {grid} nodes cannot resolve truncation {trunc} (need at least {need})")]
    Aliasing { grid: usize, trunc: usize, need: usize },

    #[error(
        "grid samples are not the boundary values of a real series: imaginary residue {residue:.3e} exceeds {tol:.3e}"
    )]
    SymmetryViolation { residue: f64, tol: f64 },

    #[error("radius {r} is outside the admissible range for the {geometry} geometry")]
    RadiusOutOfRange { r: f64, geometry: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation mismatch: profile has {profile}, parameters expect {params}")]
    TruncationMismatch { profile: usize, params: usize },

    #[error("denominator {value:.3e} is too close to zero at node {node}")]
    NearSingular { value: f64, node: usize },

    #[error("closed-form admissible modes {lemma:?} disagree with numerical positivity {numeric:?}")]
    AdmissibilityMismatch { lemma: Vec<u32>, numeric: Vec<u32> },

    #[error("radius {r} does not make mode {n} singular (determinant {det:.3e})")]
    NotAnEigenpair { n: u32, r: f64, det: f64 },

    #[error("kernel of mode {n} is degenerate at this radius")]
    DegenerateKernel { n: u32 },

    #[error("mode {n} is not an admissible bifurcation mode: {reason}")]
    NotAdmissible { n: u32, reason: String },

    #[error("transversality fails at mode {n}: {reason}")]
    TransversalityFailed { n: u32, reason: String },

    #[error("kernel is not simple in the {mfold}-fold space: modes {modes:?} are also singular")]
    KernelNotSimple { mfold: usize, modes: Vec<u32> },

    #[error("Newton iteration diverged after {iters} iterations (residual {residual:.3e})")]
    Divergence { iters: usize, residual: f64 },

    #[error("time integration blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("spectral resolution lost: tail energy {tail:.3e} exceeds {tol:.3e}")]
    ResolutionLoss { tail: f64, tol: f64 },

    #[error("quadrature failed to reach tolerance {tol:.1e} (last change {change:.3e})")]
    QuadratureFailure { tol: f64, change: f64 },

    #[error("profile leaves the unit disk: |z| = {modulus}")]
    OutsideDisk { modulus: f64 },

    #[error("tangent {tangent:?} has no stereographic image")]
    ProjectionSingular { tangent: [f64; 3] },

    #[error("pole: {0}")]
    Pole(String),

    #[error("unbounded: {0}")]
    Unbounded(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Aliasing { .. }
            | Error::InvalidParameter(_)
            | Error::TruncationMismatch { .. }
            | Error::RadiusOutOfRange { .. } => ErrorKind::Config,
            Error::Divergence { .. }
            | Error::BlowUp { .. }
            | Error::QuadratureFailure { .. }
            | Error::ResolutionLoss { .. }
            | Error::Unbounded(_) => ErrorKind::Divergence,
            Error::SymmetryViolation { .. }
            | Error::NearSingular { .. }
            | Error::AdmissibilityMismatch { .. }
            | Error::NotAnEigenpair { .. }
            | Error::DegenerateKernel { .. }
            | Error::NotAdmissible { .. }
            | Error::TransversalityFailed { .. }
            | Error::KernelNotSimple { .. }
            | Error::OutsideDisk { .. }
            | Error::ProjectionSingular { .. }
            | Error::Pole(_) => ErrorKind::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
