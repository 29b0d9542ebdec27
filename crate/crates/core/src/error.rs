use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("eigenvalues {lambda:?} are outside the Garding cone Gamma_{k}")]
    ConeViolation { lambda: Vec<f64>, k: usize },

    #[error("cone violation at grid node {node}: eigenvalues {lambda:?} outside Gamma_{k}")]
    NodeConeViolation {
        node: usize,
        lambda: Vec<f64>,
        k: usize,
    },

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geodesic distance {0:e} is too small to evaluate the Laplacian of the distance")]
    DegenerateDistance(f64),

    #[error("base point lies inside the domain (minimum distance {0:e})")]
    QInsideDomain(f64),

    #[error("finite-difference stencil left the admissible domain after {0} step reductions")]
    FdDomainExit(usize),

    #[error("inadmissible field: {0}")]
    Inadmissible(String),

    #[error("no admissible initial guess after {attempts} attempts")]
    InitFailure { attempts: usize },

    #[error("line search stalled at Newton iteration {iteration} (step {alpha:e}, residual {residual:e})")]
    LineSearchStall {
        iteration: usize,
        alpha: f64,
        residual: f64,
    },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("linear solve failed after {iterations} iterations (relative residual {relative_residual:e})")]
    LinearSolveFailure {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("continuation step {step} of {steps} (amplitude {amplitude}) failed: {source}")]
    Continuation {
        step: usize,
        steps: usize,
        amplitude: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("maximum of the test function lies on the boundary ring at node {node}")]
    MaxOnBoundary { node: usize },

    #[error("largest Hessian eigenvalue {0:e} is not positive at the maximizer")]
    LogDomain(f64),

    #[error("{path}:{line}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised by the nonlinear solver rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::InitFailure { .. }
            | Error::LineSearchStall { .. }
            | Error::MaxIterations { .. }
            | Error::LinearSolveFailure { .. }
            | Error::NodeConeViolation { .. }
            | Error::Inadmissible(_) => true,
            Error::Continuation { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
