use thiserror::Error;

pub type Result<T> = std::result::Result<T, PslabError>;

/// Every failure mode of the library. The CLI maps these onto exit codes
/// via [`PslabError::exit_code`].
#[derive(Debug, Error)]
pub enum PslabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("point {point:?} lies outside the grid box")]
    OutOfDomain { point: Vec<f64> },

    #[error("radius {radius} exceeds the box around the center; max admissible radius is {max_radius}")]
    RadiusTooLarge { radius: f64, max_radius: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("iteration diverged (NaN after {iterations} sweeps); try a smaller relaxation factor")]
    Divergence { iterations: usize },

    #[error("degenerate center: H = {value:.3e} at r = {radius}")]
    DegenerateCenter { radius: f64, value: f64 },

    #[error("degenerate component: {0}")]
    DegenerateComponent(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("field file: {0}")]
    Format(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PslabError {
    /// 2 for configuration and file-format problems, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            PslabError::Config { .. }
            | PslabError::Format(_)
            | PslabError::Io(_)
            | PslabError::InvalidArgument(_)
            | PslabError::Unsupported(_)
            | PslabError::Misuse(_)
            | PslabError::InvalidGrid(_)
            | PslabError::InvalidField(_) => 2,
            _ => 3,
        }
    }
}
