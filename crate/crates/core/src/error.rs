use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("junction inductance pole: |cos(phi) - gamma| = {distance:e} below {threshold:e}")]
    JunctionPole { distance: f64, threshold: f64 },

    #[error("degenerate star network: |2 L_sh + L_J| = {denominator:e} H below {threshold:e} H")]
    DegenerateNetwork { denominator: f64, threshold: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("non-positive effective mass L_m{mode} = {value:e} H")]
    NegativeMass { mode: char, value: f64 },

    #[error("lower normal mode is imaginary: g_r = {g:e} rad/s exceeds sqrt(omega_a omega_b)/2 = {limit:e} rad/s")]
    ImaginaryMode { g: f64, limit: f64 },

    #[error("effective qubit coupling diverges: |2 g_r| = omega_r")]
    CouplingDivergence,

    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("truncation overflow: top Fock level population {population:e} exceeds {threshold:e}")]
    TruncationOverflow { population: f64, threshold: f64 },

    #[error("gap estimate not converged in cutoff: shift {shift:e} exceeds {tolerance:e}")]
    TruncationNotConverged { shift: f64, tolerance: f64 },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InsufficientData(_)
                | Error::Format(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
