use thiserror::Error;

/// Errors raised by the solvers and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("invalid harmonic index: {0}")]
    Index(String),
    #[error("degree {degree} exceeds band limit {limit}")]
    BandLimit { degree: usize, limit: usize },
    #[error("degenerate weight: {0}")]
    Degenerate(String),
    #[error("data support violates the admissible window: {0}")]
    Support(String),
    #[error("singular linear system at row {0}")]
    SingularSystem(usize),
    #[error("estimate hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("time step {dt} exceeds CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("solution exceeded guard {guard:e} at T = {time}")]
    BlowUp { guard: f64, time: f64 },
    #[error("lattice misaligned with the axis: {0}")]
    Axis(String),
    #[error("sample location outside lattice: {0}")]
    Range(String),
    #[error("fit window [{lo}, {hi}] holds {count} samples, need at least {need}")]
    EmptyWindow {
        lo: f64,
        hi: f64,
        count: usize,
        need: usize,
    },
    #[error("zero sample at x = {0} inside fit window")]
    ZeroSample(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical evolution itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Cfl { .. } | Error::BlowUp { .. } | Error::SingularSystem(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
