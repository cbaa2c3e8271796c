use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Dimensions of matrices or sample arrays do not fit together.
    ShapeMismatch(String),
    /// Invalid scalar parameter (negative width, empty grid, ...).
    InvalidInput(String),
    NonUnitaryScattering { residual: f64 },
    NotHermitian { which: &'static str, residual: f64 },
    Unstable { margin: f64 },
    NotPassive,
    /// Pulse weight sitting on the grid boundary or inside the decay window.
    SupportTruncated { mass: f64, limit: f64 },
    GridNotPow2 { n: usize },
    TooManyPhotons { count: usize, limit: usize },
    TooManyChannels { m: usize, limit: usize },
    GridTooLarge { ops: f64, limit: f64 },
    DimensionBudget { bytes: f64, budget: f64 },
    StepTooLarge { step: f64, limit: f64 },
    NumericOverflow(&'static str),
}

impl Error {
    /// Stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NonUnitaryScattering { .. } => "NonUnitaryScattering",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::Unstable { .. } => "Unstable",
            Error::NotPassive => "NotPassive",
            Error::SupportTruncated { .. } => "SupportTruncated",
            Error::GridNotPow2 { .. } => "GridNotPow2",
            Error::TooManyPhotons { .. } => "TooManyPhotons",
            Error::TooManyChannels { .. } => "TooManyChannels",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::DimensionBudget { .. } => "DimensionBudget",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::NumericOverflow(_) => "NumericOverflow",
        }
    }

    /// Errors caused by the input description rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ShapeMismatch(_)
                | Error::InvalidInput(_)
                | Error::NonUnitaryScattering { .. }
                | Error::NotHermitian { .. }
                | Error::NotPassive
                | Error::GridNotPow2 { .. }
                | Error::TooManyPhotons { .. }
                | Error::TooManyChannels { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch(s) => write!(f, "shape mismatch: {s}"),
            Error::InvalidInput(s) => write!(f, "invalid input: {s}"),
            Error::NonUnitaryScattering { residual } => {
                write!(f, "scattering matrix is not unitary (residual {residual:e})")
            }
            Error::NotHermitian { which, residual } => {
                write!(f, "{which} lacks the required symmetry (residual {residual:e})")
            }
            Error::Unstable { margin } => write!(f, "system is not stable (margin {margin:e})"),
            Error::NotPassive => write!(f, "operation requires a passive system"),
            Error::SupportTruncated { mass, limit } => {
                write!(f, "pulse mass {mass:e} at the grid edge exceeds {limit:e}")
            }
            Error::GridNotPow2 { n } => write!(f, "frequency mode needs a power-of-two grid, got {n}"),
            Error::TooManyPhotons { count, limit } => {
                write!(f, "{count} photons exceed the pairing bound {limit}")
            }
            Error::TooManyChannels { m, limit } => write!(f, "{m} channels exceed the limit {limit}"),
            Error::GridTooLarge { ops, limit } => {
                write!(f, "reduction needs {ops:e} operations, budget is {limit:e}")
            }
            Error::DimensionBudget { bytes, budget } => {
                write!(f, "tensor needs {bytes:e} bytes, budget is {budget:e}")
            }
            Error::StepTooLarge { step, limit } => {
                write!(f, "dt*|A| = {step:e} exceeds {limit:e}")
            }
            Error::NumericOverflow(s) => write!(f, "numeric overflow in {s}"),
        }
    }
}

impl core::error::Error for Error {}
