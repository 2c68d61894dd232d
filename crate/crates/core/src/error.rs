use alloc::string::String;
use core::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument violates its precondition (non-positive mass,
    /// negative time grid, too-large time step, ...).
    InvalidParameter(String),
    /// The input is valid on its own but the operation does not support it
    /// (e.g. unequal oscillator masses in the center-of-mass transform).
    UnsupportedConfiguration(String),
    /// The input does not have the structural shape the operation requires
    /// (wrong coordinate layout, not an independent-oscillator form, ...).
    Structure(String),
    /// No thermal equilibrium state exists: the potential is indefinite or
    /// carries a zero mode.
    NoEquilibrium(String),
    /// The operation was called on the wrong kind of system.
    Usage(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::UnsupportedConfiguration(m) => write!(f, "unsupported configuration: {m}"),
            Error::Structure(m) => write!(f, "structure error: {m}"),
            Error::NoEquilibrium(m) => write!(f, "no equilibrium state: {m}"),
            Error::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
