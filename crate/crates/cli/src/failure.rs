use std::fmt;

use fhle_core::Error;

/// The three failure classes of the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// A verification check did not hold, or a computation could not reach
    /// its tolerance. Exit code 1.
    Verification(String),
    /// Bad flags, parameters or input data. Exit code 2.
    Invalid(String),
    /// Reading or writing a file failed. Exit code 3.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verification(m) | Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) => Failure::Io(msg),
            Error::QuadratureFailed(_)
            | Error::NonConvergent(_)
            | Error::ExtrapolationUnstable { .. }
            | Error::AliasingDetected { .. } => Failure::Verification(msg),
            _ => Failure::Invalid(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
