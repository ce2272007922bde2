use std::fmt;

use sensor_place_core::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_TOO_LARGE: i32 = 5;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MuEqualsOne(_) | Error::InfeasibleAlpha => EXIT_DOMAIN,
            Error::TooLarge { .. } => EXIT_TOO_LARGE,
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::CholeskyFailure(_) => 1,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
