use std::fmt;
use std::path::Path;

use hcbm::Error;

/// Process exit codes.
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    /// An input file that could not be read or decoded.
    pub fn input(path: &Path, e: Error) -> Self {
        let f = Failure::from(e);
        Self::new(f.code, format!("{}: {}", path.display(), f.message))
    }

    pub fn write(path: &Path, e: impl fmt::Display) -> Self {
        Self::new(
            EXIT_INTERNAL,
            format!("cannot write {}: {e}", path.display()),
        )
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_PARSE,
            Error::InvalidHierarchy(_)
            | Error::NestingViolation { .. }
            | Error::NotPositiveSemiDefinite { .. }
            | Error::DegenerateParameters(_) => EXIT_MODEL,
            Error::ZeroVariance { .. }
            | Error::InvalidMatrix(_)
            | Error::InvalidPermutation(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidK { .. } => EXIT_DATA,
        };
        Self::new(code, e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;
