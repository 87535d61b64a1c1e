use std::fmt;
use std::path::Path;

/// Errors that stop a command; all exit with status 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Config(String),
    Input(String),
    Output(String),
    Run(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Output(m) => write!(f, "output error: {m}"),
            Failure::Run(m) => write!(f, "run error: {m}"),
        }
    }
}

impl From<fracheat_core::Error> for Failure {
    fn from(e: fracheat_core::Error) -> Self {
        match e {
            fracheat_core::Error::Io(io) => Failure::Output(io.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

pub fn output(path: &Path, e: impl fmt::Display) -> Failure {
    Failure::Output(format!("{}: {e}", path.display()))
}
