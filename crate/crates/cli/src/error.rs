use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(pnlab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Core(pnlab::Error::Inconclusive(_)) => 3,
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<pnlab::Error> for CliError {
    fn from(e: pnlab::Error) -> Self {
        CliError::Core(e)
    }
}
