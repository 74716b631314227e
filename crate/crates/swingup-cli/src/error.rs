use serde_json::{json, Value};

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Io(String),
    Core(swingup::Error),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(swingup::Error::Validation(_)) => "validation",
            CliError::Core(_) => "precondition",
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Validation(v) | CliError::Core(swingup::Error::Validation(v)) => v.clone(),
            CliError::Io(m) => vec![m.clone()],
            CliError::Core(e) => vec![e.to_string()],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "messages": self.messages() } })
    }
}

impl From<swingup::Error> for CliError {
    fn from(e: swingup::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.messages().join("; "))
    }
}

impl std::error::Error for CliError {}
