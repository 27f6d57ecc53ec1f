use std::fmt;
use std::process::ExitCode;

use serde_json::json;

/// Everything that can stop a command, with its exit status.
#[derive(Debug)]
pub enum CliError {
    Core(quadmoments::Error),
    /// Bad flags or flag combinations caught before any work starts.
    Usage(String),
    Io(std::io::Error),
    /// Serialization failures; these indicate a bug.
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn internal(e: impl fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }

    fn kind(&self) -> &'static str {
        use quadmoments::Error as E;
        match self {
            CliError::Usage(_) => "validation",
            CliError::Core(E::Validation(_) | E::DimensionMismatch { .. } | E::Unsupported(_)) => "validation",
            CliError::Core(E::Budget { .. }) => "budget",
            CliError::Core(E::Numeric(_) | E::Overflow(_)) => "numeric",
            CliError::Core(E::Format(_)) => "cache_format",
            CliError::Core(E::Io(_)) | CliError::Io(_) => "io",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "validation" => 2,
            "budget" => 3,
            "numeric" => 4,
            "io" | "cache_format" => 5,
            _ => 70,
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.to_json());
        ExitCode::from(self.exit_code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(m) => write!(f, "invalid argument: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<quadmoments::Error> for CliError {
    fn from(e: quadmoments::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadmoments::Error as E;

    #[test]
    fn exit_codes_by_kind() {
        assert_eq!(CliError::usage("x").exit_code(), 2);
        assert_eq!(CliError::from(E::Validation("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::DimensionMismatch { expected: 2, got: 3 }).exit_code(), 2);
        assert_eq!(CliError::from(E::Budget { estimated: 2, budget: 1 }).exit_code(), 3);
        assert_eq!(CliError::from(E::Numeric("x".into())).exit_code(), 4);
        assert_eq!(CliError::from(E::Overflow("x".into())).exit_code(), 4);
        let j = CliError::from(E::Numeric("no convergence".into())).to_json();
        assert_eq!(j["error"]["kind"], "numeric");
        assert_eq!(j["error"]["exit_code"], 4);
    }
}
