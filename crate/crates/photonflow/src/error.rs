use std::fmt;

use photonflow_core::Error as CoreError;

/// Process exit codes, one per failure class.
pub mod code {
    pub const VALIDATION: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
    pub const VERIFY: i32 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn validation(kind: &str, msg: impl Into<String>) -> Self {
        CliError { kind: kind.into(), code: code::VALIDATION, msg: msg.into() }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError { kind: "Io".into(), code: code::IO, msg: format!("{}: {err}", path.display()) }
    }

    pub fn verify(msg: impl Into<String>) -> Self {
        CliError { kind: "VerifyFailed".into(), code: code::VERIFY, msg: msg.into() }
    }

    /// `error: kind=<Kind> code=<n> msg="..."` on one line.
    pub fn line(&self) -> String {
        let msg = self.msg.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
        format!("error: kind={} code={} msg=\"{}\"", self.kind, self.code, msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = if e.is_validation() { code::VALIDATION } else { code::NUMERIC };
        CliError { kind: e.kind().into(), code, msg: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        // schema and syntax problems in user files
        CliError::validation("ConfigSchema", e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
