use thiserror::Error;

/// Everything that makes an invocation fail outright (exit code 2).
///
/// Well-formed negative verdicts ("not a quasi-isomorphism", "no homotopy")
/// are not errors; they are reports with exit code 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{context}: unknown reference {name:?}")]
    UnknownReference { name: String, context: String },
    #[error("{name}: shape mismatch: {message}")]
    Shape { name: String, message: String },
    #[error("{name}: not a complex, d^{} . d^{degree} != 0", degree + 1)]
    NotAComplex { name: String, degree: i64 },
    #[error("{name}: square at degree {degree} does not commute")]
    NonCommuting { name: String, degree: i64 },
    #[error("{name}: {message}")]
    InvalidValue { name: String, message: String },
    #[error("no {kind} named {name:?} in the session")]
    UnknownName { kind: &'static str, name: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] conecalc::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}
