use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}: parse error at line {line}, column {column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation error: check `{check}` failed (defect {defect:e})")]
    Validation { check: String, defect: f64 },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] srcd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_internal_consistency() => 3,
            _ => 2,
        }
    }
}
