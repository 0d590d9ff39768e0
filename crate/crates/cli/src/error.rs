use std::path::Path;

use pdm_core::PdmError;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: EXIT_RUNTIME,
            kind: "io".into(),
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn to_json(&self) -> String {
        let category = if self.code == EXIT_VALIDATION { "validation" } else { "runtime" };
        json!({ "error": self.kind, "category": category, "message": self.message }).to_string()
    }
}

impl From<PdmError> for CliError {
    fn from(e: PdmError) -> Self {
        CliError {
            code: if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME },
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}
