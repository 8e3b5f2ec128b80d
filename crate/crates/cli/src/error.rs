use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pdtp_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
        }
    }

    fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(pdtp_core::Error::OracleOnlyBand { .. }) => {
                Some("rerun with --route oracle (or --route auto)")
            }
            CliError::Core(pdtp_core::Error::NonConvergence { .. }) => Some("rerun with --route oracle"),
            CliError::Core(pdtp_core::Error::TailBudget { .. }) => Some("raise --eps-tail"),
            _ => None,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
        });
        if let Some(h) = self.hint() {
            body["hint"] = json!(h);
        }
        json!({ "error": body }).to_string()
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}
