use thiserror::Error;
use trip_ledger::LedgerError;
use trip_protocol::ProtocolError;
use trip_service::ServiceError;
use trip_sim::SimError;
use trip_tally::TallyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Tally(#[from] TallyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Service(#[from] ServiceError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "malformed-json",
            CliError::Protocol(e) => e.code(),
            CliError::Ledger(_) => "ledger",
            CliError::Tally(e) => e.code(),
            CliError::Sim(e) => e.code(),
            CliError::Service(_) => "service",
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
