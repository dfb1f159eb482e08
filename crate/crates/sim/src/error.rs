use thiserror::Error;
use trip_core::CryptoError;
use trip_ledger::LedgerError;
use trip_protocol::ProtocolError;
use trip_tally::TallyError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Tally(#[from] TallyError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::InvalidConfig(_) => "invalid-config",
            SimError::Protocol(e) => e.code(),
            SimError::Tally(e) => e.code(),
            SimError::Ledger(_) => "ledger",
            SimError::Crypto(_) => "crypto",
        }
    }
}
