use thiserror::Error;
use trip_core::CryptoError;
use trip_ledger::LedgerError;

use crate::RejectReason;

#[derive(Debug, Error)]
pub enum TallyError {
    #[error("no option {0}")]
    InvalidOption(usize),
    #[error("ballot rejected: {}", .0.as_str())]
    Rejected(RejectReason),
    #[error("unknown voting event {0}")]
    UnknownEvent(String),
    #[error("voting event {0} is still open")]
    EventOpen(String),
    #[error("ledger has no election key")]
    NoElectionKey,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

impl TallyError {
    pub fn code(&self) -> &'static str {
        match self {
            TallyError::InvalidOption(_) => "invalid-option",
            TallyError::Rejected(r) => r.as_str(),
            TallyError::UnknownEvent(_) => "unknown-event",
            TallyError::EventOpen(_) => "event-open",
            TallyError::NoElectionKey => "no-election-key",
            TallyError::Crypto(CryptoError::InsufficientShares { .. }) => "insufficient-shares",
            TallyError::Crypto(_) => "crypto",
            TallyError::Ledger(_) => "ledger",
        }
    }
}
