use thiserror::Error;
use trip_core::CryptoError;
use trip_ledger::LedgerError;

use crate::Phase;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("voter {0} is not on the electoral roll")]
    UnknownVoter(String),
    #[error("ticket is signed by a key outside the accepted officials")]
    UnknownOfficial,
    #[error("signature does not verify")]
    BadSignature,
    #[error("check-in ticket is stale")]
    StaleTicket,
    #[error("operation not allowed in phase {found:?}")]
    WrongPhase { found: Phase },
    #[error("envelope signature does not verify")]
    InvalidEnvelope,
    #[error("envelope already used in this session")]
    EnvelopeReuse,
    #[error("no real credential has been created yet")]
    NoRealCredential,
    #[error("unknown standing-vote entity {0}")]
    UnknownEntity(usize),
    #[error("no commit candidate {0}")]
    UnknownCandidate(usize),
    #[error("kiosk key is not bound on the ledger")]
    UnknownKiosk,
    #[error("kiosk signature does not verify")]
    BadKioskSignature,
    #[error("ledger has no election key")]
    NoElectionKey,
    #[error("group is too small for {0} distinct actor keys")]
    TooManyKeys(usize),
    #[error("key file: {0}")]
    KeyFile(&'static str),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

impl ProtocolError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            ProtocolError::UnknownVoter(_) => "unknown-voter",
            ProtocolError::UnknownOfficial => "unknown-official",
            ProtocolError::BadSignature => "bad-signature",
            ProtocolError::StaleTicket => "stale-ticket",
            ProtocolError::WrongPhase { .. } => "wrong-phase",
            ProtocolError::InvalidEnvelope => "invalid-envelope",
            ProtocolError::EnvelopeReuse => "envelope-reuse",
            ProtocolError::NoRealCredential => "no-real-credential",
            ProtocolError::UnknownEntity(_) => "unknown-entity",
            ProtocolError::UnknownCandidate(_) => "unknown-candidate",
            ProtocolError::UnknownKiosk => "unknown-kiosk",
            ProtocolError::BadKioskSignature => "bad-kiosk-signature",
            ProtocolError::NoElectionKey => "no-election-key",
            ProtocolError::TooManyKeys(_) => "too-many-keys",
            ProtocolError::KeyFile(_) => "key-file",
            ProtocolError::Crypto(_) => "malformed",
            ProtocolError::Ledger(_) => "ledger",
        }
    }
}
