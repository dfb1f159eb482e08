use std::{fmt, io};

use thiserror::Error;
use trip_core::CryptoError;

use crate::EntryKind;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("signature on {0} entry does not verify")]
    BadSignature(EntryKind),
    #[error("author is not authorized to append {0} entries")]
    Unauthorized(EntryKind),
    #[error("the first entry must be a key binding listing its author as an official")]
    MissingGenesis,
    #[error("key binding conflicts with the ledger: {0}")]
    Conflict(&'static str),
    #[error("envelope challenge hash already issued")]
    DuplicateEnvelope,
    #[error("envelope challenge was never issued")]
    UnknownEnvelope,
    #[error("envelope challenge already consumed")]
    EnvelopeConsumed,
    #[error("kiosk key is not bound on the ledger")]
    UnknownKiosk,
    #[error("kiosk signature does not verify")]
    BadKioskSignature,
    #[error("voter {0} is not on the electoral roll")]
    UnknownVoter(String),
    #[error("credential already registered")]
    DuplicateCredential,
    #[error("credential was never registered by a kiosk")]
    UnregisteredCredential,
    #[error("unknown voting event {0}")]
    UnknownEvent(String),
    #[error("voting event {0} is closed")]
    EventClosed(String),
    #[error("voting event {0} is still open")]
    EventOpen(String),
    #[error("invalid voting event: {0}")]
    InvalidEvent(&'static str),
    #[error("credential already voted in this event and revoting is forbidden")]
    DuplicateBallot,
    #[error("ledger file failed verification at {0}")]
    Corrupt(Box<AuditFailure>),
    #[error(transparent)]
    Malformed(#[from] CryptoError),
    #[error("ledger storage: {0}")]
    Io(#[from] io::Error),
}

/// What went wrong with one record during an audit.
#[derive(Debug, Error)]
pub enum AuditFault {
    #[error("record framing is truncated or inconsistent")]
    Framing,
    #[error("record carries index {found}")]
    IndexMismatch { found: u64 },
    #[error("record checksum mismatch")]
    Checksum,
    #[error("entry does not decode: {0}")]
    Decode(CryptoError),
    #[error("entry rejected on replay: {0}")]
    Rejected(LedgerError),
}

#[derive(Debug, Error)]
pub struct AuditFailure {
    pub index: u64,
    pub fault: AuditFault,
}

impl fmt::Display for AuditFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "entry {}: {}", self.index, self.fault)
    }
}
