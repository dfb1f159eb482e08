//! Authenticated append-only ledger.
//!
//! Every entry names its author and carries the author's signature over the
//! entry body, so the log can be re-verified from its bytes alone. A genesis
//! key binding certifies the officials, kiosks, printers and talliers, and
//! [`authorized`] decides which role may append which kind of entry.
//!
//! Persistence is pluggable: [`Ledger::in_memory`] keeps records in memory
//! only, [`Ledger::open`] appends them to a file.

mod entry;
mod error;
mod ledger;
mod mailbox;
pub mod messages;
mod store;

pub use crate::{
    entry::{
        authorized, Ballot, BallotProof, CredentialRegistered, Entry, EntryBody, EntryKind, EnvelopeConsumed,
        EnvelopeIssued, EventStatus, KeyBinding, LedgerEntry, RegistrationSession, RevotePolicy, Role, RollEntry,
        StandingEntity, TallyArtifact, VotingEvent,
    },
    error::{AuditFailure, AuditFault, LedgerError},
    ledger::{audit, genesis_group, AuditReport, Ledger},
    mailbox::{Mailbox, Notification},
    store::{encode_record, FileStore, MemoryStore, Store},
};
