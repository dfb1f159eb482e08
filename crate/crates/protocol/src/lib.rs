//! The registration ceremony: check-in, credential creation, check-out and
//! activation, as state machines over byte-exact payloads.
//!
//! - [`officials`]: check-in tickets, envelope printing, check-out.
//! - [`kiosk`]: the booth session producing real, fake and standing-vote
//!   receipt bundles.
//! - [`activation`]: the voter device's offline and online checks.
//! - [`setup`]: election genesis for tests, simulations and tooling.
//! - [`ceremony`]: whole-visit driver and fixture replay.

pub mod activation;
pub mod ceremony;
mod clock;
mod error;
pub mod kiosk;
pub mod officials;
pub mod payload;
pub mod setup;

pub use crate::{
    activation::{activate, ActivationResult, Check, CheckStatus, LedgerView, Mode, Verdict, VoterDevice},
    clock::{Clock, ManualClock, SystemClock},
    error::ProtocolError,
    kiosk::{Credential, KioskConfig, KioskSession, Phase, SessionEvent, Target},
    payload::{
        BundleKind, BundleState, CheckInTicket, CheckoutTicket, CommitPayload, Envelope, Payload, ReceiptBundle,
        ResponsePayload, Visible,
    },
    setup::{setup_election, Election, ElectionConfig, ElectionSecrets},
};
