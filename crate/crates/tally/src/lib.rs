//! Voting and tallying.
//!
//! Ballots are `(E1, E2, Pf, ε)` signed by the credential `V`: `E1`
//! encrypts the option, `E2` encrypts `V`, and `Pf` proves knowledge of the
//! randomness of both with `E2` consistent with `V`. The tally rechecks every
//! ballot, applies the revote policy, mixes the surviving `(E1, E2)` pairs,
//! weights each by how many roll entries' `V_e` it PET-matches, and decrypts
//! the `E1` of every ballot with non-zero weight.

pub mod ballot;
mod error;
pub mod event;
pub mod tally;

pub use crate::{
    ballot::{cast_ballot, cast_element, check_ballot, option_element, option_elements, RejectReason},
    error::TallyError,
    event::{ballot_accept, close_event, open_event},
    tally::{publish, roll_from_ledger, tally, DiscardReason, TallyResult},
};
