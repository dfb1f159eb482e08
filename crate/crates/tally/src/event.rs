//! Voting event lifecycle and ballot acceptance.

use trip_core::{Group, SigningKeypair};
use trip_ledger::{Entry, EntryBody, EventStatus, Ledger, LedgerError, RevotePolicy, VotingEvent};

use crate::{
    ballot::{check_ballot, option_elements, RejectReason},
    TallyError,
};

/// Opens event `id` with `options` choices, encoded as [`option_elements`].
pub fn open_event<G: Group>(
    official: &SigningKeypair<G>,
    ledger: &Ledger<G>,
    id: &str,
    options: usize,
    revote: RevotePolicy,
    vote_limit: bool,
) -> Result<VotingEvent<G>, TallyError> {
    let event = VotingEvent {
        id: id.to_owned(),
        options: option_elements::<G>(options),
        revote,
        vote_limit,
        status: EventStatus::Open,
    };
    ledger.append(Entry::sign(official, EntryBody::VotingEvent(event.clone())))?;
    Ok(event)
}

pub fn close_event<G: Group>(official: &SigningKeypair<G>, ledger: &Ledger<G>, id: &str) -> Result<u64, TallyError> {
    let mut event = ledger.voting_event(id).ok_or_else(|| TallyError::UnknownEvent(id.to_owned()))?;
    event.status = EventStatus::Closed;
    Ok(ledger.append(Entry::sign(official, EntryBody::VotingEvent(event)))?)
}

/// Checks a ballot against the current ledger state and appends it.
pub fn ballot_accept<G: Group>(ledger: &Ledger<G>, entry: Entry<G>) -> Result<u64, TallyError> {
    let EntryBody::Ballot(ballot) = &entry.body else {
        return Err(TallyError::Rejected(RejectReason::BadSig));
    };
    let event = ledger.voting_event(&ballot.event).ok_or(TallyError::Rejected(RejectReason::UnknownEvent))?;
    if event.status != EventStatus::Open {
        return Err(TallyError::Rejected(RejectReason::EventClosed));
    }
    let key = ledger.election_key().ok_or(TallyError::NoElectionKey)?.key;
    check_ballot(&entry, &key).map_err(TallyError::Rejected)?;
    if event.vote_limit && ledger.credential_registration(&entry.author).is_none() {
        return Err(TallyError::Rejected(RejectReason::UnregisteredCredential));
    }
    if event.revote == RevotePolicy::Forbid && ledger.ballots(&event.id).iter().any(|b| *b.author() == entry.author) {
        return Err(TallyError::Rejected(RejectReason::RevoteForbidden));
    }
    ledger.append(entry).map_err(|e| match e {
        LedgerError::DuplicateBallot => TallyError::Rejected(RejectReason::RevoteForbidden),
        LedgerError::UnregisteredCredential => TallyError::Rejected(RejectReason::UnregisteredCredential),
        other => other.into(),
    })
}
