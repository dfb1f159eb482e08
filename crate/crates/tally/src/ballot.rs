//! Ballot construction and the per-ballot checks.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use trip_core::{
    codec::Writer,
    elgamal::encrypt_returning_randomness,
    group::div,
    zkp::{DleqStatement, NizkProof},
    Ciphertext, Group, SigningKeypair,
};
use trip_ledger::{Ballot, BallotProof, Entry, EntryBody, VotingEvent};

use crate::TallyError;

const CREDENTIAL_TAG: &[u8] = b"trip/ballot/credential";
const OPTION_TAG: &[u8] = b"trip/ballot/option";

/// Group element for option `j`: `g1^(j+1)`.
pub fn option_element<G: Group>(j: usize) -> G::Element {
    G::pow(&G::g1(), &G::scalar(j as u64 + 1))
}

/// Options `0..n` as group elements.
pub fn option_elements<G: Group>(n: usize) -> Vec<G::Element> {
    (0..n).map(option_element::<G>).collect()
}

/// Why a ballot is not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    BadSig,
    BadProof,
    UnregisteredCredential,
    RevoteForbidden,
    UnknownEvent,
    EventClosed,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::BadSig => "bad-sig",
            RejectReason::BadProof => "bad-proof",
            RejectReason::UnregisteredCredential => "unregistered-credential",
            RejectReason::RevoteForbidden => "revote-forbidden",
            RejectReason::UnknownEvent => "unknown-event",
            RejectReason::EventClosed => "event-closed",
        }
    }
}

fn context<G: Group>(e1: &Ciphertext<G>, e2: &Ciphertext<G>, event: &str, credential: &G::Element) -> Vec<u8> {
    let mut w = Writer::new();
    w.field(&e1.to_bytes()).field(&e2.to_bytes()).field(event.as_bytes()).element::<G>(credential);
    w.finish()
}

fn credential_statement<G: Group>(
    key: &G::Element,
    e2: &Ciphertext<G>,
    credential: &G::Element,
) -> DleqStatement<G, 3> {
    DleqStatement::new([G::g1(), G::g2(), *key], [e2.c1, e2.c2, div::<G>(&e2.c3, credential)])
}

fn option_statement<G: Group>(e1: &Ciphertext<G>) -> DleqStatement<G, 2> {
    DleqStatement::new([G::g1(), G::g2()], [e1.c1, e1.c2])
}

/// Casts a ballot for option `option` of `event`, signed with the credential.
pub fn cast_ballot<G: Group, R: RngCore + CryptoRng>(
    credential: &SigningKeypair<G>,
    option: usize,
    event: &VotingEvent<G>,
    key: &G::Element,
    rng: &mut R,
) -> Result<Entry<G>, TallyError> {
    let element = *event.options.get(option).ok_or(TallyError::InvalidOption(option))?;
    Ok(cast_element(credential, &element, &event.id, key, rng))
}

/// Casts a ballot encrypting an arbitrary element, valid option or not.
pub fn cast_element<G: Group, R: RngCore + CryptoRng>(
    credential: &SigningKeypair<G>,
    element: &G::Element,
    event: &str,
    key: &G::Element,
    rng: &mut R,
) -> Entry<G> {
    let public = *credential.public();
    let (e1, s1) = encrypt_returning_randomness::<G, R>(key, element, rng);
    let (e2, s2) = encrypt_returning_randomness::<G, R>(key, &public, rng);
    let ctx = context(&e1, &e2, event, &public);
    let proof = BallotProof {
        credential: NizkProof::prove(CREDENTIAL_TAG, &credential_statement(key, &e2, &public), s2, &ctx, rng),
        option: NizkProof::prove(OPTION_TAG, &option_statement(&e1), s1, &ctx, rng),
    };
    let ballot = Ballot { e1, e2, proof, event: event.to_owned() };
    Entry::sign(credential, EntryBody::Ballot(ballot))
}

/// `Pf` for a ballot whose author claims credential `V`.
pub fn verify_proof<G: Group>(key: &G::Element, credential: &G::Element, ballot: &Ballot<G>) -> bool {
    let ctx = context(&ballot.e1, &ballot.e2, &ballot.event, credential);
    ballot.proof.credential.verify(CREDENTIAL_TAG, &credential_statement(key, &ballot.e2, credential), &ctx)
        && ballot.proof.option.verify(OPTION_TAG, &option_statement(&ballot.e1), &ctx)
}

/// `σ_v` then `Pf`; returns the ballot body.
pub fn check_ballot<'a, G: Group>(entry: &'a Entry<G>, key: &G::Element) -> Result<&'a Ballot<G>, RejectReason> {
    let EntryBody::Ballot(ballot) = &entry.body else {
        return Err(RejectReason::BadSig);
    };
    if !entry.verify_signature() {
        return Err(RejectReason::BadSig);
    }
    if !verify_proof(key, &entry.author, ballot) {
        return Err(RejectReason::BadProof);
    }
    Ok(ballot)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use trip_core::{Ristretto, TestGroup};
    use trip_ledger::{EventStatus, RevotePolicy};

    use super::*;

    fn event<G: Group>() -> VotingEvent<G> {
        VotingEvent {
            id: "e1".into(),
            options: option_elements::<G>(3),
            revote: RevotePolicy::Forbid,
            vote_limit: false,
            status: EventStatus::Open,
        }
    }

    fn honest_ballots_check<G: Group>() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let key = G::pow(&G::g1(), &G::scalar(3));
        let v = SigningKeypair::<G>::generate(&mut rng);
        for j in 0..3 {
            let entry = cast_ballot(&v, j, &event::<G>(), &key, &mut rng).unwrap();
            assert!(check_ballot(&entry, &key).is_ok());
        }
        assert!(matches!(cast_ballot(&v, 3, &event::<G>(), &key, &mut rng), Err(TallyError::InvalidOption(3))));
    }

    #[test]
    fn honest_ballots_pass_in_both_groups() {
        honest_ballots_check::<TestGroup>();
        honest_ballots_check::<Ristretto>();
    }

    #[test]
    fn options_are_distinct_members() {
        let options = option_elements::<TestGroup>(10);
        for (i, a) in options.iter().enumerate() {
            assert!(options[i + 1..].iter().all(|b| a != b));
            assert_ne!(*a, TestGroup::identity());
        }
    }

    #[test]
    fn proof_for_v_over_an_encryption_of_another_key_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let key = Ristretto::pow(&Ristretto::g1(), &Ristretto::scalar(5));
        let v = SigningKeypair::<Ristretto>::generate(&mut rng);
        let other = SigningKeypair::<Ristretto>::generate(&mut rng);
        let mine = cast_ballot(&v, 0, &event(), &key, &mut rng).unwrap();
        let theirs = cast_ballot(&other, 0, &event(), &key, &mut rng).unwrap();
        let (EntryBody::Ballot(mut b), EntryBody::Ballot(t)) = (mine.body, theirs.body) else { unreachable!() };
        b.e2 = t.e2;
        let forged = Entry::sign(&v, EntryBody::Ballot(b));
        assert_eq!(check_ballot(&forged, &key), Err(RejectReason::BadProof));
    }

    #[test]
    fn signature_over_altered_event_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let key = Ristretto::pow(&Ristretto::g1(), &Ristretto::scalar(5));
        let v = SigningKeypair::<Ristretto>::generate(&mut rng);
        let mut entry = cast_ballot(&v, 1, &event(), &key, &mut rng).unwrap();
        if let EntryBody::Ballot(b) = &mut entry.body {
            b.event = "e2".into();
        }
        assert_eq!(check_ballot(&entry, &key), Err(RejectReason::BadSig));
    }
}
