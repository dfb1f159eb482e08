//! Filtering tally: recheck, revote policy, re-encryption mix, PET against
//! the roll, threshold decryption.

use std::collections::HashMap;

use rand::{seq::SliceRandom, CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use trip_core::{pet::pet_test, threshold::meg_decrypt_threshold, Ciphertext, Group, SigningKeypair, TallierShare};
use trip_ledger::{Entry, EntryBody, EventStatus, Ledger, LedgerEntry, RevotePolicy, TallyArtifact, VotingEvent};

use crate::{
    ballot::{check_ballot, RejectReason},
    TallyError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscardReason {
    BadSig,
    BadProof,
    UnregisteredCredential,
    RevoteForbidden,
    /// An earlier ballot by the same credential, under last-counts.
    Superseded,
    /// `E2` matches no roll entry: a fake credential.
    NoRollMatch,
    /// `E1` decrypts to no option element.
    InvalidOption,
}

impl From<RejectReason> for DiscardReason {
    fn from(r: RejectReason) -> Self {
        match r {
            RejectReason::BadSig | RejectReason::UnknownEvent | RejectReason::EventClosed => DiscardReason::BadSig,
            RejectReason::BadProof => DiscardReason::BadProof,
            RejectReason::UnregisteredCredential => DiscardReason::UnregisteredCredential,
            RejectReason::RevoteForbidden => DiscardReason::RevoteForbidden,
        }
    }
}

/// Discard before the mix, by ledger index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerDiscard {
    pub index: u64,
    pub reason: DiscardReason,
}

/// Discard after the mix, by mixed position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixDiscard {
    pub position: usize,
    pub reason: DiscardReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyResult {
    pub event: String,
    pub counts: Vec<u64>,
    pub ballots_on_ledger: usize,
    pub discarded_before_mix: Vec<LedgerDiscard>,
    pub mixed: usize,
    /// Outputs shown PET-equal to their mix input, for both ciphertexts.
    pub mix_consistent: usize,
    pub roll_size: usize,
    /// Roll matches per mixed position.
    pub weights: Vec<u64>,
    pub discarded_after_mix: Vec<MixDiscard>,
    pub pet_evaluations: usize,
    /// Hash over the PET outcome bits in (position, roll index) order.
    pub pet_matrix_digest: String,
}

impl TallyResult {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Deterministic report bytes, as stored in the tally artifact.
    pub fn report(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("plain data serializes")
    }
}

/// `V_e` of the latest registration of every voter on the roll.
pub fn roll_from_ledger<G: Group>(ledger: &Ledger<G>) -> Vec<Ciphertext<G>> {
    ledger.current_registrations().iter().filter_map(|e| e.registration().map(|r| r.v_e)).collect()
}

/// Recheck and revote filtering: the ballots that enter the mix.
fn admissible<G: Group>(
    ledger: &Ledger<G>,
    event: &VotingEvent<G>,
    key: &G::Element,
    ballots: &[LedgerEntry<G>],
    discards: &mut Vec<LedgerDiscard>,
) -> Vec<(Ciphertext<G>, Ciphertext<G>)> {
    let mut valid = Vec::new();
    for entry in ballots {
        let checked = check_ballot(&entry.entry, key).and_then(|b| {
            if event.vote_limit && ledger.credential_registration(entry.author()).is_none() {
                Err(RejectReason::UnregisteredCredential)
            } else {
                Ok(b)
            }
        });
        match checked {
            Ok(b) => valid.push((entry.index, G::encode_element(entry.author()), (b.e1, b.e2))),
            Err(r) => discards.push(LedgerDiscard { index: entry.index, reason: r.into() }),
        }
    }
    // index of the ballot that counts for each credential
    let mut keep: HashMap<Vec<u8>, u64> = HashMap::new();
    for (index, author, _) in &valid {
        match event.revote {
            RevotePolicy::Forbid => {
                keep.entry(author.clone()).or_insert(*index);
            }
            RevotePolicy::LastCounts => {
                keep.insert(author.clone(), *index);
            }
        }
    }
    let mut out = Vec::new();
    for (index, author, pair) in valid {
        if keep[&author] == index {
            out.push(pair);
        } else {
            let reason = match event.revote {
                RevotePolicy::Forbid => DiscardReason::RevoteForbidden,
                RevotePolicy::LastCounts => DiscardReason::Superseded,
            };
            discards.push(LedgerDiscard { index, reason });
        }
    }
    discards.sort_by_key(|d| d.index);
    out
}

/// An `(E1, E2)` ballot pair.
pub type Pair<G> = (Ciphertext<G>, Ciphertext<G>);

/// Re-encrypts every pair and permutes the list. Returns the outputs and,
/// for each output, the input position it came from.
pub fn reencryption_shuffle<G: Group, R: RngCore + CryptoRng>(
    pairs: &[Pair<G>],
    key: &G::Element,
    rng: &mut R,
) -> (Vec<Pair<G>>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(rng);
    let out = order.iter().map(|&i| (pairs[i].0.rerandomize(key, rng), pairs[i].1.rerandomize(key, rng))).collect();
    (out, order)
}

/// Runs the tally of a closed event against `roll`.
pub fn tally<G: Group, R: RngCore + CryptoRng>(
    ledger: &Ledger<G>,
    event_id: &str,
    shares: &[TallierShare<G>],
    roll: &[Ciphertext<G>],
    rng: &mut R,
) -> Result<TallyResult, TallyError> {
    let event = ledger.voting_event(event_id).ok_or_else(|| TallyError::UnknownEvent(event_id.to_owned()))?;
    if event.status != EventStatus::Closed {
        return Err(TallyError::EventOpen(event_id.to_owned()));
    }
    let public = ledger.election_key().ok_or(TallyError::NoElectionKey)?;
    let key = public.key;
    let ballots = ledger.ballots(event_id);
    let mut discarded_before_mix = Vec::new();
    let pairs = admissible(ledger, &event, &key, &ballots, &mut discarded_before_mix);

    let (mixed, order) = reencryption_shuffle(&pairs, &key, rng);
    let mut mix_consistent = 0;
    for (out, &i) in mixed.iter().zip(&order) {
        let e1 = pet_test(&public, shares, &out.0, &pairs[i].0, rng)?.equal();
        let e2 = pet_test(&public, shares, &out.1, &pairs[i].1, rng)?.equal();
        mix_consistent += usize::from(e1 && e2);
    }

    let mut bits = Vec::with_capacity(mixed.len() * roll.len());
    let mut weights = Vec::with_capacity(mixed.len());
    for (_, e2) in &mixed {
        let mut weight = 0;
        for v_e in roll {
            let equal = pet_test(&public, shares, e2, v_e, rng)?.equal();
            bits.push(u8::from(equal));
            weight += u64::from(equal);
        }
        weights.push(weight);
    }

    let mut counts = vec![0; event.options.len()];
    let mut discarded_after_mix = Vec::new();
    for (position, ((e1, _), &weight)) in mixed.iter().zip(&weights).enumerate() {
        if weight == 0 {
            discarded_after_mix.push(MixDiscard { position, reason: DiscardReason::NoRollMatch });
            continue;
        }
        let plain = meg_decrypt_threshold(&public, shares, e1, rng)?;
        match event.options.iter().position(|o| *o == plain) {
            Some(j) => counts[j] += weight,
            None => discarded_after_mix.push(MixDiscard { position, reason: DiscardReason::InvalidOption }),
        }
    }

    Ok(TallyResult {
        event: event.id,
        counts,
        ballots_on_ledger: ballots.len(),
        discarded_before_mix,
        mixed: mixed.len(),
        mix_consistent,
        roll_size: roll.len(),
        weights,
        discarded_after_mix,
        pet_evaluations: bits.len() + 2 * mixed.len(),
        pet_matrix_digest: hex::encode(trip_core::hash(&bits)),
    })
}

/// Appends the report as a tally artifact signed by `tallier`.
pub fn publish<G: Group>(
    tallier: &SigningKeypair<G>,
    ledger: &Ledger<G>,
    result: &TallyResult,
) -> Result<u64, TallyError> {
    let artifact = TallyArtifact { event: result.event.clone(), report: result.report() };
    Ok(ledger.append(Entry::sign(tallier, EntryBody::TallyArtifact(artifact)))?)
}
