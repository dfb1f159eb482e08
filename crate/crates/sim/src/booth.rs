//! Booth drivers: envelope stacks, honest visits, forged bundles.

use rand::{seq::SliceRandom, Rng};
use rand_chacha::ChaCha20Rng;
use trip_core::{
    elgamal::encrypt, group::random_nonzero_scalar, zkp::DleqTranscript, Ciphertext, Group, SigningKeypair,
};
use trip_ledger::Ledger;
use trip_protocol::{
    activation::activate_bundle,
    kiosk::{sign_checkout, sign_commit, sign_response, RealSecrets},
    officials::{checkin_issue, checkout_process, envelope_print, DEFAULT_NONCE_LEN},
    ActivationResult, BundleKind, BundleState, CheckInTicket, CommitPayload, Credential, Election, Envelope,
    KioskSession, LedgerView, ManualClock, Mode, Payload, ReceiptBundle, SessionEvent, Target,
};

use crate::{config::ActivationOrder, SimError};

/// Coarse visual class of a QR payload: what a voter can compare by eye.
pub fn glyph(bytes: &[u8], buckets: u8) -> u8 {
    trip_core::hash(bytes)[0] % buckets.max(1)
}

/// How the voter picks envelopes and fake commits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picker {
    Uniform,
    /// Coerced voter: real envelope looks like `q1`; fake commits look like
    /// their envelope when the kiosk offers a choice.
    Visual {
        buckets: u8,
    },
}

impl Picker {
    fn real_envelope<G: Group>(self, q1: &CommitPayload<G>, stack: &[Envelope<G>], rng: &mut ChaCha20Rng) -> usize {
        match self {
            Picker::Uniform => rng.gen_range(0..stack.len()),
            Picker::Visual { buckets } => {
                let want = glyph(&q1.to_bytes(), buckets);
                let alike: Vec<_> =
                    (0..stack.len()).filter(|&i| glyph(&stack[i].to_bytes(), buckets) == want).collect();
                alike.choose(rng).copied().unwrap_or_else(|| rng.gen_range(0..stack.len()))
            }
        }
    }

    fn fake_commit<G: Group>(self, envelope: &Envelope<G>, shown: &[CommitPayload<G>], rng: &mut ChaCha20Rng) -> usize {
        match self {
            Picker::Uniform => rng.gen_range(0..shown.len()),
            Picker::Visual { buckets } => {
                let want = glyph(&envelope.to_bytes(), buckets);
                let alike: Vec<_> =
                    (0..shown.len()).filter(|&i| glyph(&shown[i].to_bytes(), buckets) == want).collect();
                alike.choose(rng).copied().unwrap_or_else(|| rng.gen_range(0..shown.len()))
            }
        }
    }
}

/// Prints and publishes `n` envelopes from randomly chosen printers.
pub fn envelope_stack<G: Group>(
    election: &Election<G>,
    n: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<Envelope<G>>, SimError> {
    (0..n)
        .map(|_| {
            let printer = election.printers.choose(rng).expect("at least one printer");
            Ok(envelope_print(printer, DEFAULT_NONCE_LEN, &election.ledger, rng)?.0)
        })
        .collect()
}

pub fn official<'a, G: Group>(election: &'a Election<G>, rng: &mut ChaCha20Rng) -> &'a SigningKeypair<G> {
    election.officials.choose(rng).expect("at least one official")
}

/// A booth visit before check-out.
pub struct BoothVisit<G: Group> {
    pub ticket: CheckInTicket<G>,
    pub real: ReceiptBundle<G>,
    pub fakes: Vec<ReceiptBundle<G>>,
    pub log: Vec<SessionEvent>,
    pub secrets: RealSecrets<G>,
}

impl<G: Group> BoothVisit<G> {
    pub fn bundles(&self) -> impl Iterator<Item = &ReceiptBundle<G>> {
        std::iter::once(&self.real).chain(&self.fakes)
    }
}

/// Honest kiosk, real credential plus `fakes`; envelopes are taken out of
/// `stack` as the voter picks them.
#[allow(clippy::too_many_arguments)]
pub fn honest_visit<G: Group>(
    election: &Election<G>,
    v_id: &str,
    fakes: usize,
    stack: &mut Vec<Envelope<G>>,
    picker: Picker,
    fake_candidates: usize,
    clock: &ManualClock,
    rng: &mut ChaCha20Rng,
) -> Result<BoothVisit<G>, SimError> {
    let ticket = checkin_issue(official(election, rng), v_id, clock, &election.ledger)?;
    let kiosk = rng.gen_range(0..election.kiosks.len());
    let mut session = KioskSession::new(election.kiosk_config(kiosk)?);
    session.checkin_verify(&ticket, clock)?;
    let q1 = session.realcred_begin(rng)?;
    let envelope = stack.swap_remove(picker.real_envelope(&q1, stack, rng));
    let real = session.realcred_complete(&envelope)?;
    let mut printed = Vec::with_capacity(fakes);
    for _ in 0..fakes {
        let envelope = stack.swap_remove(rng.gen_range(0..stack.len()));
        let shown = session.fake_candidates(&envelope, Target::Credential, fake_candidates, rng)?;
        printed.push(session.select_fake(picker.fake_commit(&envelope, &shown, rng))?);
    }
    session.finish()?;
    let secrets = session.real_secrets().expect("real path ran").clone();
    Ok(BoothVisit { ticket, real, fakes: printed, log: session.log().to_vec(), secrets })
}

/// Posts the registration session for `t_ot` through a random official.
pub fn check_out<G: Group>(
    election: &Election<G>,
    bundle: &ReceiptBundle<G>,
    rng: &mut ChaCha20Rng,
) -> Result<u64, SimError> {
    Ok(checkout_process(official(election, rng), &bundle.t_ot, &election.ledger)?)
}

/// The voter's own process check: the real commit is printed before any
/// envelope is scanned.
pub fn commit_before_scan(log: &[SessionEvent]) -> bool {
    let commit = log.iter().position(|e| *e == SessionEvent::CommitPrinted);
    let scan = log.iter().position(|e| *e == SessionEvent::EnvelopeScanned);
    matches!((commit, scan), (Some(c), Some(s)) if c < s)
}

/// Activates every bundle on the voter's device, in `order`. Results come
/// back in print order.
pub fn activate_all<G: Group>(
    v_id: &str,
    bundles: &[&ReceiptBundle<G>],
    ledger: &Ledger<G>,
    order: ActivationOrder,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<ActivationResult<G>>, SimError> {
    let mut sequence: Vec<usize> = (0..bundles.len()).collect();
    if order == ActivationOrder::Shuffled {
        sequence.shuffle(rng);
    }
    let mut results: Vec<Option<ActivationResult<G>>> = (0..bundles.len()).map(|_| None).collect();
    for i in sequence {
        results[i] = Some(activate_bundle(v_id, bundles[i], &LedgerView::Online(ledger), Mode::Commit, rng)?);
    }
    Ok(results.into_iter().map(|r| r.expect("every bundle activated")).collect())
}

pub fn fresh_credential<G: Group>(rng: &mut ChaCha20Rng) -> Credential<G> {
    let key = SigningKeypair::<G>::generate(rng);
    Credential { secret: Some(*key.secret()), public: *key.public() }
}

/// A corrupted kiosk holding a valid kiosk key. Every bundle it prints
/// claims `V_e`, which encrypts a key of the adversary's choosing.
pub struct RogueKiosk<'a, G: Group> {
    pub key: &'a SigningKeypair<G>,
    pub election_key: G::Element,
    pub v_id: String,
    pub d: u64,
    pub v_e: Ciphertext<G>,
    pub planted: Credential<G>,
}

impl<'a, G: Group> RogueKiosk<'a, G> {
    pub fn new(election: &'a Election<G>, ticket: &CheckInTicket<G>, rng: &mut ChaCha20Rng) -> Result<Self, SimError> {
        let election_key = election.key_material.public.key;
        let planted = fresh_credential::<G>(rng);
        let x = random_nonzero_scalar::<G, _>(rng);
        let v_e = encrypt::<G, _>(&election_key, &planted.public, Some(x), rng)?;
        Ok(Self { key: &election.kiosks[0], election_key, v_id: ticket.v_id.clone(), d: ticket.d, v_e, planted })
    }

    /// Simulated proof that `V_e` encrypts `handed`, valid for `challenge` only.
    pub fn simulate(
        &self,
        handed: &Credential<G>,
        challenge: &Envelope<G>,
        rng: &mut ChaCha20Rng,
    ) -> DleqTranscript<G, 3> {
        trip_protocol::kiosk::credential_statement(&self.election_key, &self.v_e, &handed.public)
            .simulate(challenge.challenge_scalar(), rng)
    }

    pub fn commit(&self, transcript: &DleqTranscript<G, 3>) -> CommitPayload<G> {
        sign_commit(self.key, &self.v_id, self.d, &self.v_e, transcript.commit)
    }

    /// Finishes a bundle for `handed` with the envelope actually scanned.
    pub fn bundle(
        &self,
        q1: CommitPayload<G>,
        handed: &Credential<G>,
        envelope: &Envelope<G>,
        response: G::Scalar,
        kind: BundleKind,
    ) -> ReceiptBundle<G> {
        let t_ot = sign_checkout(self.key, &self.v_id, self.d, &self.v_e);
        let q2 =
            sign_response(self.key, &self.v_id, self.d, &self.v_e, handed, &q1.commit, &envelope.challenge, response);
        ReceiptBundle { q1, t_ot, q2, envelope: envelope.clone(), kind, marked: false, state: BundleState::Transport }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use trip_core::Ristretto;
    use trip_protocol::{setup_election, ElectionConfig};

    use super::*;

    #[test]
    fn honest_visit_draws_from_the_stack() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let election =
            setup_election::<Ristretto, _>(&ElectionConfig::small(2), Ledger::in_memory(), &mut rng).unwrap();
        let clock = ManualClock::new(1_000);
        let mut stack = envelope_stack(&election, 5, &mut rng).unwrap();
        let visit = honest_visit(&election, "v0", 2, &mut stack, Picker::Uniform, 1, &clock, &mut rng).unwrap();
        assert_eq!(stack.len(), 2);
        assert!(commit_before_scan(&visit.log));
        check_out(&election, &visit.real, &mut rng).unwrap();
        let bundles: Vec<_> = visit.bundles().collect();
        let results = activate_all("v0", &bundles, &election.ledger, ActivationOrder::Shuffled, &mut rng).unwrap();
        assert!(results.iter().all(|r| r.passed()));
    }

    #[test]
    fn process_order_check() {
        use SessionEvent::*;
        assert!(commit_before_scan(&[TicketAccepted, CommitPrinted, EnvelopeScanned]));
        assert!(!commit_before_scan(&[TicketAccepted, EnvelopeScanned, CommitPrinted]));
        assert!(!commit_before_scan(&[TicketAccepted, EnvelopeScanned]));
    }

    #[test]
    fn glyph_stays_in_range() {
        for b in 0..=255u8 {
            assert!(glyph(&[b], 4) < 4);
        }
        assert_eq!(glyph(b"x", 0), 0);
    }
}
