//! The booth: one [`KioskSession`] per voter visit.
//!
//! Real path: the kiosk prints `q1` (encrypted credential and ZKP commit),
//! then the voter scans an envelope whose nonce is the challenge, then the
//! kiosk prints the check-out ticket and `q2` carrying the response. A fake
//! credential reuses the real `V_e` and simulates the proof for a fresh key,
//! so it is printed in one go once the envelope is known.

use std::collections::HashSet;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use trip_core::{
    elgamal::encrypt,
    group::{div, random_nonzero_scalar},
    schnorr,
    zkp::{DleqStatement, ProverState},
    Ciphertext, Digest, Group, SigningKeypair,
};
use trip_ledger::{messages, Ledger, Role, StandingEntity};

use crate::{
    officials::{verify_ticket, DEFAULT_T_DELTA},
    payload::secret_field,
    BundleKind, BundleState, CheckInTicket, CheckoutTicket, Clock, CommitPayload, Envelope, ProtocolError,
    ReceiptBundle, ResponsePayload,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    AwaitingTicket,
    /// Ticket accepted; the real (or standing) path may begin.
    CheckedIn,
    /// `q1` printed; waiting for the challenge envelope.
    AwaitingEnvelope,
    /// Real bundle done; any number of fakes may follow.
    FakeLoop,
    Done,
}

/// Ordered record of what the session did, for transcript-order checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "event")]
pub enum SessionEvent {
    TicketAccepted,
    CandidatesShown { count: usize },
    CommitPrinted,
    EnvelopeScanned,
    ReceiptPrinted { kind: BundleKind },
    Finished,
}

#[derive(Debug, Clone)]
pub struct KioskConfig<G: Group> {
    pub kiosk: SigningKeypair<G>,
    pub election_key: G::Element,
    pub officials: Vec<G::Element>,
    /// Accepted envelope printers; empty accepts any signer.
    pub printers: Vec<G::Element>,
    pub entities: Vec<StandingEntity<G>>,
    pub t_delta: u64,
}

impl<G: Group> KioskConfig<G> {
    /// Reads officials, printers, the election key and the standing-vote
    /// registry from the ledger.
    pub fn from_ledger(kiosk: SigningKeypair<G>, ledger: &Ledger<G>) -> Result<Self, ProtocolError> {
        let election = ledger.election_key().ok_or(ProtocolError::NoElectionKey)?;
        Ok(Self {
            kiosk,
            election_key: election.key,
            officials: ledger.keys_with_role(Role::Official),
            printers: ledger.keys_with_role(Role::Printer),
            entities: ledger.entities(),
            t_delta: DEFAULT_T_DELTA,
        })
    }
}

/// What the encrypted credential stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// A fresh key pair made in the booth.
    Credential,
    /// The published key of a standing-vote entity.
    Entity(usize),
}

/// A credential as the voter's device stores it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential<G: Group> {
    pub secret: Option<G::Scalar>,
    pub public: G::Element,
}

/// The cryptographic values behind a real bundle. Kiosk-internal; exposed
/// so tests and simulations can check what the kiosk did.
#[derive(Debug, Clone)]
pub struct RealSecrets<G: Group> {
    pub credential: Credential<G>,
    pub x: G::Scalar,
    pub v_e: Ciphertext<G>,
}

struct PendingReal<G: Group> {
    kind: BundleKind,
    secrets: RealSecrets<G>,
    candidates: Vec<(CommitPayload<G>, ProverState<G, 3>)>,
}

struct RealDone<G: Group> {
    v_e: Ciphertext<G>,
    t_ot: CheckoutTicket<G>,
}

struct PendingFake<G: Group> {
    envelope: Envelope<G>,
    credential: Credential<G>,
    candidates: Vec<(CommitPayload<G>, G::Scalar)>,
}

pub struct KioskSession<G: Group> {
    config: KioskConfig<G>,
    voter: Option<(String, u64)>,
    phase: Phase,
    log: Vec<SessionEvent>,
    real: Option<PendingReal<G>>,
    done: Option<RealDone<G>>,
    fake: Option<PendingFake<G>>,
    used: HashSet<Digest>,
}

/// Signs `q1`.
pub fn sign_commit<G: Group>(
    kiosk: &SigningKeypair<G>,
    v_id: &str,
    d: u64,
    v_e: &Ciphertext<G>,
    commit: [G::Element; 3],
) -> CommitPayload<G> {
    CommitPayload { v_e: *v_e, commit, sig: kiosk.sign(&messages::kiosk_commit(v_id, d, v_e, &commit)) }
}

/// Signs `t_ot`.
pub fn sign_checkout<G: Group>(
    kiosk: &SigningKeypair<G>,
    v_id: &str,
    d: u64,
    v_e: &Ciphertext<G>,
) -> CheckoutTicket<G> {
    CheckoutTicket {
        v_id: v_id.to_owned(),
        d,
        v_e: *v_e,
        kiosk: *kiosk.public(),
        sig: kiosk.sign(&messages::kiosk_checkout(v_id, d, v_e)),
    }
}

/// Signs `q2`, binding `V` and the receipt digest.
#[allow(clippy::too_many_arguments)]
pub fn sign_response<G: Group>(
    kiosk: &SigningKeypair<G>,
    v_id: &str,
    d: u64,
    v_e: &Ciphertext<G>,
    credential: &Credential<G>,
    commit: &[G::Element; 3],
    challenge: &[u8],
    response: G::Scalar,
) -> ResponsePayload<G> {
    let digest = messages::receipt_digest(
        v_id,
        d,
        v_e,
        &secret_field::<G>(credential.secret.as_ref()),
        commit,
        challenge,
        &response,
    );
    ResponsePayload {
        v_id: v_id.to_owned(),
        d,
        secret: credential.secret,
        response,
        kiosk: *kiosk.public(),
        sig: kiosk.sign(&messages::receipt::<G>(&credential.public, &digest)),
    }
}

/// Statement `C1 = g1^x ∧ C2 = g2^x ∧ C3/V = A^x` for a claimed `V`.
pub fn credential_statement<G: Group>(
    key: &G::Element,
    v_e: &Ciphertext<G>,
    credential: &G::Element,
) -> DleqStatement<G, 3> {
    DleqStatement::credential(key, &v_e.c1, &v_e.c2, &div::<G>(&v_e.c3, credential))
}

impl<G: Group> KioskSession<G> {
    pub fn new(config: KioskConfig<G>) -> Self {
        Self {
            config,
            voter: None,
            phase: Phase::AwaitingTicket,
            log: Vec::new(),
            real: None,
            done: None,
            fake: None,
            used: HashSet::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn log(&self) -> &[SessionEvent] {
        &self.log
    }

    pub fn kiosk_key(&self) -> &G::Element {
        self.config.kiosk.public()
    }

    pub fn voter(&self) -> Option<&str> {
        self.voter.as_ref().map(|(v, _)| v.as_str())
    }

    /// Secrets of the real bundle, once its commit exists.
    pub fn real_secrets(&self) -> Option<&RealSecrets<G>> {
        self.real.as_ref().map(|r| &r.secrets)
    }

    fn expect(&self, phase: Phase) -> Result<(), ProtocolError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(ProtocolError::WrongPhase { found: self.phase })
        }
    }

    fn checked_in(&self) -> (&str, u64) {
        let (v, d) = self.voter.as_ref().expect("phase implies a checked-in voter");
        (v, *d)
    }

    pub fn checkin_verify(&mut self, ticket: &CheckInTicket<G>, clock: &dyn Clock) -> Result<(), ProtocolError> {
        self.expect(Phase::AwaitingTicket)?;
        verify_ticket(ticket, &self.config.officials, self.config.t_delta, clock.now())?;
        self.voter = Some((ticket.v_id.clone(), ticket.d));
        self.phase = Phase::CheckedIn;
        self.log.push(SessionEvent::TicketAccepted);
        Ok(())
    }

    fn target_credential<R: RngCore + CryptoRng>(
        &self,
        target: Target,
        rng: &mut R,
    ) -> Result<Credential<G>, ProtocolError> {
        match target {
            Target::Credential => {
                let key = SigningKeypair::<G>::generate(rng);
                Ok(Credential { secret: Some(*key.secret()), public: *key.public() })
            }
            Target::Entity(i) => {
                let entity = self.config.entities.get(i).ok_or(ProtocolError::UnknownEntity(i))?;
                Ok(Credential { secret: None, public: entity.credential })
            }
        }
    }

    fn check_envelope(&self, envelope: &Envelope<G>) -> Result<(), ProtocolError> {
        let printer_ok = self.config.printers.is_empty() || self.config.printers.contains(&envelope.printer);
        let msg = messages::envelope(&envelope.challenge_hash());
        if !printer_ok || !schnorr::verify(&envelope.printer, &envelope.sig, &msg) {
            return Err(ProtocolError::InvalidEnvelope);
        }
        if self.used.contains(&envelope.challenge_hash()) {
            return Err(ProtocolError::EnvelopeReuse);
        }
        Ok(())
    }

    /// Starts the real path: prints `q1`.
    pub fn realcred_begin<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Result<CommitPayload<G>, ProtocolError> {
        self.begin(Target::Credential, 1, rng).map(|mut c| c.remove(0))
    }

    /// Starts a standing vote for registry entry `entity` in place of the
    /// real credential.
    pub fn standing_begin<R: RngCore + CryptoRng>(
        &mut self,
        entity: usize,
        rng: &mut R,
    ) -> Result<CommitPayload<G>, ProtocolError> {
        self.begin(Target::Entity(entity), 1, rng).map(|mut c| c.remove(0))
    }

    /// Starts the real path with `count` candidate commits for the same
    /// `V_e`. With one candidate it is printed at once; otherwise the voter
    /// picks one with [`KioskSession::select_commit`].
    pub fn begin<R: RngCore + CryptoRng>(
        &mut self,
        target: Target,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<CommitPayload<G>>, ProtocolError> {
        self.expect(Phase::CheckedIn)?;
        if self.real.is_some() {
            return Err(ProtocolError::WrongPhase { found: self.phase });
        }
        let count = count.max(1);
        let credential = self.target_credential(target, rng)?;
        let key = self.config.election_key;
        let x = random_nonzero_scalar::<G, R>(rng);
        let v_e = encrypt::<G, R>(&key, &credential.public, Some(x), rng)?;
        Ok(self.begin_with(target, credential, x, v_e, count, |_| random_nonzero_scalar::<G, R>(rng)))
    }

    /// Real path with caller-chosen `v`, `x` and commit nonce `y`, for
    /// worked examples and fixture replay.
    pub fn realcred_begin_with_secrets(
        &mut self,
        v: G::Scalar,
        x: G::Scalar,
        y: G::Scalar,
    ) -> Result<CommitPayload<G>, ProtocolError> {
        self.expect(Phase::CheckedIn)?;
        if self.real.is_some() {
            return Err(ProtocolError::WrongPhase { found: self.phase });
        }
        if x == trip_core::group::zero::<G>() {
            return Err(trip_core::CryptoError::ZeroRandomness.into());
        }
        let key = SigningKeypair::<G>::from_secret(v);
        let credential = Credential { secret: Some(v), public: *key.public() };
        let v_e = Ciphertext::new(
            G::pow(&G::g1(), &x),
            G::pow(&G::g2(), &x),
            G::op(&G::pow(&self.config.election_key, &x), &credential.public),
        );
        let mut commits = self.begin_with(Target::Credential, credential, x, v_e, 1, |_| y);
        Ok(commits.remove(0))
    }

    fn begin_with(
        &mut self,
        target: Target,
        credential: Credential<G>,
        x: G::Scalar,
        v_e: Ciphertext<G>,
        count: usize,
        mut nonce: impl FnMut(usize) -> G::Scalar,
    ) -> Vec<CommitPayload<G>> {
        let (v_id, d) = self.checked_in();
        let (v_id, d) = (v_id.to_owned(), d);
        let bases = [G::g1(), G::g2(), self.config.election_key];
        let candidates: Vec<_> = (0..count)
            .map(|i| {
                let state = ProverState::commit_with_nonce(&bases, x, nonce(i));
                let q1 = sign_commit(&self.config.kiosk, &v_id, d, &v_e, *state.commitment());
                (q1, state)
            })
            .collect();
        let shown: Vec<_> = candidates.iter().map(|(q1, _)| q1.clone()).collect();
        let kind = match target {
            Target::Credential => BundleKind::Real,
            Target::Entity(_) => BundleKind::Standing,
        };
        self.real = Some(PendingReal { kind, secrets: RealSecrets { credential, x, v_e }, candidates });
        if count == 1 {
            self.select_commit(0).expect("single candidate");
        } else {
            self.log.push(SessionEvent::CandidatesShown { count });
        }
        shown
    }

    /// Prints the chosen candidate commit and drops the others.
    pub fn select_commit(&mut self, index: usize) -> Result<CommitPayload<G>, ProtocolError> {
        self.expect(Phase::CheckedIn)?;
        let real = self.real.as_mut().ok_or(ProtocolError::WrongPhase { found: Phase::CheckedIn })?;
        if index >= real.candidates.len() {
            return Err(ProtocolError::UnknownCandidate(index));
        }
        let chosen = real.candidates.swap_remove(index);
        real.candidates = vec![chosen];
        self.phase = Phase::AwaitingEnvelope;
        self.log.push(SessionEvent::CommitPrinted);
        Ok(real.candidates[0].0.clone())
    }

    /// Finishes the real (or standing) path with the voter's envelope.
    pub fn realcred_complete(&mut self, envelope: &Envelope<G>) -> Result<ReceiptBundle<G>, ProtocolError> {
        self.expect(Phase::AwaitingEnvelope)?;
        self.check_envelope(envelope)?;
        self.used.insert(envelope.challenge_hash());
        self.log.push(SessionEvent::EnvelopeScanned);
        let (v_id, d) = self.checked_in();
        let (v_id, d) = (v_id.to_owned(), d);
        let real = self.real.as_mut().expect("awaiting envelope implies a commit");
        let (q1, state) = &mut real.candidates[0];
        let response = state.respond(envelope.challenge_scalar())?;
        let commit = *state.commitment();
        let secrets = &real.secrets;
        let t_ot = sign_checkout(&self.config.kiosk, &v_id, d, &secrets.v_e);
        let q2 = sign_response(
            &self.config.kiosk,
            &v_id,
            d,
            &secrets.v_e,
            &secrets.credential,
            &commit,
            &envelope.challenge,
            response,
        );
        let bundle = ReceiptBundle {
            q1: q1.clone(),
            t_ot: t_ot.clone(),
            q2,
            envelope: envelope.clone(),
            kind: real.kind,
            marked: false,
            state: BundleState::Transport,
        };
        self.done = Some(RealDone { v_e: secrets.v_e, t_ot });
        self.phase = Phase::FakeLoop;
        self.log.push(SessionEvent::ReceiptPrinted { kind: real.kind });
        Ok(bundle)
    }

    /// Prints a fake credential bundle for `envelope`.
    pub fn fakecred_run<R: RngCore + CryptoRng>(
        &mut self,
        envelope: &Envelope<G>,
        rng: &mut R,
    ) -> Result<ReceiptBundle<G>, ProtocolError> {
        self.fake_candidates(envelope, Target::Credential, 1, rng)?;
        self.select_fake(0)
    }

    /// Fake standing vote: same shape as a real standing-vote bundle.
    pub fn fake_standing_run<R: RngCore + CryptoRng>(
        &mut self,
        envelope: &Envelope<G>,
        entity: usize,
        rng: &mut R,
    ) -> Result<ReceiptBundle<G>, ProtocolError> {
        self.fake_candidates(envelope, Target::Entity(entity), 1, rng)?;
        self.select_fake(0)
    }

    /// Simulates `count` candidate transcripts for one fake credential; the
    /// voter picks which `q1` gets printed with [`KioskSession::select_fake`].
    pub fn fake_candidates<R: RngCore + CryptoRng>(
        &mut self,
        envelope: &Envelope<G>,
        target: Target,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<CommitPayload<G>>, ProtocolError> {
        match self.phase {
            Phase::FakeLoop => {}
            Phase::CheckedIn | Phase::AwaitingEnvelope => return Err(ProtocolError::NoRealCredential),
            found => return Err(ProtocolError::WrongPhase { found }),
        }
        self.check_envelope(envelope)?;
        let credential = self.target_credential(target, rng)?;
        self.used.insert(envelope.challenge_hash());
        self.log.push(SessionEvent::EnvelopeScanned);
        let (v_id, d) = self.checked_in();
        let (v_id, d) = (v_id.to_owned(), d);
        let v_e = self.done.as_ref().expect("fake loop implies a real bundle").v_e;
        let statement = credential_statement(&self.config.election_key, &v_e, &credential.public);
        let c = envelope.challenge_scalar();
        let candidates: Vec<_> = (0..count.max(1))
            .map(|_| {
                let transcript = statement.simulate(c, rng);
                let q1 = sign_commit(&self.config.kiosk, &v_id, d, &v_e, transcript.commit);
                (q1, transcript.response)
            })
            .collect();
        let shown = candidates.iter().map(|(q1, _)| q1.clone()).collect();
        if count > 1 {
            self.log.push(SessionEvent::CandidatesShown { count });
        }
        self.fake = Some(PendingFake { envelope: envelope.clone(), credential, candidates });
        Ok(shown)
    }

    pub fn select_fake(&mut self, index: usize) -> Result<ReceiptBundle<G>, ProtocolError> {
        self.expect(Phase::FakeLoop)?;
        let pending = self.fake.take().ok_or(ProtocolError::UnknownCandidate(index))?;
        let Some((q1, response)) = pending.candidates.get(index).cloned() else {
            self.fake = Some(pending);
            return Err(ProtocolError::UnknownCandidate(index));
        };
        let (v_id, d) = self.checked_in();
        let done = self.done.as_ref().expect("fake loop implies a real bundle");
        let q2 = sign_response(
            &self.config.kiosk,
            v_id,
            d,
            &done.v_e,
            &pending.credential,
            &q1.commit,
            &pending.envelope.challenge,
            response,
        );
        let kind = BundleKind::Fake;
        self.log.push(SessionEvent::ReceiptPrinted { kind });
        Ok(ReceiptBundle {
            q1,
            t_ot: done.t_ot.clone(),
            q2,
            envelope: pending.envelope,
            kind,
            marked: false,
            state: BundleState::Transport,
        })
    }

    /// The voter leaves the booth.
    pub fn finish(&mut self) -> Result<(), ProtocolError> {
        self.expect(Phase::FakeLoop)?;
        self.fake = None;
        self.phase = Phase::Done;
        self.log.push(SessionEvent::Finished);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use trip_core::TestGroup;

    use super::*;
    use crate::{
        officials::{checkin_issue, envelope_make},
        setup::{setup_election, Election, ElectionConfig},
        ManualClock, Payload,
    };

    type T = TestGroup;

    fn el(v: u8) -> <T as Group>::Element {
        T::decode_element(&[v]).unwrap()
    }

    fn checked_in(rng: &mut ChaCha20Rng) -> (Election<T>, KioskSession<T>, ManualClock) {
        let mut config = ElectionConfig::small(2);
        config.entities = vec!["Civic League".into()];
        let election = setup_election(&config, Ledger::in_memory(), rng).unwrap();
        let clock = ManualClock::new(1000);
        let ticket = checkin_issue(&election.officials[0], "v0", &clock, &election.ledger).unwrap();
        let mut session = KioskSession::new(election.kiosk_config(0).unwrap());
        session.checkin_verify(&ticket, &clock).unwrap();
        (election, session, clock)
    }

    fn envelope_with(election: &Election<T>, challenge: &[u8]) -> Envelope<T> {
        let printer = &election.printers[0];
        let sig = printer.sign(&messages::envelope(&trip_core::hash(challenge)));
        Envelope { printer: *printer.public(), challenge: challenge.to_vec(), sig }
    }

    #[test]
    fn worked_example_embeds_r_9() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (election, mut session, _) = checked_in(&mut rng);
        session.config.election_key = el(4);
        let v = T::scalar(7);
        let q1 = session.realcred_begin_with_secrets(v, T::scalar(5), T::scalar(2)).unwrap();
        // oracle in plain integers mod 23 / mod 11
        let pow = |b: u64, e: u64| (0..e).fold(1u64, |acc, _| acc * b % 23);
        let big_v = pow(2, 7);
        assert_eq!(q1.commit, [el(pow(2, 2) as u8), el(pow(3, 2) as u8), el(pow(4, 2) as u8)]);
        assert_eq!(q1.v_e, Ciphertext::new(el(9), el(13), el((pow(4, 5) * big_v % 23) as u8)));
        let bundle = session.realcred_complete(&envelope_with(&election, &[3])).unwrap();
        let r = (2i64 - 3 * 5).rem_euclid(11) as u64;
        assert_eq!(r, 9);
        assert_eq!(bundle.q2.response, T::scalar(r));
        assert_eq!(bundle.q2.secret, Some(v));
    }

    #[test]
    fn commit_is_printed_before_the_envelope_is_scanned() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (election, mut session, _) = checked_in(&mut rng);
        let early = envelope_make(&election.printers[0], 16, &mut rng);
        assert!(matches!(
            session.realcred_complete(&early),
            Err(ProtocolError::WrongPhase { found: Phase::CheckedIn })
        ));
        session.realcred_begin(&mut rng).unwrap();
        assert!(matches!(session.realcred_begin(&mut rng), Err(ProtocolError::WrongPhase { .. })));
        session.realcred_complete(&early).unwrap();
        let fake = envelope_make(&election.printers[0], 16, &mut rng);
        session.fakecred_run(&fake, &mut rng).unwrap();
        session.finish().unwrap();
        assert_eq!(
            session.log(),
            [
                SessionEvent::TicketAccepted,
                SessionEvent::CommitPrinted,
                SessionEvent::EnvelopeScanned,
                SessionEvent::ReceiptPrinted { kind: BundleKind::Real },
                SessionEvent::EnvelopeScanned,
                SessionEvent::ReceiptPrinted { kind: BundleKind::Fake },
                SessionEvent::Finished,
            ]
        );
    }

    #[test]
    fn envelopes_are_checked_and_single_use() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (election, mut session, _) = checked_in(&mut rng);
        let envelope = envelope_make(&election.printers[0], 16, &mut rng);
        assert!(matches!(session.fakecred_run(&envelope, &mut rng), Err(ProtocolError::NoRealCredential)));
        session.realcred_begin(&mut rng).unwrap();
        let mut forged = envelope.clone();
        forged.challenge[0] ^= 1;
        assert!(matches!(session.realcred_complete(&forged), Err(ProtocolError::InvalidEnvelope)));
        let stranger = envelope_make(&SigningKeypair::<T>::generate(&mut rng), 16, &mut rng);
        assert!(matches!(session.realcred_complete(&stranger), Err(ProtocolError::InvalidEnvelope)));
        session.realcred_complete(&envelope).unwrap();
        assert!(matches!(session.fakecred_run(&envelope, &mut rng), Err(ProtocolError::EnvelopeReuse)));
    }

    #[test]
    fn fakes_share_the_checkout_ticket_and_differ_in_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (election, mut session, _) = checked_in(&mut rng);
        session.realcred_begin(&mut rng).unwrap();
        let real = session.realcred_complete(&envelope_make(&election.printers[0], 16, &mut rng)).unwrap();
        let fakes: Vec<_> = (0..3)
            .map(|_| session.fakecred_run(&envelope_make(&election.printers[0], 16, &mut rng), &mut rng).unwrap())
            .collect();
        for fake in &fakes {
            assert_eq!(fake.t_ot.to_bytes(), real.t_ot.to_bytes());
            assert_eq!(fake.q1.v_e, real.q1.v_e);
            assert_eq!(fake.payload_bytes().len(), real.payload_bytes().len());
        }
        let keys: HashSet<_> = fakes.iter().map(|f| f.q2.secret.map(|s| T::encode_scalar(&s))).collect();
        assert_eq!(keys.len(), 3);
    }

    #[test]
    fn advanced_option_prints_the_chosen_candidate() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (election, mut session, _) = checked_in(&mut rng);
        let shown = session.begin(Target::Credential, 3, &mut rng).unwrap();
        assert_eq!(shown.len(), 3);
        assert_eq!(session.phase(), Phase::CheckedIn);
        assert!(matches!(session.select_commit(3), Err(ProtocolError::UnknownCandidate(3))));
        assert_eq!(session.select_commit(1).unwrap(), shown[1]);
        let bundle = session.realcred_complete(&envelope_make(&election.printers[0], 16, &mut rng)).unwrap();
        assert_eq!(bundle.q1, shown[1]);
        let pending = session.fake_candidates(
            &envelope_make(&election.printers[0], 16, &mut rng),
            Target::Credential,
            2,
            &mut rng,
        );
        let fake = session.select_fake(pending.unwrap().len() - 1).unwrap();
        assert_eq!(fake.kind, BundleKind::Fake);
    }

    #[test]
    fn standing_vote_omits_the_secret() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (election, mut session, _) = checked_in(&mut rng);
        assert!(matches!(session.standing_begin(5, &mut rng), Err(ProtocolError::UnknownEntity(5))));
        session.standing_begin(0, &mut rng).unwrap();
        let real = session.realcred_complete(&envelope_make(&election.printers[0], 16, &mut rng)).unwrap();
        let fake = session.fake_standing_run(&envelope_make(&election.printers[0], 16, &mut rng), 0, &mut rng).unwrap();
        assert_eq!(real.kind, BundleKind::Standing);
        assert_eq!(real.q2.secret, None);
        assert_eq!(fake.q2.secret, None);
        assert_eq!(real.q2.to_bytes().len(), fake.q2.to_bytes().len());
    }

    #[test]
    fn stale_ticket_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let election = setup_election::<T, _>(&ElectionConfig::small(1), Ledger::in_memory(), &mut rng).unwrap();
        let clock = ManualClock::new(50);
        let ticket = checkin_issue(&election.officials[0], "v0", &clock, &election.ledger).unwrap();
        clock.advance(DEFAULT_T_DELTA + 1);
        let mut session = KioskSession::new(election.kiosk_config(0).unwrap());
        assert!(matches!(session.checkin_verify(&ticket, &clock), Err(ProtocolError::StaleTicket)));
        assert_eq!(session.phase(), Phase::AwaitingTicket);
    }
}
