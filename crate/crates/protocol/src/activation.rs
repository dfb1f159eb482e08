//! Credential activation on the voter's own device.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use trip_core::{schnorr, Digest, Group, SigningKeypair};
use trip_ledger::{
    messages, CredentialRegistered, Entry, EntryBody, EnvelopeConsumed, Ledger, LedgerError, Role, StandingEntity,
};

use crate::{
    kiosk::{credential_statement, Credential},
    payload::secret_field,
    CommitPayload, Envelope, ProtocolError, ReceiptBundle, ResponsePayload,
};

/// The activation checks, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ReceiptIntegrity1,
    ReceiptIntegrity2,
    EnvelopeIntegrity,
    VoterIdentity,
    RetrieveElgamalSecret,
    Zkp,
    VoterRegistrationSession,
    FreshReceipt,
    EligibleOfficialAndKiosk,
    KioskSignature,
    OfficialSignature,
    ChallengeExistsAndUnused,
}

impl Check {
    pub const OFFLINE: [Check; 6] = [
        Check::ReceiptIntegrity1,
        Check::ReceiptIntegrity2,
        Check::EnvelopeIntegrity,
        Check::VoterIdentity,
        Check::RetrieveElgamalSecret,
        Check::Zkp,
    ];
    pub const ONLINE: [Check; 6] = [
        Check::VoterRegistrationSession,
        Check::FreshReceipt,
        Check::EligibleOfficialAndKiosk,
        Check::KioskSignature,
        Check::OfficialSignature,
        Check::ChallengeExistsAndUnused,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ReceiptIntegrity1 => "receipt integrity 1",
            Check::ReceiptIntegrity2 => "receipt integrity 2",
            Check::EnvelopeIntegrity => "envelope integrity",
            Check::VoterIdentity => "voter identity",
            Check::RetrieveElgamalSecret => "retrieve elgamal secret",
            Check::Zkp => "zkp",
            Check::VoterRegistrationSession => "voter registration session",
            Check::FreshReceipt => "fresh receipt",
            Check::EligibleOfficialAndKiosk => "eligible official and kiosk",
            Check::KioskSignature => "kiosk signature",
            Check::OfficialSignature => "official signature",
            Check::ChallengeExistsAndUnused => "challenge exists and unused",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Online check skipped because the ledger was not reachable.
    Unavailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationResult<G: Group> {
    pub verdict: Verdict,
    pub checks: Vec<(Check, CheckStatus)>,
    pub failed: Vec<Check>,
    pub unavailable: Vec<Check>,
    /// Set when the activation passed and was committed to the ledger.
    pub credential: Option<Credential<G>>,
    /// Ledger indices written on success.
    pub appended: Vec<u64>,
}

impl<G: Group> ActivationResult<G> {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn status(&self, check: Check) -> Option<CheckStatus> {
        self.checks.iter().find(|(c, _)| *c == check).map(|(_, s)| *s)
    }
}

/// What the device can see of the ledger.
pub enum LedgerView<'a, G: Group> {
    Online(&'a Ledger<G>),
    /// Ledger unreachable; the device knows `A` and the entity registry from
    /// an earlier sync.
    Offline {
        election_key: G::Element,
        entities: &'a [StandingEntity<G>],
    },
}

/// Whether a passing activation is recorded on the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Commit,
    DryRun,
}

struct Recorder {
    checks: Vec<(Check, CheckStatus)>,
}

impl Recorder {
    fn record(&mut self, check: Check, ok: bool) {
        self.checks.push((check, if ok { CheckStatus::Passed } else { CheckStatus::Failed }));
    }
}

/// Runs every offline and online check on `(q1, e, q2)`.
pub fn activate<G: Group, R: RngCore + CryptoRng>(
    v_id: &str,
    q1: &CommitPayload<G>,
    envelope: &Envelope<G>,
    q2: &ResponsePayload<G>,
    view: &LedgerView<'_, G>,
    mode: Mode,
    rng: &mut R,
) -> Result<ActivationResult<G>, ProtocolError> {
    let (election_key, entities) = match view {
        LedgerView::Online(ledger) => {
            (ledger.election_key().ok_or(ProtocolError::NoElectionKey)?.key, ledger.entities())
        }
        LedgerView::Offline { election_key, entities } => (*election_key, entities.to_vec()),
    };
    let mut rec = Recorder { checks: Vec::new() };
    let d = q2.d;
    let v_e = &q1.v_e;
    let digest: Digest = messages::receipt_digest(
        v_id,
        d,
        v_e,
        &secret_field::<G>(q2.secret.as_ref()),
        &q1.commit,
        &envelope.challenge,
        &q2.response,
    );
    let receipt_ok =
        |credential: &G::Element| schnorr::verify(&q2.kiosk, &q2.sig, &messages::receipt::<G>(credential, &digest));
    let zkp_holds = |key: &G::Element| {
        credential_statement(&election_key, v_e, key).verify(&trip_core::zkp::DleqTranscript {
            commit: q1.commit,
            challenge: envelope.challenge_scalar(),
            response: q2.response,
        })
    };
    // standing bundles carry no secret: the entity is the one σ_k3 names.
    // In tiny groups a wrong key can verify by chance, so prefer one the proof also accepts.
    let credential = match q2.secret {
        Some(v) => Some(schnorr::pubkey::<G>(&v)),
        None => {
            let named: Vec<_> = entities.iter().map(|e| e.credential).filter(|key| receipt_ok(key)).collect();
            named.iter().find(|key| zkp_holds(key)).or(named.first()).copied()
        }
    };

    rec.record(
        Check::ReceiptIntegrity1,
        schnorr::verify(&q2.kiosk, &q1.sig, &messages::kiosk_commit(v_id, d, v_e, &q1.commit)),
    );
    rec.record(Check::ReceiptIntegrity2, credential.as_ref().is_some_and(receipt_ok));
    rec.record(
        Check::EnvelopeIntegrity,
        schnorr::verify(&envelope.printer, &envelope.sig, &messages::envelope(&envelope.challenge_hash())),
    );
    rec.record(Check::VoterIdentity, q2.v_id == v_id);
    rec.record(Check::RetrieveElgamalSecret, credential.is_some());
    rec.record(Check::Zkp, credential.as_ref().is_some_and(zkp_holds));

    let LedgerView::Online(ledger) = view else {
        let mut checks = rec.checks;
        checks.extend(Check::ONLINE.iter().map(|&c| (c, CheckStatus::Unavailable)));
        return Ok(finish(checks, None, Vec::new()));
    };

    let session = ledger.latest_registration(v_id);
    let reg = session.as_ref().and_then(|e| e.registration().map(|r| (r, e)));
    rec.record(Check::VoterRegistrationSession, reg.is_some());
    rec.record(Check::FreshReceipt, reg.is_some_and(|(r, _)| r.d == d && r.v_e == *v_e));
    rec.record(
        Check::EligibleOfficialAndKiosk,
        reg.is_some_and(|(r, e)| ledger.has_role(e.author(), Role::Official) && ledger.has_role(&r.kiosk, Role::Kiosk)),
    );
    rec.record(
        Check::KioskSignature,
        reg.is_some_and(|(r, _)| {
            r.kiosk == q2.kiosk && schnorr::verify(&r.kiosk, &r.kiosk_sig, &messages::kiosk_checkout(v_id, r.d, &r.v_e))
        }),
    );
    rec.record(
        Check::OfficialSignature,
        reg.is_some_and(|(r, e)| {
            schnorr::verify(
                e.author(),
                &e.entry.signature,
                &messages::official_checkout(v_id, r.d, &r.v_e, &r.kiosk_sig),
            )
        }),
    );
    let h = envelope.challenge_hash();
    let issued = ledger.envelope(&h).is_some_and(|e| *e.author() == envelope.printer);
    rec.record(Check::ChallengeExistsAndUnused, issued && ledger.consumption(&h).is_none());

    let mut checks = rec.checks;
    let all_passed = checks.iter().all(|(_, s)| *s == CheckStatus::Passed);
    let mut appended = Vec::new();
    let mut stored = None;
    if all_passed && mode == Mode::Commit {
        let public = credential.expect("zkp passed");
        let device = SigningKeypair::<G>::generate(rng);
        let consumed = EntryBody::EnvelopeConsumed(EnvelopeConsumed { challenge: envelope.challenge.clone() });
        match ledger.append(Entry::sign(&device, consumed)) {
            Ok(i) => appended.push(i),
            // lost a race with another activation of the same envelope
            Err(LedgerError::EnvelopeConsumed) => {
                set_status(&mut checks, Check::ChallengeExistsAndUnused, CheckStatus::Failed);
                return Ok(finish(checks, None, appended));
            }
            Err(e) => return Err(e.into()),
        }
        // standing-vote entities are shared, so register each only once
        if ledger.credential_registration(&public).is_none() {
            let body =
                EntryBody::CredentialRegistered(CredentialRegistered { credential: public, receipt_hash: digest });
            appended.push(ledger.append(Entry::new(q2.kiosk, body, q2.sig))?);
        }
        stored = Some(Credential { secret: q2.secret, public });
    }
    Ok(finish(checks, stored, appended))
}

fn set_status(checks: &mut [(Check, CheckStatus)], check: Check, status: CheckStatus) {
    if let Some(entry) = checks.iter_mut().find(|(c, _)| *c == check) {
        entry.1 = status;
    }
}

fn finish<G: Group>(
    checks: Vec<(Check, CheckStatus)>,
    credential: Option<Credential<G>>,
    appended: Vec<u64>,
) -> ActivationResult<G> {
    let failed: Vec<_> = checks.iter().filter(|(_, s)| *s == CheckStatus::Failed).map(|(c, _)| *c).collect();
    let unavailable = checks.iter().filter(|(_, s)| *s == CheckStatus::Unavailable).map(|(c, _)| *c).collect();
    let verdict = if failed.is_empty() { Verdict::Pass } else { Verdict::Fail };
    ActivationResult { verdict, checks, failed, unavailable, credential, appended }
}

/// Activates a folded-open bundle.
pub fn activate_bundle<G: Group, R: RngCore + CryptoRng>(
    v_id: &str,
    bundle: &ReceiptBundle<G>,
    view: &LedgerView<'_, G>,
    mode: Mode,
    rng: &mut R,
) -> Result<ActivationResult<G>, ProtocolError> {
    activate(v_id, &bundle.q1, &bundle.envelope, &bundle.q2, view, mode, rng)
}

/// The voter's trusted device: identity plus activated credentials.
#[derive(Debug, Clone)]
pub struct VoterDevice<G: Group> {
    pub v_id: String,
    pub credentials: Vec<Credential<G>>,
}

impl<G: Group> VoterDevice<G> {
    pub fn new(v_id: impl Into<String>) -> Self {
        Self { v_id: v_id.into(), credentials: Vec::new() }
    }

    pub fn activate<R: RngCore + CryptoRng>(
        &mut self,
        bundle: &ReceiptBundle<G>,
        ledger: &Ledger<G>,
        rng: &mut R,
    ) -> Result<ActivationResult<G>, ProtocolError> {
        let result = activate_bundle(&self.v_id, bundle, &LedgerView::Online(ledger), Mode::Commit, rng)?;
        if let Some(c) = &result.credential {
            self.credentials.push(c.clone());
        }
        Ok(result)
    }
}
