//! Typed ledger entries and their canonical encoding.

use std::fmt;

use serde::{Deserialize, Serialize};
use trip_core::{
    codec::{Reader, Writer},
    zkp::NizkProof,
    Ciphertext, CryptoError, Digest, ElectionPublicKey, Group, GroupId, Signature, SigningKeypair,
};

use crate::messages;

const ENTRY_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    KeyBinding,
    EnvelopeIssued,
    RegistrationSession,
    CredentialRegistered,
    EnvelopeConsumed,
    Ballot,
    VotingEvent,
    TallyArtifact,
}

impl EntryKind {
    pub const ALL: [EntryKind; 8] = [
        EntryKind::KeyBinding,
        EntryKind::EnvelopeIssued,
        EntryKind::RegistrationSession,
        EntryKind::CredentialRegistered,
        EntryKind::EnvelopeConsumed,
        EntryKind::Ballot,
        EntryKind::VotingEvent,
        EntryKind::TallyArtifact,
    ];

    pub fn tag(self) -> u8 {
        match self {
            EntryKind::KeyBinding => 1,
            EntryKind::EnvelopeIssued => 2,
            EntryKind::RegistrationSession => 3,
            EntryKind::CredentialRegistered => 4,
            EntryKind::EnvelopeConsumed => 5,
            EntryKind::Ballot => 6,
            EntryKind::VotingEvent => 7,
            EntryKind::TallyArtifact => 8,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::KeyBinding => "key-binding",
            EntryKind::EnvelopeIssued => "envelope-issued",
            EntryKind::RegistrationSession => "registration-session",
            EntryKind::CredentialRegistered => "credential-registered",
            EntryKind::EnvelopeConsumed => "envelope-consumed",
            EntryKind::Ballot => "ballot",
            EntryKind::VotingEvent => "voting-event",
            EntryKind::TallyArtifact => "tally-artifact",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Roles a key can hold. Every key implicitly holds [`Role::Voter`]: voter
/// devices and credentials are never bound in advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Official,
    Kiosk,
    Printer,
    Tallier,
    Voter,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Official, Role::Kiosk, Role::Printer, Role::Tallier, Role::Voter];

    pub fn tag(self) -> u8 {
        match self {
            Role::Official => 1,
            Role::Kiosk => 2,
            Role::Printer => 3,
            Role::Tallier => 4,
            Role::Voter => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.tag() == tag)
    }
}

/// Whether an author holding `role` may append an entry of `kind`.
pub fn authorized(kind: EntryKind, role: Role) -> bool {
    use EntryKind as K;
    use Role as R;
    match (kind, role) {
        (K::KeyBinding, R::Official) => true,
        (K::KeyBinding, R::Kiosk | R::Printer | R::Tallier | R::Voter) => false,
        (K::EnvelopeIssued, R::Printer) => true,
        (K::EnvelopeIssued, R::Official | R::Kiosk | R::Tallier | R::Voter) => false,
        (K::RegistrationSession, R::Official) => true,
        (K::RegistrationSession, R::Kiosk | R::Printer | R::Tallier | R::Voter) => false,
        // σ_k3 is the kiosk's; the device only relays it
        (K::CredentialRegistered, R::Kiosk) => true,
        (K::CredentialRegistered, R::Official | R::Printer | R::Tallier | R::Voter) => false,
        (K::EnvelopeConsumed, R::Voter) => true,
        (K::EnvelopeConsumed, R::Official | R::Kiosk | R::Printer | R::Tallier) => false,
        (K::Ballot, R::Voter) => true,
        (K::Ballot, R::Official | R::Kiosk | R::Printer | R::Tallier) => false,
        (K::VotingEvent, R::Official) => true,
        (K::VotingEvent, R::Kiosk | R::Printer | R::Tallier | R::Voter) => false,
        (K::TallyArtifact, R::Tallier) => true,
        (K::TallyArtifact, R::Official | R::Kiosk | R::Printer | R::Voter) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollEntry {
    pub v_id: String,
    pub name: String,
}

/// Well-known entity that accepts standing votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandingEntity<G: Group> {
    pub name: String,
    pub credential: G::Element,
}

/// Certifies actor keys, the election key, the standing-vote registry and
/// the electoral roll. The first entry of every ledger is one of these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBinding<G: Group> {
    pub group: GroupId,
    pub keys: Vec<(Role, G::Element)>,
    pub election: Option<ElectionPublicKey<G>>,
    pub entities: Vec<StandingEntity<G>>,
    pub roll: Vec<RollEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeIssued {
    pub challenge_hash: Digest,
}

/// Published at check-out; the author is the official `R` and the entry
/// signature is `σ_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationSession<G: Group> {
    pub v_id: String,
    pub d: u64,
    pub v_e: Ciphertext<G>,
    pub kiosk: G::Element,
    pub kiosk_sig: Signature<G>,
}

/// Vote-limiting registration `(K, V, σ_k3, h)`; the author is `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredentialRegistered<G: Group> {
    pub credential: G::Element,
    pub receipt_hash: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeConsumed {
    pub challenge: Vec<u8>,
}

/// `Pf`: `E2 = enc(V)` with known randomness, and knowledge of `E1`'s
/// randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallotProof<G: Group> {
    pub credential: NizkProof<G>,
    pub option: NizkProof<G>,
}

impl<G: Group> BallotProof<G> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.credential.write(&mut w);
        self.option.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes, "ballot proof");
        let proof = Self { credential: NizkProof::read(&mut r)?, option: NizkProof::read(&mut r)? };
        r.finish()?;
        Ok(proof)
    }
}

/// Ballot `(E1, E2, Pf, ε)`; the author is `V` and the signature is `σ_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot<G: Group> {
    pub e1: Ciphertext<G>,
    pub e2: Ciphertext<G>,
    pub proof: BallotProof<G>,
    pub event: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RevotePolicy {
    Forbid,
    LastCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VotingEvent<G: Group> {
    pub id: String,
    pub options: Vec<G::Element>,
    pub revote: RevotePolicy,
    pub vote_limit: bool,
    pub status: EventStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TallyArtifact {
    pub event: String,
    pub report: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryBody<G: Group> {
    KeyBinding(KeyBinding<G>),
    EnvelopeIssued(EnvelopeIssued),
    RegistrationSession(RegistrationSession<G>),
    CredentialRegistered(CredentialRegistered<G>),
    EnvelopeConsumed(EnvelopeConsumed),
    Ballot(Ballot<G>),
    VotingEvent(VotingEvent<G>),
    TallyArtifact(TallyArtifact),
}

fn write_count(w: &mut Writer, n: usize) {
    w.u64(n as u64);
}

fn read_count(r: &mut Reader<'_>) -> Result<usize, CryptoError> {
    usize::try_from(r.u64()?).map_err(|_| CryptoError::Malformed("count"))
}

fn read_flag(r: &mut Reader<'_>) -> Result<bool, CryptoError> {
    match r.field()? {
        [0] => Ok(false),
        [1] => Ok(true),
        _ => Err(CryptoError::Malformed("flag")),
    }
}

fn read_digest(r: &mut Reader<'_>) -> Result<Digest, CryptoError> {
    r.field()?.try_into().map_err(|_| CryptoError::Malformed("digest"))
}

impl<G: Group> EntryBody<G> {
    pub fn kind(&self) -> EntryKind {
        match self {
            EntryBody::KeyBinding(_) => EntryKind::KeyBinding,
            EntryBody::EnvelopeIssued(_) => EntryKind::EnvelopeIssued,
            EntryBody::RegistrationSession(_) => EntryKind::RegistrationSession,
            EntryBody::CredentialRegistered(_) => EntryKind::CredentialRegistered,
            EntryBody::EnvelopeConsumed(_) => EntryKind::EnvelopeConsumed,
            EntryBody::Ballot(_) => EntryKind::Ballot,
            EntryBody::VotingEvent(_) => EntryKind::VotingEvent,
            EntryBody::TallyArtifact(_) => EntryKind::TallyArtifact,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            EntryBody::KeyBinding(b) => {
                w.field(&[b.group.tag()]);
                write_count(&mut w, b.keys.len());
                for (role, key) in &b.keys {
                    w.field(&[role.tag()]).element::<G>(key);
                }
                match &b.election {
                    None => {
                        w.field(&[0]);
                    }
                    Some(e) => {
                        w.field(&[1]).element::<G>(&e.key);
                        write_count(&mut w, e.threshold);
                        write_count(&mut w, e.verification_keys.len());
                        for vk in &e.verification_keys {
                            w.element::<G>(vk);
                        }
                    }
                }
                write_count(&mut w, b.entities.len());
                for e in &b.entities {
                    w.field(e.name.as_bytes()).element::<G>(&e.credential);
                }
                write_count(&mut w, b.roll.len());
                for entry in &b.roll {
                    w.field(entry.v_id.as_bytes()).field(entry.name.as_bytes());
                }
            }
            EntryBody::EnvelopeIssued(b) => {
                w.field(&b.challenge_hash);
            }
            EntryBody::RegistrationSession(b) => {
                w.field(b.v_id.as_bytes()).u64(b.d);
                b.v_e.write(&mut w);
                w.element::<G>(&b.kiosk).field(&b.kiosk_sig.to_bytes());
            }
            EntryBody::CredentialRegistered(b) => {
                w.element::<G>(&b.credential).field(&b.receipt_hash);
            }
            EntryBody::EnvelopeConsumed(b) => {
                w.field(&b.challenge);
            }
            EntryBody::Ballot(b) => {
                b.e1.write(&mut w);
                b.e2.write(&mut w);
                w.field(&b.proof.to_bytes()).field(b.event.as_bytes());
            }
            EntryBody::VotingEvent(b) => {
                w.field(b.id.as_bytes());
                write_count(&mut w, b.options.len());
                for o in &b.options {
                    w.element::<G>(o);
                }
                let revote = match b.revote {
                    RevotePolicy::Forbid => 0,
                    RevotePolicy::LastCounts => 1,
                };
                let status = match b.status {
                    EventStatus::Open => 0,
                    EventStatus::Closed => 1,
                };
                w.field(&[revote]).field(&[u8::from(b.vote_limit)]).field(&[status]);
            }
            EntryBody::TallyArtifact(b) => {
                w.field(b.event.as_bytes()).long_field(&b.report);
            }
        }
        w.finish()
    }

    pub fn from_bytes(kind: EntryKind, bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes, "entry body");
        let body = match kind {
            EntryKind::KeyBinding => {
                let group = match r.field()? {
                    [tag] => GroupId::from_tag(*tag),
                    _ => None,
                }
                .ok_or(CryptoError::Malformed("group id"))?;
                if group != G::ID {
                    return Err(CryptoError::Malformed("group id"));
                }
                let mut keys = Vec::new();
                for _ in 0..read_count(&mut r)? {
                    let role = match r.field()? {
                        [tag] => Role::from_tag(*tag),
                        _ => None,
                    }
                    .ok_or(CryptoError::Malformed("role"))?;
                    keys.push((role, r.element::<G>()?));
                }
                let election = if read_flag(&mut r)? {
                    let key = r.element::<G>()?;
                    let threshold = read_count(&mut r)?;
                    let n = read_count(&mut r)?;
                    let verification_keys = (0..n).map(|_| r.element::<G>()).collect::<Result<_, _>>()?;
                    Some(ElectionPublicKey { key, threshold, verification_keys })
                } else {
                    None
                };
                let mut entities = Vec::new();
                for _ in 0..read_count(&mut r)? {
                    let name = r.utf8()?.to_owned();
                    entities.push(StandingEntity { name, credential: r.element::<G>()? });
                }
                let mut roll = Vec::new();
                for _ in 0..read_count(&mut r)? {
                    let v_id = r.utf8()?.to_owned();
                    roll.push(RollEntry { v_id, name: r.utf8()?.to_owned() });
                }
                EntryBody::KeyBinding(KeyBinding { group, keys, election, entities, roll })
            }
            EntryKind::EnvelopeIssued => {
                EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: read_digest(&mut r)? })
            }
            EntryKind::RegistrationSession => EntryBody::RegistrationSession(RegistrationSession {
                v_id: r.utf8()?.to_owned(),
                d: r.u64()?,
                v_e: Ciphertext::read(&mut r)?,
                kiosk: r.element::<G>()?,
                kiosk_sig: Signature::from_bytes(r.field()?)?,
            }),
            EntryKind::CredentialRegistered => EntryBody::CredentialRegistered(CredentialRegistered {
                credential: r.element::<G>()?,
                receipt_hash: read_digest(&mut r)?,
            }),
            EntryKind::EnvelopeConsumed => {
                EntryBody::EnvelopeConsumed(EnvelopeConsumed { challenge: r.field()?.to_vec() })
            }
            EntryKind::Ballot => EntryBody::Ballot(Ballot {
                e1: Ciphertext::read(&mut r)?,
                e2: Ciphertext::read(&mut r)?,
                proof: BallotProof::from_bytes(r.field()?)?,
                event: r.utf8()?.to_owned(),
            }),
            EntryKind::VotingEvent => {
                let id = r.utf8()?.to_owned();
                let options = (0..read_count(&mut r)?).map(|_| r.element::<G>()).collect::<Result<_, _>>()?;
                let revote = match r.field()? {
                    [0] => RevotePolicy::Forbid,
                    [1] => RevotePolicy::LastCounts,
                    _ => return Err(CryptoError::Malformed("revote policy")),
                };
                let vote_limit = read_flag(&mut r)?;
                let status = match r.field()? {
                    [0] => EventStatus::Open,
                    [1] => EventStatus::Closed,
                    _ => return Err(CryptoError::Malformed("event status")),
                };
                EntryBody::VotingEvent(VotingEvent { id, options, revote, vote_limit, status })
            }
            EntryKind::TallyArtifact => EntryBody::TallyArtifact(TallyArtifact {
                event: r.utf8()?.to_owned(),
                report: r.long_field()?.to_vec(),
            }),
        };
        r.finish()?;
        Ok(body)
    }

    /// The exact bytes the author signs.
    pub fn signed_message(&self, author: &G::Element) -> Vec<u8> {
        match self {
            EntryBody::EnvelopeIssued(b) => messages::envelope(&b.challenge_hash),
            EntryBody::RegistrationSession(b) => messages::official_checkout(&b.v_id, b.d, &b.v_e, &b.kiosk_sig),
            EntryBody::CredentialRegistered(b) => messages::receipt::<G>(&b.credential, &b.receipt_hash),
            EntryBody::Ballot(b) => messages::ballot(&b.e1, &b.e2, &b.proof.to_bytes(), &b.event),
            EntryBody::KeyBinding(_)
            | EntryBody::EnvelopeConsumed(_)
            | EntryBody::VotingEvent(_)
            | EntryBody::TallyArtifact(_) => {
                // bind the author too, since nothing else in the body does
                let mut input = messages::entry(self.kind(), &self.to_bytes());
                input.extend(G::encode_element(author));
                input
            }
        }
    }
}

/// An entry as submitted, before the ledger assigns it an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<G: Group> {
    pub author: G::Element,
    pub body: EntryBody<G>,
    pub signature: Signature<G>,
}

impl<G: Group> Entry<G> {
    pub fn new(author: G::Element, body: EntryBody<G>, signature: Signature<G>) -> Self {
        Self { author, body, signature }
    }

    /// Signs `body` with `key`, which becomes the author.
    pub fn sign(key: &SigningKeypair<G>, body: EntryBody<G>) -> Self {
        let signature = key.sign(&body.signed_message(key.public()));
        Self { author: *key.public(), body, signature }
    }

    pub fn kind(&self) -> EntryKind {
        self.body.kind()
    }

    pub fn verify_signature(&self) -> bool {
        trip_core::schnorr::verify(&self.author, &self.signature, &self.body.signed_message(&self.author))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::tagged(ENTRY_VERSION);
        w.field(&[self.kind().tag()])
            .element::<G>(&self.author)
            .long_field(&self.body.to_bytes())
            .field(&self.signature.to_bytes());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes, "ledger entry");
        r.expect_tag(ENTRY_VERSION)?;
        let kind = match r.field()? {
            [tag] => EntryKind::from_tag(*tag),
            _ => None,
        }
        .ok_or(CryptoError::Malformed("entry kind"))?;
        let author = r.element::<G>()?;
        let body = EntryBody::from_bytes(kind, r.long_field()?)?;
        let signature = Signature::from_bytes(r.field()?)?;
        r.finish()?;
        Ok(Self { author, body, signature })
    }
}

/// An entry at its position in the ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry<G: Group> {
    pub index: u64,
    pub entry: Entry<G>,
}

impl<G: Group> LedgerEntry<G> {
    pub fn kind(&self) -> EntryKind {
        self.entry.kind()
    }

    pub fn author(&self) -> &G::Element {
        &self.entry.author
    }

    pub fn body(&self) -> &EntryBody<G> {
        &self.entry.body
    }

    pub fn registration(&self) -> Option<&RegistrationSession<G>> {
        match &self.entry.body {
            EntryBody::RegistrationSession(b) => Some(b),
            _ => None,
        }
    }

    pub fn ballot(&self) -> Option<&Ballot<G>> {
        match &self.entry.body {
            EntryBody::Ballot(b) => Some(b),
            _ => None,
        }
    }

    pub fn voting_event(&self) -> Option<&VotingEvent<G>> {
        match &self.entry.body {
            EntryBody::VotingEvent(b) => Some(b),
            _ => None,
        }
    }
}
