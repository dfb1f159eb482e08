use std::{
    collections::{BTreeMap, BTreeSet, HashMap},
    fs,
    path::Path,
    sync::{Mutex, RwLock},
};

use trip_core::{hash, schnorr, Digest, ElectionPublicKey, Group, GroupId};

use crate::{
    authorized,
    entry::{EntryBody, EventStatus, RevotePolicy, RollEntry, StandingEntity, VotingEvent},
    messages,
    store::{encode_record, split_records, FileStore, MemoryStore, Store},
    AuditFailure, AuditFault, Entry, EntryKind, LedgerEntry, LedgerError, Mailbox, Notification, Role,
};

type Key = Vec<u8>;

fn key<G: Group>(e: &G::Element) -> Key {
    G::encode_element(e)
}

/// Indexes derived by replaying entries in order.
#[derive(Debug)]
struct State<G: Group> {
    entries: Vec<LedgerEntry<G>>,
    records: Vec<Vec<u8>>,
    roles: BTreeMap<Key, BTreeSet<Role>>,
    election: Option<ElectionPublicKey<G>>,
    entities: Vec<StandingEntity<G>>,
    roll: BTreeMap<String, RollEntry>,
    registrations: HashMap<String, Vec<usize>>,
    envelopes: HashMap<Digest, usize>,
    consumed: HashMap<Digest, usize>,
    credentials: HashMap<Key, usize>,
    events: HashMap<String, usize>,
    ballots: HashMap<String, Vec<usize>>,
}

impl<G: Group> Default for State<G> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            records: Vec::new(),
            roles: BTreeMap::new(),
            election: None,
            entities: Vec::new(),
            roll: BTreeMap::new(),
            registrations: HashMap::new(),
            envelopes: HashMap::new(),
            consumed: HashMap::new(),
            credentials: HashMap::new(),
            events: HashMap::new(),
            ballots: HashMap::new(),
        }
    }
}

impl<G: Group> State<G> {
    fn has_role(&self, k: &G::Element, role: Role) -> bool {
        role == Role::Voter || self.roles.get(&key::<G>(k)).is_some_and(|r| r.contains(&role))
    }

    fn event(&self, id: &str) -> Option<&VotingEvent<G>> {
        self.events.get(id).and_then(|&i| self.entries[i].voting_event())
    }

    fn check(&self, entry: &Entry<G>) -> Result<(), LedgerError> {
        let kind = entry.kind();
        if !entry.verify_signature() {
            return Err(LedgerError::BadSignature(kind));
        }
        if self.entries.is_empty() {
            let EntryBody::KeyBinding(b) = &entry.body else {
                return Err(LedgerError::MissingGenesis);
            };
            if !b.keys.iter().any(|(r, k)| *r == Role::Official && *k == entry.author) {
                return Err(LedgerError::MissingGenesis);
            }
        } else if !Role::ALL.into_iter().any(|r| authorized(kind, r) && self.has_role(&entry.author, r)) {
            return Err(LedgerError::Unauthorized(kind));
        }

        match &entry.body {
            EntryBody::KeyBinding(b) => {
                if b.group != G::ID {
                    return Err(LedgerError::Conflict("group profile"));
                }
                if b.election.is_some() && self.election.is_some() {
                    return Err(LedgerError::Conflict("election key already bound"));
                }
                if let Some(e) = &b.election {
                    if e.threshold == 0 || e.threshold > e.verification_keys.len() || e.key == G::identity() {
                        return Err(LedgerError::Conflict("election key parameters"));
                    }
                }
                let mut names = BTreeSet::new();
                let mut creds = BTreeSet::new();
                for e in self.entities.iter().chain(&b.entities) {
                    if !names.insert(e.name.clone()) || !creds.insert(key::<G>(&e.credential)) {
                        return Err(LedgerError::Conflict("standing-vote entities must be distinct"));
                    }
                }
                let mut ids = BTreeSet::new();
                for r in &b.roll {
                    if self.roll.contains_key(&r.v_id) || !ids.insert(&r.v_id) {
                        return Err(LedgerError::Conflict("duplicate voter identifier"));
                    }
                }
            }
            EntryBody::EnvelopeIssued(b) => {
                if self.envelopes.contains_key(&b.challenge_hash) {
                    return Err(LedgerError::DuplicateEnvelope);
                }
            }
            EntryBody::RegistrationSession(b) => {
                if !self.roll.contains_key(&b.v_id) {
                    return Err(LedgerError::UnknownVoter(b.v_id.clone()));
                }
                if !self.has_role(&b.kiosk, Role::Kiosk) {
                    return Err(LedgerError::UnknownKiosk);
                }
                if !schnorr::verify(&b.kiosk, &b.kiosk_sig, &messages::kiosk_checkout(&b.v_id, b.d, &b.v_e)) {
                    return Err(LedgerError::BadKioskSignature);
                }
            }
            EntryBody::CredentialRegistered(b) => {
                if self.credentials.contains_key(&key::<G>(&b.credential)) {
                    return Err(LedgerError::DuplicateCredential);
                }
            }
            EntryBody::EnvelopeConsumed(b) => {
                let h = hash(&b.challenge);
                if !self.envelopes.contains_key(&h) {
                    return Err(LedgerError::UnknownEnvelope);
                }
                if self.consumed.contains_key(&h) {
                    return Err(LedgerError::EnvelopeConsumed);
                }
            }
            EntryBody::Ballot(b) => {
                let event = self.event(&b.event).ok_or_else(|| LedgerError::UnknownEvent(b.event.clone()))?;
                if event.status != EventStatus::Open {
                    return Err(LedgerError::EventClosed(b.event.clone()));
                }
                if event.vote_limit && !self.credentials.contains_key(&key::<G>(&entry.author)) {
                    return Err(LedgerError::UnregisteredCredential);
                }
                if event.revote == RevotePolicy::Forbid {
                    let voted = self
                        .ballots
                        .get(&b.event)
                        .is_some_and(|v| v.iter().any(|&i| self.entries[i].entry.author == entry.author));
                    if voted {
                        return Err(LedgerError::DuplicateBallot);
                    }
                }
            }
            EntryBody::VotingEvent(b) => {
                let mut seen = BTreeSet::new();
                if b.options.is_empty() || !b.options.iter().all(|o| seen.insert(key::<G>(o))) {
                    return Err(LedgerError::InvalidEvent("options must be distinct and non-empty"));
                }
                match (self.event(&b.id), b.status) {
                    (None, EventStatus::Open) => {}
                    (None, EventStatus::Closed) => return Err(LedgerError::UnknownEvent(b.id.clone())),
                    (Some(prev), EventStatus::Closed) if prev.status == EventStatus::Open => {
                        if prev.options != b.options || prev.revote != b.revote || prev.vote_limit != b.vote_limit {
                            return Err(LedgerError::InvalidEvent("closing entry must repeat the event parameters"));
                        }
                    }
                    (Some(_), _) => return Err(LedgerError::InvalidEvent("event already exists")),
                }
            }
            EntryBody::TallyArtifact(b) => {
                let event = self.event(&b.event).ok_or_else(|| LedgerError::UnknownEvent(b.event.clone()))?;
                if event.status == EventStatus::Open {
                    return Err(LedgerError::EventOpen(b.event.clone()));
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, entry: Entry<G>, record: Vec<u8>) -> LedgerEntry<G> {
        let pos = self.entries.len();
        match &entry.body {
            EntryBody::KeyBinding(b) => {
                for (role, k) in &b.keys {
                    self.roles.entry(key::<G>(k)).or_default().insert(*role);
                }
                if let Some(e) = &b.election {
                    self.election = Some(e.clone());
                }
                self.entities.extend(b.entities.iter().cloned());
                for r in &b.roll {
                    self.roll.insert(r.v_id.clone(), r.clone());
                }
            }
            EntryBody::EnvelopeIssued(b) => {
                self.envelopes.insert(b.challenge_hash, pos);
            }
            EntryBody::RegistrationSession(b) => {
                self.registrations.entry(b.v_id.clone()).or_default().push(pos);
            }
            EntryBody::CredentialRegistered(b) => {
                self.credentials.insert(key::<G>(&b.credential), pos);
            }
            EntryBody::EnvelopeConsumed(b) => {
                self.consumed.insert(hash(&b.challenge), pos);
            }
            EntryBody::Ballot(b) => {
                self.ballots.entry(b.event.clone()).or_default().push(pos);
            }
            EntryBody::VotingEvent(b) => {
                self.events.insert(b.id.clone(), pos);
            }
            EntryBody::TallyArtifact(_) => {}
        }
        let indexed = LedgerEntry { index: pos as u64, entry };
        self.entries.push(indexed.clone());
        self.records.push(record);
        indexed
    }
}

/// Result of a successful audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub entries: u64,
    pub counts: BTreeMap<EntryKind, u64>,
}

/// Reads the group profile from the genesis entry of a ledger file.
pub fn genesis_group(bytes: &[u8]) -> Option<GroupId> {
    let first = *split_records(bytes).ok()?.first()?;
    let mut r = trip_core::codec::Reader::new(first, "ledger entry");
    r.expect_tag(1).ok()?;
    if r.field().ok()? != [EntryKind::KeyBinding.tag()] {
        return None;
    }
    r.field().ok()?;
    let body = r.long_field().ok()?;
    match trip_core::codec::Reader::new(body, "entry body").field().ok()? {
        [tag] => GroupId::from_tag(*tag),
        _ => None,
    }
}

/// The authenticated append-only ledger.
///
/// Appends are serialized behind one write lock, so indices are gapless and
/// every query sees a consistent prefix.
pub struct Ledger<G: Group> {
    state: RwLock<State<G>>,
    store: Mutex<Box<dyn Store>>,
    mailbox: Mailbox,
}

impl<G: Group> std::fmt::Debug for Ledger<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ledger").field("entries", &self.len()).finish()
    }
}

impl<G: Group> Default for Ledger<G> {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl<G: Group> Ledger<G> {
    pub fn in_memory() -> Self {
        Self::with_store(Box::new(MemoryStore))
    }

    pub fn with_store(store: Box<dyn Store>) -> Self {
        Self { state: RwLock::new(State::default()), store: Mutex::new(store), mailbox: Mailbox::default() }
    }

    /// Opens (or creates) a ledger file, replaying and fully re-verifying
    /// its contents first.
    pub fn open(path: &Path) -> Result<Self, LedgerError> {
        let state = match fs::read(path) {
            Ok(bytes) => replay::<G>(&bytes).map_err(|f| LedgerError::Corrupt(Box::new(f)))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => State::default(),
            Err(e) => return Err(e.into()),
        };
        let store = FileStore::open(path)?;
        Ok(Self { state: RwLock::new(state), store: Mutex::new(Box::new(store)), mailbox: Mailbox::default() })
    }

    /// Validates and appends `entry`, returning its index.
    pub fn append(&self, entry: Entry<G>) -> Result<u64, LedgerError> {
        let mut state = self.state.write().expect("ledger lock poisoned");
        state.check(&entry)?;
        let index = state.entries.len() as u64;
        let record = encode_record(index, &entry.to_bytes());
        self.store.lock().expect("store lock poisoned").persist(&record)?;
        let appended = state.apply(entry, record);
        if let Some(reg) = appended.registration() {
            self.mailbox.deliver(Notification { v_id: reg.v_id.clone(), index, d: reg.d, v_e: reg.v_e.to_bytes() });
        }
        Ok(index)
    }

    pub fn mailbox(&self) -> &Mailbox {
        &self.mailbox
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State<G>> {
        self.state.read().expect("ledger lock poisoned")
    }

    pub fn len(&self) -> u64 {
        self.read().entries.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: u64) -> Option<LedgerEntry<G>> {
        self.read().entries.get(usize::try_from(index).ok()?).cloned()
    }

    /// Encoded entry at `index`, exactly as persisted inside its record.
    pub fn entry_bytes(&self, index: u64) -> Option<Vec<u8>> {
        self.get(index).map(|e| e.entry.to_bytes())
    }

    /// The whole ledger in its file format.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        self.read().records.concat()
    }

    pub fn entries(&self) -> Vec<LedgerEntry<G>> {
        self.read().entries.clone()
    }

    pub fn entries_of(&self, kind: EntryKind) -> Vec<LedgerEntry<G>> {
        self.read().entries.iter().filter(|e| e.kind() == kind).cloned().collect()
    }

    pub fn has_role(&self, k: &G::Element, role: Role) -> bool {
        self.read().has_role(k, role)
    }

    pub fn keys_with_role(&self, role: Role) -> Vec<G::Element> {
        self.read()
            .roles
            .iter()
            .filter(|(_, roles)| roles.contains(&role))
            .filter_map(|(k, _)| G::decode_element(k))
            .collect()
    }

    pub fn election_key(&self) -> Option<ElectionPublicKey<G>> {
        self.read().election.clone()
    }

    pub fn entities(&self) -> Vec<StandingEntity<G>> {
        self.read().entities.clone()
    }

    pub fn roll(&self) -> Vec<RollEntry> {
        self.read().roll.values().cloned().collect()
    }

    pub fn on_roll(&self, v_id: &str) -> bool {
        self.read().roll.contains_key(v_id)
    }

    /// Latest registration session for `V_id`; check-out renews it.
    pub fn latest_registration(&self, v_id: &str) -> Option<LedgerEntry<G>> {
        let state = self.read();
        let &i = state.registrations.get(v_id)?.last()?;
        Some(state.entries[i].clone())
    }

    pub fn registrations(&self, v_id: &str) -> Vec<LedgerEntry<G>> {
        let state = self.read();
        state.registrations.get(v_id).map(|v| v.iter().map(|&i| state.entries[i].clone()).collect()).unwrap_or_default()
    }

    /// Latest registration of every voter, in roll order.
    pub fn current_registrations(&self) -> Vec<LedgerEntry<G>> {
        self.roll().iter().filter_map(|r| self.latest_registration(&r.v_id)).collect()
    }

    pub fn envelope(&self, challenge_hash: &Digest) -> Option<LedgerEntry<G>> {
        let state = self.read();
        state.envelopes.get(challenge_hash).map(|&i| state.entries[i].clone())
    }

    pub fn consumption(&self, challenge_hash: &Digest) -> Option<LedgerEntry<G>> {
        let state = self.read();
        state.consumed.get(challenge_hash).map(|&i| state.entries[i].clone())
    }

    pub fn credential_registration(&self, credential: &G::Element) -> Option<LedgerEntry<G>> {
        let state = self.read();
        state.credentials.get(&key::<G>(credential)).map(|&i| state.entries[i].clone())
    }

    pub fn voting_event(&self, id: &str) -> Option<VotingEvent<G>> {
        self.read().event(id).cloned()
    }

    pub fn ballots(&self, event: &str) -> Vec<LedgerEntry<G>> {
        let state = self.read();
        state.ballots.get(event).map(|v| v.iter().map(|&i| state.entries[i].clone()).collect()).unwrap_or_default()
    }

    /// Re-verifies every record, signature and authorization from scratch.
    pub fn audit(&self) -> Result<AuditReport, AuditFailure> {
        audit::<G>(&self.to_file_bytes())
    }

    /// One JSON object per line: index, kind, author and entry bytes in hex.
    pub fn export_text(&self) -> String {
        let state = self.read();
        let mut out = String::new();
        for e in &state.entries {
            let line = serde_json::json!({
                "index": e.index,
                "kind": e.kind().as_str(),
                "author": hex::encode(G::encode_element(e.author())),
                "entry": hex::encode(e.entry.to_bytes()),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

fn replay<G: Group>(bytes: &[u8]) -> Result<State<G>, AuditFailure> {
    let records = split_records(bytes)?;
    let mut state = State::<G>::default();
    for (i, payload) in records.into_iter().enumerate() {
        let index = i as u64;
        let entry =
            Entry::<G>::from_bytes(payload).map_err(|e| AuditFailure { index, fault: AuditFault::Decode(e) })?;
        state.check(&entry).map_err(|e| AuditFailure { index, fault: AuditFault::Rejected(e) })?;
        state.apply(entry, encode_record(index, payload));
    }
    Ok(state)
}

/// Audits a ledger file image: framing, checksums, decoding, signatures and
/// the authorization and state rules, entry by entry.
pub fn audit<G: Group>(bytes: &[u8]) -> Result<AuditReport, AuditFailure> {
    let state = replay::<G>(bytes)?;
    let mut counts = BTreeMap::new();
    for e in &state.entries {
        *counts.entry(e.kind()).or_insert(0) += 1;
    }
    Ok(AuditReport { entries: state.entries.len() as u64, counts })
}
