use std::{sync::Arc, thread};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use trip_core::{elgamal::encrypt, hash, Group, Ristretto, SigningKeypair, TestGroup};
use trip_ledger::{
    encode_record, messages, AuditFault, Entry, EntryBody, EntryKind, EnvelopeConsumed, EnvelopeIssued, EventStatus,
    KeyBinding, Ledger, LedgerError, RegistrationSession, RevotePolicy, Role, RollEntry, VotingEvent,
};

type R = Ristretto;

struct Actors<G: Group> {
    official: SigningKeypair<G>,
    kiosk: SigningKeypair<G>,
    printer: SigningKeypair<G>,
    outsider: SigningKeypair<G>,
}

fn setup<G: Group>(rng: &mut ChaCha20Rng) -> (Ledger<G>, Actors<G>) {
    let actors = Actors {
        official: SigningKeypair::generate(rng),
        kiosk: SigningKeypair::generate(rng),
        printer: SigningKeypair::generate(rng),
        outsider: SigningKeypair::generate(rng),
    };
    let ledger = Ledger::in_memory();
    let genesis = EntryBody::KeyBinding(KeyBinding {
        group: G::ID,
        keys: vec![
            (Role::Official, *actors.official.public()),
            (Role::Kiosk, *actors.kiosk.public()),
            (Role::Printer, *actors.printer.public()),
        ],
        election: None,
        entities: vec![],
        roll: (0..3).map(|i| RollEntry { v_id: format!("v{i}"), name: format!("Voter {i}") }).collect(),
    });
    ledger.append(Entry::sign(&actors.official, genesis)).unwrap();
    (ledger, actors)
}

fn session<G: Group>(kiosk: &SigningKeypair<G>, v_id: &str, d: u64, rng: &mut ChaCha20Rng) -> RegistrationSession<G> {
    let v_e = encrypt::<G, _>(&G::g2(), &G::g1(), None, rng).unwrap();
    let kiosk_sig = kiosk.sign(&messages::kiosk_checkout(v_id, d, &v_e));
    RegistrationSession { v_id: v_id.into(), d, v_e, kiosk: *kiosk.public(), kiosk_sig }
}

fn issue<G: Group>(ledger: &Ledger<G>, printer: &SigningKeypair<G>, c: &[u8]) -> u64 {
    ledger.append(Entry::sign(printer, EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(c) }))).unwrap()
}

#[test]
fn append_then_read_back_identical_bytes() {
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let (ledger, a) = setup::<R>(&mut rng);
    let entry = Entry::sign(&a.printer, EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(b"c0") }));
    let bytes = entry.to_bytes();
    let index = ledger.append(entry).unwrap();
    assert_eq!(index, 1);
    assert_eq!(ledger.entry_bytes(index).unwrap(), bytes);
}

#[test]
fn registration_session_needs_an_official() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (ledger, a) = setup::<R>(&mut rng);
    let body = EntryBody::RegistrationSession(session(&a.kiosk, "v0", 100, &mut rng));
    for key in [&a.kiosk, &a.printer, &a.outsider] {
        let err = ledger.append(Entry::sign(key, body.clone())).unwrap_err();
        assert!(matches!(err, LedgerError::Unauthorized(EntryKind::RegistrationSession)));
    }
    ledger.append(Entry::sign(&a.official, body)).unwrap();
}

#[test]
fn forged_signature_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (ledger, a) = setup::<R>(&mut rng);
    let mut entry = Entry::sign(&a.printer, EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(b"c") }));
    entry.author = *a.outsider.public();
    assert!(matches!(ledger.append(entry), Err(LedgerError::BadSignature(_))));
}

#[test]
fn genesis_must_be_a_self_certified_key_binding() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let key = SigningKeypair::<R>::generate(&mut rng);
    let ledger = Ledger::<R>::in_memory();
    let envelope = Entry::sign(&key, EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(b"c") }));
    assert!(matches!(ledger.append(envelope), Err(LedgerError::MissingGenesis)));
    let binding = KeyBinding { group: R::ID, keys: vec![], election: None, entities: vec![], roll: vec![] };
    let entry = Entry::sign(&key, EntryBody::KeyBinding(binding));
    assert!(matches!(ledger.append(entry), Err(LedgerError::MissingGenesis)));
}

#[test]
fn concurrent_appends_get_consecutive_indices() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let (ledger, a) = setup::<R>(&mut rng);
    let ledger = Arc::new(ledger);
    let printer = Arc::new(a.printer);
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let ledger = Arc::clone(&ledger);
            let printer = Arc::clone(&printer);
            thread::spawn(move || {
                (0..25).map(|i| issue(&ledger, &printer, format!("{t}/{i}").as_bytes())).collect::<Vec<_>>()
            })
        })
        .collect();
    let mut indices: Vec<u64> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
    indices.sort_unstable();
    assert_eq!(indices, (1..=200).collect::<Vec<_>>());
    assert!(ledger.audit().is_ok());
}

#[test]
fn queries_follow_renewal_semantics() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (ledger, a) = setup::<R>(&mut rng);
    assert!(ledger.latest_registration("v1").is_none());
    let first = session(&a.kiosk, "v1", 100, &mut rng);
    ledger.append(Entry::sign(&a.official, EntryBody::RegistrationSession(first.clone()))).unwrap();
    assert_eq!(ledger.latest_registration("v1").unwrap().registration(), Some(&first));

    let second = session(&a.kiosk, "v1", 200, &mut rng);
    ledger.append(Entry::sign(&a.official, EntryBody::RegistrationSession(second.clone()))).unwrap();
    assert_eq!(ledger.latest_registration("v1").unwrap().registration().unwrap().d, 200);
    assert_eq!(ledger.registrations("v1").len(), 2);

    let notes = ledger.mailbox().for_voter("v1");
    assert_eq!(notes.len(), 2);
    assert_ne!(notes[0].v_e, notes[1].v_e, "renewal shows a new V_e");
    assert!(ledger.mailbox().for_voter("v0").is_empty());
}

#[test]
fn checkout_rules_enforced() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let (ledger, a) = setup::<R>(&mut rng);
    let unknown = EntryBody::RegistrationSession(session(&a.kiosk, "stranger", 1, &mut rng));
    assert!(matches!(ledger.append(Entry::sign(&a.official, unknown)), Err(LedgerError::UnknownVoter(_))));
    let rogue = EntryBody::RegistrationSession(session(&a.outsider, "v0", 1, &mut rng));
    assert!(matches!(ledger.append(Entry::sign(&a.official, rogue)), Err(LedgerError::UnknownKiosk)));
    let mut tampered = session(&a.kiosk, "v0", 1, &mut rng);
    tampered.d += 1;
    let entry = Entry::sign(&a.official, EntryBody::RegistrationSession(tampered));
    assert!(matches!(ledger.append(entry), Err(LedgerError::BadKioskSignature)));
    assert!(ledger.mailbox().is_empty());
}

#[test]
fn envelopes_are_issued_once_and_consumed_once() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let (ledger, a) = setup::<R>(&mut rng);
    assert!(ledger.envelope(&hash(b"never")).is_none());
    issue(&ledger, &a.printer, b"c1");
    let dup = Entry::sign(&a.printer, EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(b"c1") }));
    assert!(matches!(ledger.append(dup), Err(LedgerError::DuplicateEnvelope)));

    let device = SigningKeypair::<R>::generate(&mut rng);
    let consume =
        |c: &[u8]| Entry::sign(&device, EntryBody::EnvelopeConsumed(EnvelopeConsumed { challenge: c.to_vec() }));
    assert!(matches!(ledger.append(consume(b"c2")), Err(LedgerError::UnknownEnvelope)));
    ledger.append(consume(b"c1")).unwrap();
    assert!(ledger.consumption(&hash(b"c1")).is_some());
    assert!(matches!(ledger.append(consume(b"c1")), Err(LedgerError::EnvelopeConsumed)));
}

#[test]
fn voting_event_lifecycle() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let (ledger, a) = setup::<TestGroup>(&mut rng);
    let mut event = VotingEvent {
        id: "e1".into(),
        options: vec![TestGroup::g1(), TestGroup::g2()],
        revote: RevotePolicy::Forbid,
        vote_limit: false,
        status: EventStatus::Open,
    };
    let dup_options = VotingEvent { options: vec![TestGroup::g1(), TestGroup::g1()], ..event.clone() };
    assert!(matches!(
        ledger.append(Entry::sign(&a.official, EntryBody::VotingEvent(dup_options))),
        Err(LedgerError::InvalidEvent(_))
    ));
    ledger.append(Entry::sign(&a.official, EntryBody::VotingEvent(event.clone()))).unwrap();
    assert!(ledger.append(Entry::sign(&a.official, EntryBody::VotingEvent(event.clone()))).is_err());
    event.status = EventStatus::Closed;
    ledger.append(Entry::sign(&a.official, EntryBody::VotingEvent(event.clone()))).unwrap();
    assert_eq!(ledger.voting_event("e1").unwrap().status, EventStatus::Closed);
    assert!(ledger.append(Entry::sign(&a.official, EntryBody::VotingEvent(event))).is_err());
}

#[test]
fn file_ledger_survives_restart_and_localizes_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.bin");
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let a = {
        let (mem, a) = setup::<R>(&mut rng);
        let ledger = Ledger::<R>::open(&path).unwrap();
        ledger.append(mem.get(0).unwrap().entry).unwrap();
        for i in 0..20 {
            issue(&ledger, &a.printer, format!("c{i}").as_bytes());
        }
        ledger
            .append(Entry::sign(&a.official, EntryBody::RegistrationSession(session(&a.kiosk, "v2", 5, &mut rng))))
            .unwrap();
        a
    };
    let reopened = Ledger::<R>::open(&path).unwrap();
    assert_eq!(reopened.len(), 22);
    assert_eq!(reopened.latest_registration("v2").unwrap().index, 21);
    assert!(reopened.envelope(&hash(b"c7")).is_some());
    issue(&reopened, &a.printer, b"after restart");
    drop(reopened);

    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(trip_ledger::genesis_group(&bytes), Some(R::ID));
    assert_eq!(trip_ledger::audit::<R>(&bytes).unwrap().entries, 23);
    let mut corrupt = bytes.clone();
    let target = bytes.len() / 2;
    corrupt[target] ^= 0x10;
    std::fs::write(&path, &corrupt).unwrap();
    let failure = trip_ledger::audit::<R>(&corrupt).unwrap_err();
    assert!(failure.index > 0 && failure.index < 23);
    assert!(matches!(Ledger::<R>::open(&path), Err(LedgerError::Corrupt(_))));
}

fn file_with<G: Group>(entries: &[Entry<G>]) -> Vec<u8> {
    entries.iter().enumerate().flat_map(|(i, e)| encode_record(i as u64, &e.to_bytes())).collect()
}

#[test]
fn re_framed_forgery_is_caught_by_signatures() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let (ledger, a) = setup::<R>(&mut rng);
    for i in 0..5 {
        issue(&ledger, &a.printer, format!("c{i}").as_bytes());
    }
    let mut entries: Vec<_> = ledger.entries().into_iter().map(|e| e.entry).collect();
    assert_eq!(file_with(&entries), ledger.to_file_bytes());
    // valid framing and checksum, stale signature
    entries[3].body = EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: hash(b"forged") });
    let failure = trip_ledger::audit::<R>(&file_with(&entries)).unwrap_err();
    assert_eq!(failure.index, 3);
    assert!(matches!(failure.fault, AuditFault::Rejected(LedgerError::BadSignature(_))));
}

#[test]
fn export_text_has_one_line_per_entry() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let (ledger, a) = setup::<R>(&mut rng);
    issue(&ledger, &a.printer, b"c");
    let text = ledger.export_text();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["kind"], "envelope-issued");
    assert_eq!(lines[1]["entry"], hex::encode(ledger.entry_bytes(1).unwrap()));
}

#[test]
fn replay_rejection_names_the_entry() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let (ledger, a) = setup::<R>(&mut rng);
    issue(&ledger, &a.printer, b"c");
    let mut entries: Vec<_> = ledger.entries().into_iter().map(|e| e.entry).collect();
    entries.push(entries[1].clone());
    let failure = trip_ledger::audit::<R>(&file_with(&entries)).unwrap_err();
    assert_eq!(failure.index, 2);
    assert!(matches!(failure.fault, AuditFault::Rejected(LedgerError::DuplicateEnvelope)));
}
