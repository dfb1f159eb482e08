//! HTTP routes. Every payload field is base64 of the canonical bytes.

use std::{collections::BTreeMap, sync::Arc};

use axum::{
    extract::{FromRequest, Path, Query, Request, State},
    routing::{get, post},
    Json, Router,
};
use base64::{engine::general_purpose::STANDARD, Engine};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use trip_core::{Group, SigningKeypair};
use trip_ledger::{EntryKind, RevotePolicy};
use trip_protocol::{
    activate,
    officials::{checkin_issue, checkout_process, envelope_print, DEFAULT_NONCE_LEN},
    BundleKind, Check, CheckInTicket, CheckStatus, CheckoutTicket, CommitPayload, Envelope, KioskSession, LedgerView,
    Mode, Payload, Phase, ReceiptBundle, ResponsePayload, SessionEvent, Target, Verdict, VoterDevice,
};
use trip_sim::ScenarioConfig;

use crate::{
    service::{SessionRole, SessionState},
    ApiError, Service,
};

type Svc<G> = State<Arc<Service<G>>>;
type Reply<T> = Result<Json<T>, ApiError>;

/// JSON body whose parse failures become structured 400s.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(ApiError::bad_request("malformed-body", e.body_text())),
        }
    }
}

fn decode<P: Payload>(text: &str) -> Result<P, ApiError> {
    P::from_base64(text).map_err(ApiError::from)
}

fn b64(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

fn element<G: Group>(e: &G::Element) -> String {
    b64(&G::encode_element(e))
}

pub fn router<G: Group>(service: Arc<Service<G>>) -> Router {
    Router::new()
        .route("/health", get(health::<G>))
        .route("/sessions", post(open_session::<G>))
        .route("/sessions/{id}", get(session_info::<G>).delete(close_session::<G>))
        .route("/sessions/{id}/checkin-ticket", post(checkin_ticket::<G>))
        .route("/sessions/{id}/envelopes", post(envelopes::<G>))
        .route("/sessions/{id}/checkout", post(checkout::<G>))
        .route("/sessions/{id}/events", post(open_event::<G>))
        .route("/sessions/{id}/events/{event}/close", post(close_event::<G>))
        .route("/sessions/{id}/tally/{event}", post(tally::<G>))
        .route("/sessions/{id}/ticket", post(kiosk_ticket::<G>))
        .route("/sessions/{id}/real", post(kiosk_real::<G>))
        .route("/sessions/{id}/real/select", post(kiosk_real_select::<G>))
        .route("/sessions/{id}/envelope", post(kiosk_envelope::<G>))
        .route("/sessions/{id}/fake", post(kiosk_fake::<G>))
        .route("/sessions/{id}/fake/select", post(kiosk_fake_select::<G>))
        .route("/sessions/{id}/finish", post(kiosk_finish::<G>))
        .route("/sessions/{id}/activate", post(device_activate::<G>))
        .route("/sessions/{id}/cast", post(device_cast::<G>))
        .route("/ledger", get(ledger_summary::<G>))
        .route("/ledger/audit", get(ledger_audit::<G>))
        .route("/ledger/entries", get(ledger_entries::<G>))
        .route("/ledger/registrations/{v_id}", get(ledger_registration::<G>))
        .route("/ledger/envelopes/{hash}", get(ledger_envelope::<G>))
        .route("/ledger/mailbox/{v_id}", get(ledger_mailbox::<G>))
        .route("/scenarios", post(scenario::<G>))
        .with_state(service)
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    group: trip_core::GroupId,
    ledger_entries: u64,
}

async fn health<G: Group>(State(svc): Svc<G>) -> Json<Health> {
    Json(Health { status: "ok", group: G::ID, ledger_entries: svc.ledger().len() })
}

// ---- sessions

#[derive(Deserialize)]
struct OpenSession {
    role: SessionRole,
    #[serde(default)]
    kiosk: usize,
    v_id: Option<String>,
}

#[derive(Serialize)]
struct SessionOpened {
    session: String,
    role: SessionRole,
    expires_at: u64,
}

async fn open_session<G: Group>(State(svc): Svc<G>, Body(req): Body<OpenSession>) -> Reply<SessionOpened> {
    let state = match req.role {
        SessionRole::Official => SessionState::Official,
        SessionRole::VoterAtKiosk => {
            if req.kiosk >= svc.election.kiosks.len() {
                return Err(ApiError::not_found("unknown-kiosk", format!("no kiosk {}", req.kiosk)));
            }
            let mut config = svc.election.kiosk_config(req.kiosk)?;
            config.t_delta = svc.config.t_delta;
            SessionState::Kiosk(Box::new(KioskSession::new(config)))
        }
        SessionRole::VoterDevice => {
            let v_id = req.v_id.ok_or_else(|| ApiError::bad_request("missing-field", "device sessions need v_id"))?;
            SessionState::Device(VoterDevice::new(v_id))
        }
    };
    let (session, expires_at) = svc.open_session(state);
    Ok(Json(SessionOpened { session, role: req.role, expires_at }))
}

#[derive(Serialize)]
struct SessionInfo {
    role: SessionRole,
    expires_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase: Option<Phase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log: Option<Vec<SessionEvent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    credentials: Option<Vec<String>>,
}

async fn session_info<G: Group>(State(svc): Svc<G>, Path(id): Path<String>) -> Reply<SessionInfo> {
    let (mut info, expires_at) = svc.with_session(&id, None, |state, _| {
        Ok(match state {
            SessionState::Official => {
                SessionInfo { role: SessionRole::Official, expires_at: 0, phase: None, log: None, credentials: None }
            }
            SessionState::Kiosk(k) => SessionInfo {
                role: SessionRole::VoterAtKiosk,
                expires_at: 0,
                phase: Some(k.phase()),
                log: Some(k.log().to_vec()),
                credentials: None,
            },
            SessionState::Device(d) => SessionInfo {
                role: SessionRole::VoterDevice,
                expires_at: 0,
                phase: None,
                log: None,
                credentials: Some(d.credentials.iter().map(|c| element::<G>(&c.public)).collect()),
            },
        })
    })?;
    info.expires_at = expires_at;
    Ok(Json(info))
}

async fn close_session<G: Group>(State(svc): Svc<G>, Path(id): Path<String>) -> Reply<Value> {
    if svc.close_session(&id) {
        Ok(Json(serde_json::json!({ "closed": id })))
    } else {
        Err(ApiError::not_found("unknown-session", "no such session"))
    }
}

// ---- official

fn official<G: Group>(svc: &Service<G>) -> &SigningKeypair<G> {
    &svc.election.officials[0]
}

#[derive(Deserialize)]
struct CheckinRequest {
    v_id: String,
}

#[derive(Serialize)]
struct TicketIssued {
    ticket: String,
    d: u64,
}

async fn checkin_ticket<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<CheckinRequest>,
) -> Reply<TicketIssued> {
    let (ticket, _) = svc.with_session(&id, Some(SessionRole::Official), |_, _| {
        Ok(checkin_issue(official(&svc), &req.v_id, svc.clock.as_ref(), svc.ledger())?)
    })?;
    Ok(Json(TicketIssued { ticket: ticket.to_base64(), d: ticket.d }))
}

#[derive(Deserialize)]
struct EnvelopeBatch {
    count: Option<usize>,
    #[serde(default)]
    printer: usize,
}

#[derive(Serialize)]
struct EnvelopesPrinted {
    envelopes: Vec<String>,
    indices: Vec<u64>,
}

async fn envelopes<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<EnvelopeBatch>,
) -> Reply<EnvelopesPrinted> {
    let count = req.count.unwrap_or(svc.config.envelopes);
    if count == 0 || count > 1_000 {
        return Err(ApiError::bad_request("bad-count", "envelope batches hold 1 to 1000 envelopes"));
    }
    let printer = svc
        .election
        .printers
        .get(req.printer)
        .ok_or_else(|| ApiError::not_found("unknown-printer", format!("no printer {}", req.printer)))?;
    let (printed, _) = svc.with_session(&id, Some(SessionRole::Official), |_, rng| {
        (0..count)
            .map(|_| Ok(envelope_print(printer, DEFAULT_NONCE_LEN, svc.ledger(), rng)?))
            .collect::<Result<Vec<_>, ApiError>>()
    })?;
    Ok(Json(EnvelopesPrinted {
        envelopes: printed.iter().map(|(e, _)| e.to_base64()).collect(),
        indices: printed.iter().map(|(_, i)| *i).collect(),
    }))
}

#[derive(Deserialize)]
struct CheckoutRequest {
    t_ot: String,
}

#[derive(Serialize)]
struct Appended {
    index: u64,
}

async fn checkout<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<CheckoutRequest>,
) -> Reply<Appended> {
    let t_ot: CheckoutTicket<G> = decode(&req.t_ot)?;
    let (index, _) = svc.with_session(&id, Some(SessionRole::Official), |_, _| {
        Ok(checkout_process(official(&svc), &t_ot, svc.ledger())?)
    })?;
    Ok(Json(Appended { index }))
}

#[derive(Deserialize)]
struct OpenEvent {
    id: String,
    options: usize,
    #[serde(default = "last_counts")]
    revote: RevotePolicy,
    #[serde(default)]
    vote_limit: bool,
}

fn last_counts() -> RevotePolicy {
    RevotePolicy::LastCounts
}

async fn open_event<G: Group>(State(svc): Svc<G>, Path(id): Path<String>, Body(req): Body<OpenEvent>) -> Reply<Value> {
    if req.options == 0 {
        return Err(ApiError::bad_request("bad-options", "an event needs at least one option"));
    }
    svc.with_session(&id, Some(SessionRole::Official), |_, _| {
        Ok(trip_tally::open_event(official(&svc), svc.ledger(), &req.id, req.options, req.revote, req.vote_limit)?)
    })?;
    Ok(Json(serde_json::json!({ "event": req.id, "options": req.options })))
}

async fn close_event<G: Group>(State(svc): Svc<G>, Path((id, event)): Path<(String, String)>) -> Reply<Appended> {
    let (index, _) = svc.with_session(&id, Some(SessionRole::Official), |_, _| {
        Ok(trip_tally::close_event(official(&svc), svc.ledger(), &event)?)
    })?;
    Ok(Json(Appended { index }))
}

#[derive(Deserialize, Default)]
struct TallyRequest {
    /// Tallier indices whose shares take part; defaults to the first `t`.
    talliers: Option<Vec<u32>>,
}

async fn tally<G: Group>(
    State(svc): Svc<G>,
    Path((id, event)): Path<(String, String)>,
    Body(req): Body<TallyRequest>,
) -> Reply<Value> {
    let km = &svc.election.key_material;
    let indices = req.talliers.unwrap_or_else(|| (1..=km.public.threshold as u32).collect());
    let shares = km.subset(&indices);
    let ((result, index), _) = svc.with_session(&id, Some(SessionRole::Official), |_, rng| {
        let roll = trip_tally::roll_from_ledger(svc.ledger());
        let result = trip_tally::tally(svc.ledger(), &event, &shares, &roll, rng)?;
        let index = trip_tally::publish(&svc.election.talliers[0], svc.ledger(), &result)?;
        Ok((result, index))
    })?;
    Ok(Json(serde_json::json!({ "index": index, "result": result })))
}

// ---- kiosk

fn kiosk<G: Group>(state: &mut SessionState<G>) -> &mut KioskSession<G> {
    match state {
        SessionState::Kiosk(k) => k,
        _ => unreachable!("role checked by the store"),
    }
}

#[derive(Deserialize)]
struct TicketScan {
    ticket: String,
}

#[derive(Serialize)]
struct PhaseReply {
    phase: Phase,
}

async fn kiosk_ticket<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<TicketScan>,
) -> Reply<PhaseReply> {
    let ticket: CheckInTicket<G> = decode(&req.ticket)?;
    let (phase, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, _| {
        let k = kiosk(state);
        k.checkin_verify(&ticket, svc.clock.as_ref())?;
        Ok(k.phase())
    })?;
    Ok(Json(PhaseReply { phase }))
}

#[derive(Deserialize, Default)]
struct RealRequest {
    /// Candidate commits for the advanced option.
    #[serde(default = "one")]
    candidates: usize,
    /// Standing-vote entity in place of a fresh credential.
    standing: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Serialize)]
struct Commits {
    /// `q1` render data; one entry unless candidates were requested.
    commits: Vec<String>,
    phase: Phase,
}

fn target(standing: Option<usize>) -> Target {
    standing.map_or(Target::Credential, Target::Entity)
}

async fn kiosk_real<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<RealRequest>,
) -> Reply<Commits> {
    if req.candidates == 0 || req.candidates > 64 {
        return Err(ApiError::bad_request("bad-candidates", "candidates must be 1 to 64"));
    }
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, rng| {
        let k = kiosk(state);
        let commits = k.begin(target(req.standing), req.candidates, rng)?;
        Ok(Commits { commits: commits.iter().map(Payload::to_base64).collect(), phase: k.phase() })
    })?;
    Ok(Json(reply))
}

#[derive(Deserialize)]
struct Select {
    index: usize,
}

async fn kiosk_real_select<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<Select>,
) -> Reply<Commits> {
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, _| {
        let k = kiosk(state);
        let q1 = k.select_commit(req.index)?;
        Ok(Commits { commits: vec![q1.to_base64()], phase: k.phase() })
    })?;
    Ok(Json(reply))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleBody {
    pub kind: BundleKind,
    pub q1: String,
    pub t_ot: String,
    pub q2: String,
    pub envelope: String,
}

impl BundleBody {
    pub fn new<G: Group>(b: &ReceiptBundle<G>) -> Self {
        Self {
            kind: b.kind,
            q1: b.q1.to_base64(),
            t_ot: b.t_ot.to_base64(),
            q2: b.q2.to_base64(),
            envelope: b.envelope.to_base64(),
        }
    }
}

#[derive(Serialize)]
struct BundleReply {
    bundle: BundleBody,
    phase: Phase,
}

#[derive(Deserialize)]
struct EnvelopeScan {
    envelope: String,
}

async fn kiosk_envelope<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<EnvelopeScan>,
) -> Reply<BundleReply> {
    let envelope: Envelope<G> = decode(&req.envelope)?;
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, _| {
        let k = kiosk(state);
        let bundle = k.realcred_complete(&envelope)?;
        Ok(BundleReply { bundle: BundleBody::new(&bundle), phase: k.phase() })
    })?;
    Ok(Json(reply))
}

#[derive(Deserialize)]
struct FakeRequest {
    envelope: String,
    standing: Option<usize>,
    #[serde(default = "one")]
    candidates: usize,
}

#[derive(Serialize)]
struct FakeReply {
    commits: Vec<String>,
    /// Printed at once when no choice was asked for.
    #[serde(skip_serializing_if = "Option::is_none")]
    bundle: Option<BundleBody>,
    phase: Phase,
}

async fn kiosk_fake<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<FakeRequest>,
) -> Reply<FakeReply> {
    if req.candidates == 0 || req.candidates > 64 {
        return Err(ApiError::bad_request("bad-candidates", "candidates must be 1 to 64"));
    }
    let envelope: Envelope<G> = decode(&req.envelope)?;
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, rng| {
        let k = kiosk(state);
        let commits = k.fake_candidates(&envelope, target(req.standing), req.candidates, rng)?;
        let bundle = if req.candidates == 1 { Some(BundleBody::new(&k.select_fake(0)?)) } else { None };
        Ok(FakeReply { commits: commits.iter().map(Payload::to_base64).collect(), bundle, phase: k.phase() })
    })?;
    Ok(Json(reply))
}

async fn kiosk_fake_select<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<Select>,
) -> Reply<BundleReply> {
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, _| {
        let k = kiosk(state);
        let bundle = k.select_fake(req.index)?;
        Ok(BundleReply { bundle: BundleBody::new(&bundle), phase: k.phase() })
    })?;
    Ok(Json(reply))
}

async fn kiosk_finish<G: Group>(State(svc): Svc<G>, Path(id): Path<String>) -> Reply<PhaseReply> {
    let (phase, _) = svc.with_session(&id, Some(SessionRole::VoterAtKiosk), |state, _| {
        let k = kiosk(state);
        k.finish()?;
        Ok(k.phase())
    })?;
    Ok(Json(PhaseReply { phase }))
}

// ---- device

fn device<G: Group>(state: &mut SessionState<G>) -> &mut VoterDevice<G> {
    match state {
        SessionState::Device(d) => d,
        _ => unreachable!("role checked by the store"),
    }
}

#[derive(Deserialize)]
struct ActivateRequest {
    q1: String,
    envelope: String,
    q2: String,
    /// Run without the ledger: online checks report unavailable.
    #[serde(default)]
    offline: bool,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Serialize)]
struct CheckLine {
    check: Check,
    name: &'static str,
    status: CheckStatus,
}

#[derive(Serialize)]
pub struct ActivationReply {
    verdict: Verdict,
    checks: Vec<CheckLine>,
    failed: Vec<Check>,
    unavailable: Vec<Check>,
    appended: Vec<u64>,
    /// Index into the device's credential list when one was stored.
    credential: Option<usize>,
}

async fn device_activate<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<ActivateRequest>,
) -> Reply<ActivationReply> {
    let q1: CommitPayload<G> = decode(&req.q1)?;
    let envelope: Envelope<G> = decode(&req.envelope)?;
    let q2: ResponsePayload<G> = decode(&req.q2)?;
    let (reply, _) = svc.with_session(&id, Some(SessionRole::VoterDevice), |state, rng| {
        let d = device(state);
        let ledger = svc.ledger();
        let election_key = svc.election.key_material.public.key;
        let entities = ledger.entities();
        let view = if req.offline {
            LedgerView::Offline { election_key, entities: &entities }
        } else {
            LedgerView::Online(ledger)
        };
        let mode = if req.dry_run { Mode::DryRun } else { Mode::Commit };
        let result = activate(&d.v_id, &q1, &envelope, &q2, &view, mode, rng)?;
        let credential = result.credential.clone().map(|c| {
            d.credentials.push(c);
            d.credentials.len() - 1
        });
        Ok(ActivationReply {
            verdict: result.verdict,
            checks: result
                .checks
                .iter()
                .map(|&(check, status)| CheckLine { check, name: check.name(), status })
                .collect(),
            failed: result.failed,
            unavailable: result.unavailable,
            appended: result.appended,
            credential,
        })
    })?;
    Ok(Json(reply))
}

#[derive(Deserialize)]
struct CastRequest {
    event: String,
    option: usize,
    #[serde(default)]
    credential: usize,
}

async fn device_cast<G: Group>(
    State(svc): Svc<G>,
    Path(id): Path<String>,
    Body(req): Body<CastRequest>,
) -> Reply<Appended> {
    let (index, _) = svc.with_session(&id, Some(SessionRole::VoterDevice), |state, rng| {
        let d = device(state);
        let cred = d
            .credentials
            .get(req.credential)
            .ok_or_else(|| ApiError::not_found("unknown-credential", format!("no credential {}", req.credential)))?;
        let secret = cred.secret.ok_or_else(|| {
            ApiError::bad_request("standing-credential", "standing-vote credentials are cast by their entity")
        })?;
        let event = svc
            .ledger()
            .voting_event(&req.event)
            .ok_or_else(|| ApiError::not_found("unknown-event", format!("no event {}", req.event)))?;
        let key = svc.election.key_material.public.key;
        let entry = trip_tally::cast_ballot(&SigningKeypair::from_secret(secret), req.option, &event, &key, rng)?;
        Ok(trip_tally::ballot_accept(svc.ledger(), entry)?)
    })?;
    Ok(Json(Appended { index }))
}

// ---- ledger queries

#[derive(Serialize)]
struct LedgerSummary {
    entries: u64,
    counts: BTreeMap<EntryKind, u64>,
}

async fn ledger_summary<G: Group>(State(svc): Svc<G>) -> Json<LedgerSummary> {
    let mut counts = BTreeMap::new();
    for e in svc.ledger().entries() {
        *counts.entry(e.kind()).or_insert(0) += 1;
    }
    Json(LedgerSummary { entries: svc.ledger().len(), counts })
}

async fn ledger_audit<G: Group>(State(svc): Svc<G>) -> Reply<Value> {
    match svc.ledger().audit() {
        Ok(report) => Ok(Json(serde_json::json!({ "ok": true, "entries": report.entries, "counts": report.counts }))),
        Err(f) => Ok(Json(serde_json::json!({ "ok": false, "index": f.index, "fault": f.to_string() }))),
    }
}

#[derive(Deserialize)]
struct EntriesQuery {
    kind: Option<EntryKind>,
    #[serde(default)]
    from: u64,
    limit: Option<usize>,
}

#[derive(Serialize)]
struct EntryLine {
    index: u64,
    kind: EntryKind,
    author: String,
    entry: String,
}

async fn ledger_entries<G: Group>(State(svc): Svc<G>, Query(q): Query<EntriesQuery>) -> Json<Vec<EntryLine>> {
    let entries = match q.kind {
        Some(kind) => svc.ledger().entries_of(kind),
        None => svc.ledger().entries(),
    };
    Json(
        entries
            .into_iter()
            .filter(|e| e.index >= q.from)
            .take(q.limit.unwrap_or(500).min(5_000))
            .map(|e| EntryLine {
                index: e.index,
                kind: e.kind(),
                author: element::<G>(e.author()),
                entry: b64(&e.entry.to_bytes()),
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct RegistrationLine {
    index: u64,
    v_id: String,
    d: u64,
    v_e: String,
    kiosk: String,
}

async fn ledger_registration<G: Group>(State(svc): Svc<G>, Path(v_id): Path<String>) -> Reply<RegistrationLine> {
    let entry = svc
        .ledger()
        .registrations(&v_id)
        .pop()
        .ok_or_else(|| ApiError::not_found("no-registration", format!("no registration for {v_id}")))?;
    let r = entry.registration().expect("registration lookup returns sessions");
    Ok(Json(RegistrationLine {
        index: entry.index,
        v_id: r.v_id.clone(),
        d: r.d,
        v_e: b64(&r.v_e.to_bytes()),
        kiosk: element::<G>(&r.kiosk),
    }))
}

#[derive(Serialize)]
struct EnvelopeStatus {
    issued: Option<u64>,
    consumed: Option<u64>,
}

async fn ledger_envelope<G: Group>(State(svc): Svc<G>, Path(hash): Path<String>) -> Reply<EnvelopeStatus> {
    let digest: trip_core::Digest = hex::decode(&hash)
        .ok()
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| ApiError::bad_request("malformed", "envelope hash is 32 bytes of hex"))?;
    Ok(Json(EnvelopeStatus {
        issued: svc.ledger().envelope(&digest).map(|e| e.index),
        consumed: svc.ledger().consumption(&digest).map(|e| e.index),
    }))
}

#[derive(Serialize)]
struct NotificationLine {
    index: u64,
    d: u64,
    v_e: String,
}

async fn ledger_mailbox<G: Group>(State(svc): Svc<G>, Path(v_id): Path<String>) -> Json<Vec<NotificationLine>> {
    Json(
        svc.ledger()
            .mailbox()
            .for_voter(&v_id)
            .into_iter()
            .map(|n| NotificationLine { index: n.index, d: n.d, v_e: b64(&n.v_e) })
            .collect(),
    )
}

// ---- scenarios

async fn scenario<G: Group>(State(svc): Svc<G>, Body(config): Body<ScenarioConfig>) -> Reply<Value> {
    if config.trials > svc.config.max_trials {
        return Err(ApiError::bad_request("too-many-trials", format!("at most {} trials", svc.config.max_trials)));
    }
    let report = tokio::task::spawn_blocking(move || trip_sim::run_scenario(&config)).await.map_err(|e| {
        ApiError::new(axum::http::StatusCode::INTERNAL_SERVER_ERROR, "scenario-panicked", e.to_string())
    })??;
    Ok(Json(serde_json::json!({ "text": report.to_text(), "report": report })))
}
