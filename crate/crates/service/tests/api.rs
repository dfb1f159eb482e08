use std::sync::Arc;

use axum::{
    body::Body,
    http::{Method, Request, StatusCode},
    Router,
};
use http_body_util::BodyExt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use tower::ServiceExt;
use trip_core::{Ristretto, TestGroup};
use trip_ledger::Ledger;
use trip_protocol::{setup_election, ElectionConfig, ManualClock, Payload};
use trip_service::{load_election, router, Service, ServiceConfig};

const START: u64 = 1_700_000_000;

struct App {
    router: Router,
    clock: Arc<ManualClock>,
}

impl App {
    fn new(voters: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let election =
            setup_election::<Ristretto, _>(&ElectionConfig::small(voters), Ledger::in_memory(), &mut rng).unwrap();
        let clock = Arc::new(ManualClock::new(START));
        let svc = Service::new(election, ServiceConfig::default(), clock.clone(), Some(2));
        Self { router: router(Arc::new(svc)), clock }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, value)
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body)).await
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    async fn ok(&self, uri: &str, body: Value) -> Value {
        let (status, value) = self.post(uri, body).await;
        assert_eq!(status, StatusCode::OK, "{uri}: {value}");
        value
    }

    async fn session(&self, body: Value) -> String {
        self.ok("/sessions", body).await["session"].as_str().unwrap().to_owned()
    }
}

fn s(v: &Value) -> String {
    v.as_str().unwrap().to_owned()
}

/// Walks one voter through the booth and returns the real and one fake bundle.
async fn visit(app: &App, v_id: &str) -> (String, Value, Value) {
    let official = app.session(json!({ "role": "official" })).await;
    let ticket = app.ok(&format!("/sessions/{official}/checkin-ticket"), json!({ "v_id": v_id })).await;
    let envelopes = app.ok(&format!("/sessions/{official}/envelopes"), json!({ "count": 2 })).await;
    let kiosk = app.session(json!({ "role": "voter-at-kiosk" })).await;
    let phase = app.ok(&format!("/sessions/{kiosk}/ticket"), json!({ "ticket": ticket["ticket"] })).await;
    assert_eq!(phase["phase"], "checked-in");
    let commits = app.ok(&format!("/sessions/{kiosk}/real"), json!({})).await;
    assert_eq!(commits["commits"].as_array().unwrap().len(), 1);
    let real = app.ok(&format!("/sessions/{kiosk}/envelope"), json!({ "envelope": envelopes["envelopes"][0] })).await;
    let fake = app.ok(&format!("/sessions/{kiosk}/fake"), json!({ "envelope": envelopes["envelopes"][1] })).await;
    app.ok(&format!("/sessions/{kiosk}/finish"), json!({})).await;
    let index = app.ok(&format!("/sessions/{official}/checkout"), json!({ "t_ot": real["bundle"]["t_ot"] })).await;
    assert!(index["index"].as_u64().unwrap() > 0);
    (official, real["bundle"].clone(), fake["bundle"].clone())
}

async fn activate(app: &App, device: &str, bundle: &Value) -> Value {
    app.ok(
        &format!("/sessions/{device}/activate"),
        json!({ "q1": bundle["q1"], "envelope": bundle["envelope"], "q2": bundle["q2"] }),
    )
    .await
}

#[tokio::test]
async fn full_ceremony_activates_and_votes() {
    let app = App::new(2);
    let (official, real, fake) = visit(&app, "v0").await;
    assert_eq!(real["kind"], "real");
    assert_eq!(fake["kind"], "fake");

    let device = app.session(json!({ "role": "voter-device", "v_id": "v0" })).await;
    let a = activate(&app, &device, &real).await;
    assert_eq!(a["verdict"], "pass", "{a}");
    assert!(a["failed"].as_array().unwrap().is_empty());
    assert_eq!(a["credential"], 0);
    let f = activate(&app, &device, &fake).await;
    // a fake is indistinguishable at activation
    assert_eq!(f["verdict"], "pass", "{f}");
    assert_eq!(f["credential"], 1);

    let (_, mailbox) = app.get("/ledger/mailbox/v0").await;
    assert_eq!(mailbox.as_array().unwrap().len(), 1);
    let (status, reg) = app.get("/ledger/registrations/v0").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(reg["v_id"], "v0");

    app.ok(&format!("/sessions/{official}/events"), json!({ "id": "e1", "options": 3 })).await;
    app.ok(&format!("/sessions/{device}/cast"), json!({ "event": "e1", "option": 2, "credential": 0 })).await;
    app.ok(&format!("/sessions/{device}/cast"), json!({ "event": "e1", "option": 1, "credential": 1 })).await;
    app.ok(&format!("/sessions/{official}/events/e1/close"), json!({})).await;
    let t = app.ok(&format!("/sessions/{official}/tally/e1"), json!({ "talliers": [1, 3] })).await;
    // only the real credential's ballot counts
    assert_eq!(t["result"]["counts"], json!([0, 0, 1]), "{t}");

    let (_, audit) = app.get("/ledger/audit").await;
    assert_eq!(audit["ok"], true);
    let (_, summary) = app.get("/ledger").await;
    assert_eq!(summary["counts"]["ballot"], 2, "{summary}");
    let (_, ballots) = app.get("/ledger/entries?kind=ballot").await;
    assert_eq!(ballots.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn envelope_before_commit_is_wrong_phase() {
    let app = App::new(1);
    let official = app.session(json!({ "role": "official" })).await;
    let ticket = app.ok(&format!("/sessions/{official}/checkin-ticket"), json!({ "v_id": "v0" })).await;
    let envelopes = app.ok(&format!("/sessions/{official}/envelopes"), json!({ "count": 1 })).await;
    let kiosk = app.session(json!({ "role": "voter-at-kiosk" })).await;
    app.ok(&format!("/sessions/{kiosk}/ticket"), json!({ "ticket": ticket["ticket"] })).await;
    let (status, err) =
        app.post(&format!("/sessions/{kiosk}/envelope"), json!({ "envelope": envelopes["envelopes"][0] })).await;
    assert_eq!(status, StatusCode::CONFLICT, "{err}");
    assert_eq!(err["error"], "wrong-phase");
    let (status, err) =
        app.post(&format!("/sessions/{kiosk}/fake"), json!({ "envelope": envelopes["envelopes"][0] })).await;
    assert_eq!(status, StatusCode::CONFLICT, "{err}");
    assert_eq!(err["error"], "no-real-credential");
}

#[tokio::test]
async fn stale_ticket_is_refused() {
    let app = App::new(1);
    let official = app.session(json!({ "role": "official" })).await;
    let ticket = app.ok(&format!("/sessions/{official}/checkin-ticket"), json!({ "v_id": "v0" })).await;
    app.clock.advance(ServiceConfig::default().t_delta + 1);
    let kiosk = app.session(json!({ "role": "voter-at-kiosk" })).await;
    let (status, err) = app.post(&format!("/sessions/{kiosk}/ticket"), json!({ "ticket": ticket["ticket"] })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{err}");
    assert_eq!(err["error"], "stale-ticket");
}

#[tokio::test]
async fn bad_requests_get_structured_errors() {
    let app = App::new(1);
    let official = app.session(json!({ "role": "official" })).await;
    let (status, err) = app.post(&format!("/sessions/{official}/checkin-ticket"), json!({ "v_id": "nobody" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "unknown-voter");

    let kiosk = app.session(json!({ "role": "voter-at-kiosk" })).await;
    let (status, err) = app.post(&format!("/sessions/{kiosk}/ticket"), json!({ "ticket": "AAAA" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{err}");
    assert_eq!(err["error"], "malformed");

    let (status, err) = app.post(&format!("/sessions/{kiosk}/ticket"), json!({ "nope": 1 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "malformed-body");

    let (status, err) = app.post(&format!("/sessions/{kiosk}/checkin-ticket"), json!({ "v_id": "v0" })).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(err["error"], "wrong-role");

    let (status, err) = app.post("/sessions/feed/finish", json!({})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "unknown-session");

    let (status, err) = app.post("/sessions", json!({ "role": "voter-device" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "missing-field");
}

#[tokio::test]
async fn idle_sessions_expire() {
    let app = App::new(1);
    let kiosk = app.session(json!({ "role": "voter-at-kiosk" })).await;
    let (status, info) = app.get(&format!("/sessions/{kiosk}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(info["phase"], "awaiting-ticket");
    app.clock.advance(ServiceConfig::default().idle_timeout + 1);
    let (status, err) = app.get(&format!("/sessions/{kiosk}")).await;
    assert_eq!(status, StatusCode::GONE);
    assert_eq!(err["error"], "session-expired");
    let (status, _) = app.get(&format!("/sessions/{kiosk}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn closed_sessions_are_gone() {
    let app = App::new(1);
    let official = app.session(json!({ "role": "official" })).await;
    let (status, _) = app.call(Method::DELETE, &format!("/sessions/{official}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = app.call(Method::DELETE, &format!("/sessions/{official}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn offline_activation_reports_unavailable_checks() {
    let app = App::new(1);
    let (_, real, _) = visit(&app, "v0").await;
    let device = app.session(json!({ "role": "voter-device", "v_id": "v0" })).await;
    let a = app
        .ok(
            &format!("/sessions/{device}/activate"),
            json!({ "q1": real["q1"], "envelope": real["envelope"], "q2": real["q2"], "offline": true }),
        )
        .await;
    // offline checks alone pass; the ledger checks are reported as not run
    assert_eq!(a["verdict"], "pass", "{a}");
    assert_eq!(a["unavailable"].as_array().unwrap().len(), 6);
    assert!(a["credential"].is_null());
    assert!(a["appended"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn envelope_status_lookup() {
    let app = App::new(1);
    let (_, real, _) = visit(&app, "v0").await;
    let envelope = trip_protocol::Envelope::<Ristretto>::from_base64(&s(&real["envelope"])).unwrap();
    let hash = hex::encode(envelope.challenge_hash());
    let (_, status) = app.get(&format!("/ledger/envelopes/{hash}")).await;
    assert!(status["issued"].is_u64());
    assert!(status["consumed"].is_null());
    let device = app.session(json!({ "role": "voter-device", "v_id": "v0" })).await;
    activate(&app, &device, &real).await;
    let (_, status) = app.get(&format!("/ledger/envelopes/{hash}")).await;
    assert!(status["consumed"].is_u64());
    let (code, _) = app.get("/ledger/envelopes/zz").await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn scenarios_run_over_http() {
    let app = App::new(1);
    let (status, r) =
        app.post("/scenarios", json!({ "adversary": { "kind": "kiosk-guess" }, "trials": 20, "seed": 3 })).await;
    assert_eq!(status, StatusCode::OK, "{r}");
    assert_eq!(r["report"]["trials"], 20);
    assert!(r["text"].as_str().unwrap().contains("kiosk-guess"));
    let (status, r) =
        app.post("/scenarios", json!({ "adversary": { "kind": "kiosk-guess" }, "trials": 5000, "seed": 3 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(r["error"], "too-many-trials");
}

#[tokio::test]
async fn restart_from_files_keeps_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let ledger_path = dir.path().join("ledger.bin");
    let keys_path = dir.path().join("keys.json");
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let election =
        setup_election::<TestGroup, _>(&ElectionConfig::small(2), Ledger::open(&ledger_path).unwrap(), &mut rng)
            .unwrap();
    std::fs::write(&keys_path, serde_json::to_vec(&election.secrets()).unwrap()).unwrap();
    drop(election);

    let clock = Arc::new(ManualClock::new(START));
    let config = ServiceConfig {
        ledger: Some(ledger_path.clone()),
        keys: Some(keys_path.clone()),
        group: trip_core::GroupId::TestModP,
        ..ServiceConfig::default()
    };
    let svc =
        Service::<TestGroup>::new(load_election(&ledger_path, &keys_path).unwrap(), config, clock.clone(), Some(4));
    let app = App { router: router(Arc::new(svc)), clock: clock.clone() };
    let official = app.session(json!({ "role": "official" })).await;
    app.ok(&format!("/sessions/{official}/envelopes"), json!({ "count": 3 })).await;
    let (_, before) = app.get("/ledger").await;
    drop(app);

    let reloaded = load_election::<TestGroup>(&ledger_path, &keys_path).unwrap();
    let svc = Service::new(reloaded, ServiceConfig::default(), clock.clone(), Some(4));
    let app = App { router: router(Arc::new(svc)), clock };
    let (_, after) = app.get("/ledger").await;
    assert_eq!(before, after);
    assert_eq!(after["counts"]["envelope-issued"], 3, "{after}");
    let (_, audit) = app.get("/ledger/audit").await;
    assert_eq!(audit["ok"], true);
}
