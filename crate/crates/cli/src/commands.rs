use std::{
    fs,
    io::Write,
    path::Path,
    time::{Instant, SystemTime, UNIX_EPOCH},
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};
use trip_core::{with_group, Group, GroupId, Ristretto, SigningKeypair};
use trip_ledger::{audit, genesis_group, Ledger};
use trip_protocol::{
    activate,
    ceremony::{replay, replay_in, replay_visits, CeremonyScript, Transcript},
    officials::{envelope_print, DEFAULT_NONCE_LEN},
    setup_election, ActivationResult, CheckStatus, CommitPayload, Election, ElectionConfig, Envelope, LedgerView, Mode,
    Payload, ProtocolError, ResponsePayload, Verdict,
};
use trip_service::{load_election, ServiceConfig};
use trip_sim::{Adversary, ScenarioConfig};

use crate::{
    parse_roll, CastArgs, CliConfig, CliError, EnvelopeArgs, EventCommand, Format, ReplayArgs, ScenarioArgs, ServeArgs,
    SetupArgs, Status, TallyArgs, VerifyArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json { path: path.display().to_string(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Key files hold every authority secret, so they are owner-only.
fn write_secret(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut options = fs::OpenOptions::new();
    options.write(true).create_new(true);
    #[cfg(unix)]
    std::os::unix::fs::OpenOptionsExt::mode(&mut options, 0o600);
    let mut file = options.open(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(path, e))
}

fn emit(c: &CliConfig, out: &mut dyn Write, text: &str, value: &Value) -> Result<()> {
    let rendered = match c.format {
        Format::Text => text.to_owned(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(value).expect("json values serialize")),
    };
    out.write_all(rendered.as_bytes()).map_err(|e| CliError::io(Path::new("stdout"), e))
}

fn rng(c: &CliConfig) -> ChaCha20Rng {
    c.seed.map_or_else(ChaCha20Rng::from_entropy, ChaCha20Rng::seed_from_u64)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn element<G: Group>(e: &G::Element) -> String {
    hex::encode(G::encode_element(e))
}

/// Group profile recorded in the ledger's genesis entry.
fn ledger_group(c: &CliConfig) -> Result<GroupId> {
    let bytes = fs::read(&c.ledger).map_err(|e| CliError::io(&c.ledger, e))?;
    genesis_group(&bytes).ok_or_else(|| CliError::Usage(format!("{}: no readable genesis entry", c.ledger.display())))
}

fn load<G: Group>(c: &CliConfig) -> Result<Election<G>> {
    Ok(load_election::<G>(&c.ledger, &c.keys)?)
}

fn refuse_existing(path: &Path) -> Result<()> {
    if fs::metadata(path).is_ok_and(|m| m.len() > 0) {
        return Err(CliError::Usage(format!("{} already exists", path.display())));
    }
    Ok(())
}

// ---- setup

pub fn setup(c: &CliConfig, a: &SetupArgs, out: &mut dyn Write) -> Result<Status> {
    refuse_existing(&c.ledger)?;
    refuse_existing(&c.keys)?;
    let config = ElectionConfig {
        officials: a.officials,
        kiosks: a.kiosks,
        printers: a.printers,
        talliers: a.talliers,
        threshold: a.threshold,
        roll: parse_roll(&read(&a.roll)?)?,
        entities: a.entities.clone(),
    };
    let result = with_group!(a.group, G => setup_in::<G>(c, &config, out));
    if result.is_err() {
        let _ = fs::remove_file(&c.ledger);
    }
    result
}

fn setup_in<G: Group>(c: &CliConfig, config: &ElectionConfig, out: &mut dyn Write) -> Result<Status> {
    let election = setup_election::<G, _>(config, Ledger::open(&c.ledger)?, &mut rng(c))?;
    let secrets = serde_json::to_vec_pretty(&election.secrets()).expect("key file serializes");
    write_secret(&c.keys, &secrets)?;
    let key = element::<G>(&election.key_material.public.key);
    let mut text = format!(
        "ledger: {} ({} entries)\nkeys: {}\ngroup: {}\nroll: {} voters\n\
         officials: {}  kiosks: {}  printers: {}  talliers: {}  threshold: {}\nentities: {}\nelection key: {key}\n",
        c.ledger.display(),
        election.ledger.len(),
        c.keys.display(),
        G::ID,
        config.roll.len(),
        config.officials,
        config.kiosks,
        config.printers,
        config.talliers,
        config.threshold,
        config.entities.len(),
    );
    let mut value = json!({
        "ledger": c.ledger, "keys": c.keys, "group": G::ID, "entries": election.ledger.len(),
        "voters": config.roll.len(), "election_key": key,
    });
    if !c.no_timestamps {
        let now = unix_now();
        text.push_str(&format!("created: {now}\n"));
        value["created"] = json!(now);
    }
    emit(c, out, &text, &value)?;
    Ok(Status::Ok)
}

// ---- envelopes

pub fn envelope_batch(c: &CliConfig, a: &EnvelopeArgs, out: &mut dyn Write) -> Result<Status> {
    with_group!(ledger_group(c)?, G => envelope_batch_in::<G>(c, a, out))
}

fn envelope_batch_in<G: Group>(c: &CliConfig, a: &EnvelopeArgs, out: &mut dyn Write) -> Result<Status> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let election = load::<G>(c)?;
    let printer = election
        .printers
        .get(a.printer)
        .ok_or_else(|| CliError::Usage(format!("no printer {} in the key file", a.printer)))?;
    let mut rng = rng(c);
    let mut printed = Vec::with_capacity(a.count);
    for _ in 0..a.count {
        printed.push(envelope_print(printer, DEFAULT_NONCE_LEN, &election.ledger, &mut rng)?);
    }
    let lines: Vec<Value> = printed
        .iter()
        .map(|(e, i)| json!({ "index": i, "hash": hex::encode(e.challenge_hash()), "envelope": e.to_base64() }))
        .collect();
    let mut text = String::new();
    match &a.out {
        Some(path) => {
            let list: Vec<String> = printed.iter().map(|(e, _)| e.to_base64()).collect();
            write_file(path, &serde_json::to_vec_pretty(&list).expect("strings serialize"))?;
            text.push_str(&format!("{} envelopes written to {}\n", a.count, path.display()));
        }
        None => {
            for (e, i) in &printed {
                text.push_str(&format!("{i} {} {}\n", hex::encode(e.challenge_hash()), e.to_base64()));
            }
        }
    }
    emit(c, out, &text, &Value::Array(lines))?;
    Ok(Status::Ok)
}

// ---- serve

pub fn serve(c: &CliConfig, a: &ServeArgs) -> Result<Status> {
    let mut config = ServiceConfig::load(a.config.as_deref())?;
    config.ledger.get_or_insert_with(|| c.ledger.clone());
    config.keys.get_or_insert_with(|| c.keys.clone());
    if let Some(bind) = &a.bind {
        config.bind = bind.clone();
    }
    if let Some(port) = a.port {
        config.port = port;
    }
    config.group = ledger_group(&CliConfig { ledger: config.ledger.clone().expect("set above"), ..c.clone() })?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io(Path::new("runtime"), e))?;
    eprintln!("listening on {}:{}", config.bind, config.port);
    runtime.block_on(trip_service::serve(config))?;
    Ok(Status::Ok)
}

// ---- ceremony replay

pub fn ceremony_replay(c: &CliConfig, a: &ReplayArgs, out: &mut dyn Write) -> Result<Status> {
    let script: CeremonyScript = read_json(&a.fixture)?;
    let transcript = if a.persist {
        refuse_existing(&c.ledger)?;
        refuse_existing(&c.keys)?;
        with_group!(script.group, G => {
            let (t, election) = replay_in::<G>(&script, Ledger::open(&c.ledger)?)?;
            write_secret(&c.keys, &serde_json::to_vec_pretty(&election.secrets()).expect("key file serializes"))?;
            t
        })
    } else if a.existing {
        let group = ledger_group(c)?;
        if group != script.group {
            return Err(CliError::Usage(format!("fixture is for {} but the ledger is {group}", script.group)));
        }
        with_group!(group, G => {
            let election = load::<G>(c)?;
            replay_visits(&election, &script, &mut ChaCha20Rng::seed_from_u64(script.seed))?
        })
    } else {
        replay(&script)?
    };
    let json = serde_json::to_string_pretty(&transcript).expect("transcripts serialize");
    let bundles: usize = transcript.visits.iter().map(|v| v.bundles.len()).sum();
    let summary = format!(
        "visits: {}  bundles: {bundles}  failed activations: {}\nledger: {} entries, digest {}\n",
        transcript.visits.len(),
        transcript.failures(),
        transcript.ledger_entries,
        transcript.ledger_digest
    );
    match &a.out {
        Some(path) => {
            write_file(path, format!("{json}\n").as_bytes())?;
            emit(c, out, &summary, &serde_json::to_value(&transcript).expect("transcripts serialize"))?;
        }
        None => out.write_all(format!("{json}\n").as_bytes()).map_err(|e| CliError::io(Path::new("stdout"), e))?,
    }
    Ok(if transcript.failures() == 0 { Status::Ok } else { Status::VerificationFailed })
}

// ---- verify credential

#[derive(Deserialize)]
struct BundleInput {
    q1: String,
    envelope: String,
    q2: String,
    v_id: Option<String>,
}

/// What `cast` needs from an activated credential.
#[derive(Serialize, Deserialize)]
struct CredentialFile {
    group: GroupId,
    v_id: String,
    public: String,
    /// Absent for standing-vote credentials.
    secret: Option<String>,
}

pub fn verify_credential(c: &CliConfig, a: &VerifyArgs, out: &mut dyn Write) -> Result<Status> {
    let value: Value = read_json(&a.bundle)?;
    let bad = |e: serde_json::Error| CliError::Json { path: a.bundle.display().to_string(), source: e };
    let input = if value.get("visits").is_some() {
        let t: Transcript = serde_json::from_value(value).map_err(bad)?;
        let visit = t.visits.get(a.visit).ok_or_else(|| CliError::Usage(format!("no visit {}", a.visit)))?;
        let b = visit.bundles.get(a.index).ok_or_else(|| CliError::Usage(format!("no bundle {}", a.index)))?;
        BundleInput { q1: b.q1.clone(), envelope: b.envelope.clone(), q2: b.q2.clone(), v_id: Some(visit.v_id.clone()) }
    } else {
        serde_json::from_value(value).map_err(bad)?
    };
    let v_id =
        a.v_id.clone().or(input.v_id.clone()).ok_or_else(|| CliError::Usage("bare bundles need --v-id".into()))?;
    with_group!(ledger_group(c)?, G => verify_in::<G>(c, a, &v_id, &input, out))
}

fn check_lines<G: Group>(result: &ActivationResult<G>) -> (String, Vec<Value>) {
    let mut text = String::new();
    let mut list = Vec::new();
    for (check, status) in &result.checks {
        let label = match status {
            CheckStatus::Passed => "passed",
            CheckStatus::Failed => "FAILED",
            CheckStatus::Unavailable => "n/a",
        };
        text.push_str(&format!("  {label:<7}{}\n", check.name()));
        list.push(json!({ "check": check, "status": status }));
    }
    (text, list)
}

fn verify_in<G: Group>(
    c: &CliConfig,
    a: &VerifyArgs,
    v_id: &str,
    input: &BundleInput,
    out: &mut dyn Write,
) -> Result<Status> {
    let q1 = CommitPayload::<G>::from_base64(&input.q1).map_err(ProtocolError::from)?;
    let envelope = Envelope::<G>::from_base64(&input.envelope).map_err(ProtocolError::from)?;
    let q2 = ResponsePayload::<G>::from_base64(&input.q2).map_err(ProtocolError::from)?;
    let ledger = Ledger::<G>::open(&c.ledger)?;
    let election_key = ledger.election_key().ok_or(ProtocolError::NoElectionKey)?.key;
    let entities = ledger.entities();
    let mut rng = rng(c);
    let offline_view = LedgerView::Offline { election_key, entities: &entities };
    let offline = activate(v_id, &q1, &envelope, &q2, &offline_view, Mode::DryRun, &mut rng)?;
    let mode = if a.commit { Mode::Commit } else { Mode::DryRun };
    let online = activate(v_id, &q1, &envelope, &q2, &LedgerView::Online(&ledger), mode, &mut rng)?;
    let pass = offline.failed.is_empty() && online.verdict == Verdict::Pass;

    let (offline_text, offline_list) = check_lines(&offline);
    let (online_text, online_list) = check_lines(&online);
    let verdict = if pass { "pass" } else { "fail" };
    let mut text = format!("voter: {v_id}\noffline checks:\n{offline_text}online checks:\n{online_text}");
    if a.commit && pass {
        text.push_str(&format!("recorded at: {:?}\n", online.appended));
    }
    text.push_str(&format!("verdict: {verdict}\n"));
    let value = json!({
        "v_id": v_id, "verdict": verdict, "offline": offline_list, "online": online_list,
        "appended": online.appended,
    });
    if let (Some(path), Some(cred), true) = (&a.save_credential, &online.credential, pass) {
        let file = CredentialFile {
            group: G::ID,
            v_id: v_id.to_owned(),
            public: element::<G>(&cred.public),
            secret: cred.secret.as_ref().map(|s| hex::encode(G::encode_scalar(s))),
        };
        write_secret(path, &serde_json::to_vec_pretty(&file).expect("credential serializes"))?;
    }
    emit(c, out, &text, &value)?;
    Ok(if pass { Status::Ok } else { Status::VerificationFailed })
}

// ---- events, ballots, tally

pub fn event(c: &CliConfig, e: &EventCommand, out: &mut dyn Write) -> Result<Status> {
    with_group!(ledger_group(c)?, G => event_in::<G>(c, e, out))
}

fn event_in<G: Group>(c: &CliConfig, e: &EventCommand, out: &mut dyn Write) -> Result<Status> {
    let election = load::<G>(c)?;
    let official = &election.officials[0];
    match e {
        EventCommand::Open { id, options, revote, vote_limit } => {
            if *options == 0 {
                return Err(CliError::Usage("--options must be positive".into()));
            }
            trip_tally::open_event(official, &election.ledger, id, *options, (*revote).into(), *vote_limit)?;
            let text = format!("event {id} open with {options} options\n");
            emit(c, out, &text, &json!({ "event": id, "options": options, "status": "open" }))?;
        }
        EventCommand::Close { id } => {
            let index = trip_tally::close_event(official, &election.ledger, id)?;
            emit(c, out, &format!("event {id} closed at entry {index}\n"), &json!({ "event": id, "index": index }))?;
        }
    }
    Ok(Status::Ok)
}

pub fn cast(c: &CliConfig, a: &CastArgs, out: &mut dyn Write) -> Result<Status> {
    let cred: CredentialFile = read_json(&a.credential)?;
    let group = ledger_group(c)?;
    if group != cred.group {
        return Err(CliError::Usage(format!("credential is for {} but the ledger is {group}", cred.group)));
    }
    with_group!(group, G => cast_in::<G>(c, a, &cred, out))
}

fn cast_in<G: Group>(c: &CliConfig, a: &CastArgs, cred: &CredentialFile, out: &mut dyn Write) -> Result<Status> {
    let secret = cred
        .secret
        .as_ref()
        .ok_or_else(|| CliError::Usage("standing-vote credentials are cast by their entity".into()))?;
    let secret = hex::decode(secret)
        .ok()
        .and_then(|b| G::decode_scalar(&b))
        .ok_or_else(|| CliError::Usage(format!("{}: bad credential secret", a.credential.display())))?;
    let ledger = Ledger::<G>::open(&c.ledger)?;
    let event = ledger.voting_event(&a.event).ok_or_else(|| trip_tally::TallyError::UnknownEvent(a.event.clone()))?;
    let key = ledger.election_key().ok_or(trip_tally::TallyError::NoElectionKey)?.key;
    let entry =
        trip_tally::cast_ballot(&SigningKeypair::<G>::from_secret(secret), a.option, &event, &key, &mut rng(c))?;
    let index = trip_tally::ballot_accept(&ledger, entry)?;
    emit(c, out, &format!("ballot recorded at entry {index}\n"), &json!({ "index": index }))?;
    Ok(Status::Ok)
}

pub fn tally(c: &CliConfig, a: &TallyArgs, out: &mut dyn Write) -> Result<Status> {
    with_group!(ledger_group(c)?, G => tally_in::<G>(c, a, out))
}

fn tally_in<G: Group>(c: &CliConfig, a: &TallyArgs, out: &mut dyn Write) -> Result<Status> {
    let election = load::<G>(c)?;
    let km = &election.key_material;
    let indices = if a.talliers.is_empty() { (1..=km.public.threshold as u32).collect() } else { a.talliers.clone() };
    let shares = km.subset(&indices);
    if shares.len() != indices.len() {
        return Err(CliError::Usage("a requested tallier share is not in the key file".into()));
    }
    let roll = trip_tally::roll_from_ledger(&election.ledger);
    let result = trip_tally::tally(&election.ledger, &a.event, &shares, &roll, &mut rng(c))?;
    let index = trip_tally::publish(&election.talliers[0], &election.ledger, &result)?;
    let mut text = format!("event: {}\n", result.event);
    for (j, n) in result.counts.iter().enumerate() {
        text.push_str(&format!("  option {j}: {n}\n"));
    }
    text.push_str(&format!(
        "ballots on ledger: {}  discarded before mix: {}  mixed: {}  discarded after mix: {}\nroll: {}  PET evaluations: {}\nartifact: entry {index}\n",
        result.ballots_on_ledger,
        result.discarded_before_mix.len(),
        result.mixed,
        result.discarded_after_mix.len(),
        result.roll_size,
        result.pet_evaluations,
    ));
    emit(c, out, &text, &json!({ "artifact": index, "result": result }))?;
    Ok(Status::Ok)
}

// ---- scenarios

fn adversary(a: &ScenarioArgs, kind: &str) -> Result<Adversary> {
    Ok(match kind {
        "none" => Adversary::None,
        "impersonation" => Adversary::Impersonation,
        "kiosk-guess" => Adversary::KioskGuess,
        "envelope-replacement" => Adversary::EnvelopeReplacement { fake_fraction: a.fake_fraction.unwrap_or(0.5) },
        "fake-only" => Adversary::FakeOnly,
        "credential-theft" => Adversary::CredentialTheft,
        "checkout-swap" => Adversary::CheckoutSwap,
        "coercer-distinguisher" => {
            Adversary::CoercerDistinguisher { activation: a.activation.map(Into::into).unwrap_or_default() }
        }
        "visual-fiat-shamir" => Adversary::VisualFiatShamir {
            advanced: a.advanced,
            buckets: a.buckets.unwrap_or(4),
            candidates: a.candidates.unwrap_or(16),
        },
        "side-channel" => Adversary::SideChannel,
        other => return Err(CliError::Usage(format!("unknown scenario {other}"))),
    })
}

pub fn scenario(c: &CliConfig, a: &ScenarioArgs, out: &mut dyn Write) -> Result<Status> {
    let config = match (&a.config, &a.kind) {
        (Some(path), _) => read_json::<ScenarioConfig>(path)?,
        (None, Some(kind)) => ScenarioConfig {
            voters: a.voters,
            envelopes: a.envelopes,
            group: a.group,
            ..ScenarioConfig::new(adversary(a, kind)?, a.trials, c.seed.unwrap_or(0))
        },
        (None, None) => return Err(CliError::Usage("name a scenario or pass --config".into())),
    };
    let start = Instant::now();
    let report = trip_sim::run_scenario(&config)?;
    let elapsed = start.elapsed();
    let mut text = report.to_text();
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    if !c.no_timestamps {
        text.push_str(&format!("elapsed: {:.2}s\n", elapsed.as_secs_f64()));
        value["elapsed_secs"] = json!(elapsed.as_secs_f64());
    }
    emit(c, out, &text, &value)?;
    Ok(if report.violations.is_empty() { Status::Ok } else { Status::VerificationFailed })
}

// ---- ledger

pub fn ledger_audit(c: &CliConfig, out: &mut dyn Write) -> Result<Status> {
    let bytes = fs::read(&c.ledger).map_err(|e| CliError::io(&c.ledger, e))?;
    // an unreadable genesis fails at entry 0 whichever group is tried
    let outcome = match genesis_group(&bytes) {
        Some(group) => with_group!(group, G => audit::<G>(&bytes)),
        None => audit::<Ristretto>(&bytes),
    };
    match outcome {
        Ok(report) => {
            let mut text = format!("ok: {} entries verified\n", report.entries);
            for (kind, n) in &report.counts {
                text.push_str(&format!("  {}: {n}\n", kind.as_str()));
            }
            emit(c, out, &text, &json!({ "ok": true, "entries": report.entries, "counts": report.counts }))?;
            Ok(Status::Ok)
        }
        Err(f) => {
            let text = format!("corrupt: entry {}: {}\n", f.index, f.fault);
            emit(c, out, &text, &json!({ "ok": false, "index": f.index, "fault": f.fault.to_string() }))?;
            Ok(Status::VerificationFailed)
        }
    }
}

pub fn ledger_show(c: &CliConfig, out: &mut dyn Write) -> Result<Status> {
    let text = with_group!(ledger_group(c)?, G => Ledger::<G>::open(&c.ledger)?.export_text());
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("stdout"), e))?;
    Ok(Status::Ok)
}
