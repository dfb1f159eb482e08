//! Whole-visit driver and fixture-driven replay.
//!
//! A fixture is a JSON script: election setup, a seed, and one entry per
//! visit. Replaying it with the seeded RNG yields a transcript of every
//! payload as base64, the activation check lists, and a ledger digest. The
//! schema is documented in the repository README.

use rand::{seq::SliceRandom, CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use trip_core::{with_group, Group, GroupId};
use trip_ledger::Ledger;

use crate::{
    activation::{activate_bundle, ActivationResult, Check, CheckStatus, LedgerView, Mode, Verdict},
    kiosk::{KioskSession, RealSecrets, SessionEvent, Target},
    officials::{checkin_issue, checkout_process, envelope_print, DEFAULT_NONCE_LEN},
    setup::{setup_election, Election, ElectionConfig},
    BundleKind, CheckInTicket, Clock, ManualClock, Payload, ProtocolError, ReceiptBundle,
};

/// What the voter asks for in the booth.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VisitPlan {
    pub real: Option<usize>,
    /// One entry per fake; `Some(i)` fakes a standing vote for entity `i`.
    pub fakes: Vec<Option<usize>>,
    /// Candidate commits per credential for the advanced option; 1 disables it.
    pub candidates: usize,
}

impl VisitPlan {
    pub fn with_fakes(fakes: usize) -> Self {
        Self { real: None, fakes: vec![None; fakes], candidates: 1 }
    }

    fn real_target(&self) -> Target {
        self.real.map_or(Target::Credential, Target::Entity)
    }
}

/// Everything a voter walks out of the booth with.
pub struct Visit<G: Group> {
    pub ticket: CheckInTicket<G>,
    pub real: ReceiptBundle<G>,
    pub fakes: Vec<ReceiptBundle<G>>,
    pub checkout_index: u64,
    pub log: Vec<SessionEvent>,
    pub secrets: RealSecrets<G>,
}

impl<G: Group> Visit<G> {
    pub fn bundles(&self) -> impl Iterator<Item = &ReceiptBundle<G>> {
        std::iter::once(&self.real).chain(&self.fakes)
    }
}

/// Runs check-in, the real path, the fakes and check-out with honest actors.
/// Envelopes are printed on demand and picked by the voter.
pub fn register_voter<G: Group, R: RngCore + CryptoRng>(
    election: &Election<G>,
    kiosk: usize,
    v_id: &str,
    plan: &VisitPlan,
    clock: &dyn Clock,
    rng: &mut R,
) -> Result<Visit<G>, ProtocolError> {
    let official = &election.officials[0];
    let printer = election.printers.choose(rng).expect("at least one printer");
    let ticket = checkin_issue(official, v_id, clock, &election.ledger)?;
    let mut session = KioskSession::new(election.kiosk_config(kiosk)?);
    session.checkin_verify(&ticket, clock)?;

    let candidates = plan.candidates.max(1);
    session.begin(plan.real_target(), candidates, rng)?;
    if candidates > 1 {
        session.select_commit(rng.gen_range(0..candidates))?;
    }
    let (envelope, _) = envelope_print(printer, DEFAULT_NONCE_LEN, &election.ledger, rng)?;
    let real = session.realcred_complete(&envelope)?;

    let mut fakes = Vec::with_capacity(plan.fakes.len());
    for fake in &plan.fakes {
        let (envelope, _) = envelope_print(printer, DEFAULT_NONCE_LEN, &election.ledger, rng)?;
        let target = fake.map_or(Target::Credential, Target::Entity);
        session.fake_candidates(&envelope, target, candidates, rng)?;
        fakes.push(session.select_fake(rng.gen_range(0..candidates))?);
    }
    session.finish()?;
    let secrets = session.real_secrets().expect("real path ran").clone();
    let checkout_index = checkout_process(official, &real.t_ot, &election.ledger)?;
    Ok(Visit { ticket, real, fakes, checkout_index, log: session.log().to_vec(), secrets })
}

/// One scripted visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitScript {
    pub v_id: String,
    /// Standing-vote entity in place of a real credential.
    #[serde(default)]
    pub standing: Option<usize>,
    /// Fakes to print; entries with an entity index fake a standing vote.
    #[serde(default)]
    pub fakes: Vec<Option<usize>>,
    #[serde(default = "one")]
    pub candidates: usize,
    /// Seconds the clock moves before this visit.
    #[serde(default)]
    pub advance: u64,
    /// Activate every bundle after check-out, in print order.
    #[serde(default = "yes")]
    pub activate: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeremonyScript {
    pub group: GroupId,
    pub seed: u64,
    pub start_time: u64,
    pub election: ElectionConfig,
    pub visits: Vec<VisitScript>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleRecord {
    pub kind: BundleKind,
    pub q1: String,
    pub t_ot: String,
    pub q2: String,
    pub envelope: String,
    pub verdict: Option<Verdict>,
    pub checks: Vec<(Check, CheckStatus)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub v_id: String,
    pub ticket: String,
    pub checkout_index: u64,
    pub log: Vec<SessionEvent>,
    pub bundles: Vec<BundleRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub group: GroupId,
    pub seed: u64,
    pub visits: Vec<VisitRecord>,
    pub ledger_entries: u64,
    /// Hex hash of the ledger file bytes.
    pub ledger_digest: String,
}

impl Transcript {
    /// Bundles that were activated and failed.
    pub fn failures(&self) -> usize {
        self.visits.iter().flat_map(|v| &v.bundles).filter(|b| b.verdict == Some(Verdict::Fail)).count()
    }
}

/// Replays a script into a fresh in-memory ledger.
pub fn replay(script: &CeremonyScript) -> Result<Transcript, ProtocolError> {
    with_group!(script.group, G => replay_in::<G>(script, Ledger::in_memory()).map(|(t, _)| t))
}

/// Replays into `ledger` and also hands back the election secrets.
pub fn replay_in<G: Group>(
    script: &CeremonyScript,
    ledger: Ledger<G>,
) -> Result<(Transcript, Election<G>), ProtocolError> {
    let mut rng = ChaCha20Rng::seed_from_u64(script.seed);
    let election = setup_election(&script.election, ledger, &mut rng)?;
    let transcript = replay_visits(&election, script, &mut rng)?;
    Ok((transcript, election))
}

/// Runs the script's visits against an existing election; `script.election`
/// is ignored.
pub fn replay_visits<G: Group, R: RngCore + CryptoRng>(
    election: &Election<G>,
    script: &CeremonyScript,
    rng: &mut R,
) -> Result<Transcript, ProtocolError> {
    let clock = ManualClock::new(script.start_time);
    let mut visits = Vec::with_capacity(script.visits.len());
    for v in &script.visits {
        clock.advance(v.advance);
        let plan = VisitPlan { real: v.standing, fakes: v.fakes.clone(), candidates: v.candidates };
        let visit = register_voter(election, 0, &v.v_id, &plan, &clock, rng)?;
        let mut bundles = Vec::new();
        for bundle in visit.bundles() {
            let result = if v.activate {
                Some(activate_bundle(&v.v_id, bundle, &LedgerView::Online(&election.ledger), Mode::Commit, rng)?)
            } else {
                None
            };
            bundles.push(bundle_record(bundle, result.as_ref()));
        }
        visits.push(VisitRecord {
            v_id: v.v_id.clone(),
            ticket: visit.ticket.to_base64(),
            checkout_index: visit.checkout_index,
            log: visit.log,
            bundles,
        });
    }
    let transcript = Transcript {
        group: G::ID,
        seed: script.seed,
        visits,
        ledger_entries: election.ledger.len(),
        ledger_digest: hex::encode(trip_core::hash(&election.ledger.to_file_bytes())),
    };
    Ok(transcript)
}

fn bundle_record<G: Group>(bundle: &ReceiptBundle<G>, result: Option<&ActivationResult<G>>) -> BundleRecord {
    BundleRecord {
        kind: bundle.kind,
        q1: bundle.q1.to_base64(),
        t_ot: bundle.t_ot.to_base64(),
        q2: bundle.q2.to_base64(),
        envelope: bundle.envelope.to_base64(),
        verdict: result.map(|r| r.verdict),
        checks: result.map(|r| r.checks.clone()).unwrap_or_default(),
    }
}
