//! One trial function per adversary, and the seeded trial runner.

use std::collections::HashSet;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use trip_core::{group::random_scalar, with_group, Group, SigningKeypair};
use trip_ledger::{Ledger, RevotePolicy};
use trip_protocol::{setup_election, ActivationResult, BundleKind, Election, ManualClock, ReceiptBundle, SessionEvent};
use trip_tally::{ballot_accept, cast_ballot, open_event};

use crate::{
    booth::{
        activate_all, check_out, commit_before_scan, envelope_stack, fresh_credential, honest_visit, official, Picker,
        RogueKiosk,
    },
    coercer::{Baseline, Classifier, Surrendered, VisualMatch},
    config::{ActivationOrder, Adversary, ScenarioConfig},
    report::{Detection, Outcome, ScenarioReport, TrialRecord, Truth, Violation},
    SimError,
};

/// Clock start for every trial.
const START: u64 = 1_700_000_000;

/// Fakes per visit are drawn from `0..=MAX_FAKES`.
const MAX_FAKES: usize = 3;

/// The RNG stream of one trial: keyed by the seed, stream = trial index.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Trial {
    outcome: Outcome,
    violations: Vec<String>,
}

impl Trial {
    fn clean(outcome: Outcome) -> Self {
        Self { outcome, violations: Vec::new() }
    }
}

/// Runs `config` with the shipped baseline classifier.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, SimError> {
    with_group!(config.group, G => run_with::<G>(config, &Baseline))
}

/// Runs `config`; `classifier` is used by the coercer-distinguisher scenario.
pub fn run_with<G: Group>(config: &ScenarioConfig, classifier: &dyn Classifier<G>) -> Result<ScenarioReport, SimError> {
    config.validate()?;
    let name = config.adversary.name();
    if config.adversary == Adversary::SideChannel {
        let reason = "printer noise, timing and electromagnetic channels are not modelled";
        return Ok(ScenarioReport::out_of_scope(name, config.group, config.seed, reason));
    }
    let visual;
    let classifier: &dyn Classifier<G> = match config.adversary {
        Adversary::VisualFiatShamir { buckets, .. } => {
            visual = VisualMatch { buckets };
            &visual
        }
        _ => classifier,
    };
    let run = |trial: usize| -> Result<Trial, SimError> {
        let mut rng = trial_rng(config.seed, trial);
        let clock = ManualClock::new(START);
        let election = setup_election::<G, _>(&config.election(), Ledger::in_memory(), &mut rng)?;
        let t = TrialCtx { config, election: &election, clock: &clock };
        match &config.adversary {
            Adversary::None => t.honest(&mut rng),
            Adversary::Impersonation => t.impersonation(&mut rng),
            Adversary::KioskGuess => t.kiosk_guess(&mut rng),
            Adversary::EnvelopeReplacement { fake_fraction } => t.envelope_replacement(*fake_fraction, &mut rng),
            Adversary::FakeOnly => t.fake_only(&mut rng),
            Adversary::CredentialTheft => t.credential_theft(&mut rng),
            Adversary::CheckoutSwap => t.checkout_swap(&mut rng),
            Adversary::CoercerDistinguisher { activation } => {
                t.coerce(*activation, Picker::Uniform, 1, classifier, &mut rng)
            }
            Adversary::VisualFiatShamir { advanced, buckets, candidates } => {
                let k = if *advanced { *candidates } else { 1 };
                t.coerce(ActivationOrder::Shuffled, Picker::Visual { buckets: *buckets }, k, classifier, &mut rng)
            }
            Adversary::SideChannel => unreachable!("handled above"),
        }
    };
    let trials = run_parallel(config.trials, run)?;
    let mut outcomes = Vec::with_capacity(trials.len());
    let mut violations = Vec::new();
    for (trial, t) in trials.into_iter().enumerate() {
        violations.extend(t.violations.into_iter().map(|message| Violation { trial, message }));
        outcomes.push(TrialRecord { trial, outcome: t.outcome });
    }
    Ok(ScenarioReport::new(name, config.group, config.seed, config.envelopes, outcomes, violations))
}

/// Runs trials on all cores; results come back in trial order.
fn run_parallel<T: Send>(n: usize, run: impl Fn(usize) -> Result<T, SimError> + Sync) -> Result<Vec<T>, SimError> {
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n).max(1);
    let mut slots: Vec<Option<Result<T, SimError>>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let run = &run;
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..n).step_by(workers).map(|i| (i, run(i))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("trial worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every trial ran")).collect()
}

struct TrialCtx<'a, G: Group> {
    config: &'a ScenarioConfig,
    election: &'a Election<G>,
    clock: &'a ManualClock,
}

fn first_failure<G: Group>(results: &[ActivationResult<G>]) -> Option<Detection> {
    results.iter().find_map(|r| r.failed.first().map(|&c| Detection::Check(c)))
}

impl<G: Group> TrialCtx<'_, G> {
    fn stack(&self, fakes: usize, rng: &mut ChaCha20Rng) -> Result<Vec<trip_protocol::Envelope<G>>, SimError> {
        envelope_stack(self.election, self.config.envelopes.max(fakes + 1), rng)
    }

    fn victim(&self, rng: &mut ChaCha20Rng) -> String {
        format!("v{}", rng.gen_range(0..self.config.voters))
    }

    /// Every voter registers with 0..=3 fakes and activates everything.
    fn honest(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let ledger = &self.election.ledger;
        let mut violations = Vec::new();
        for i in 0..self.config.voters {
            let v_id = format!("v{i}");
            self.clock.advance(rng.gen_range(1..120));
            let fakes = rng.gen_range(0..=MAX_FAKES);
            let mut stack = self.stack(fakes, rng)?;
            let visit = honest_visit(self.election, &v_id, fakes, &mut stack, Picker::Uniform, 1, self.clock, rng)?;
            let session = check_out(self.election, &visit.real, rng)?;
            if !commit_before_scan(&visit.log) {
                violations.push(format!("{v_id}: envelope scanned before the real commit"));
            }
            if visit.fakes.iter().any(|f| f.t_ot != visit.real.t_ot) {
                violations.push(format!("{v_id}: check-out tickets differ within the session"));
            }
            let notices = ledger.mailbox().for_voter(&v_id);
            if notices.len() != 1 || notices[0].index != session {
                violations.push(format!("{v_id}: expected one notification for session {session}"));
            }
            let bundles: Vec<_> = visit.bundles().collect();
            for (bundle, r) in
                bundles.iter().zip(activate_all(&v_id, &bundles, ledger, ActivationOrder::Shuffled, rng)?)
            {
                if !r.passed() {
                    let names: Vec<_> = r.failed.iter().map(|c| c.name()).collect();
                    violations.push(format!("{v_id}: {:?} bundle failed {}", bundle.kind, names.join(", ")));
                }
            }
        }
        if let Err(e) = ledger.audit() {
            violations.push(format!("ledger audit failed: {e}"));
        }
        Ok(Trial { outcome: Outcome::Honest, violations })
    }

    /// A registrar insider checks in as the victim, who may or may not have
    /// registered already.
    fn impersonation(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let mut attended = HashSet::new();
        if rng.gen_bool(0.5) {
            let mut stack = self.stack(0, rng)?;
            let visit = honest_visit(self.election, &victim, 0, &mut stack, Picker::Uniform, 1, self.clock, rng)?;
            attended.insert(check_out(self.election, &visit.real, rng)?);
            self.clock.advance(rng.gen_range(60..3_600));
        }
        let mut stack = self.stack(0, rng)?;
        let forged = honest_visit(self.election, &victim, 0, &mut stack, Picker::Uniform, 1, self.clock, rng)?;
        let index = check_out(self.election, &forged.real, rng)?;
        let disowned =
            self.election.ledger.mailbox().for_voter(&victim).into_iter().any(|n| !attended.contains(&n.index));
        let mut trial = Trial::clean(if disowned {
            Outcome::Detected { by: Detection::DisownedSession }
        } else {
            Outcome::AdversarySuccess
        });
        if self.election.ledger.latest_registration(&victim).map(|e| e.index) != Some(index) {
            trial.violations.push("impostor session is not the latest registration".into());
        }
        Ok(trial)
    }

    /// The kiosk commits to a proof simulated for one guessed envelope.
    fn kiosk_guess(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let stack = envelope_stack(self.election, self.config.envelopes, rng)?;
        let ticket = trip_protocol::officials::checkin_issue(
            official(self.election, rng),
            &victim,
            self.clock,
            &self.election.ledger,
        )?;
        let kiosk = RogueKiosk::new(self.election, &ticket, rng)?;
        let handed = fresh_credential::<G>(rng);
        let guess = rng.gen_range(0..stack.len());
        let forged = kiosk.simulate(&handed, &stack[guess], rng);
        let q1 = kiosk.commit(&forged);
        let pick = rng.gen_range(0..stack.len());
        // a wrong guess leaves the kiosk without a valid response
        let response = if pick == guess { forged.response } else { random_scalar::<G, _>(rng) };
        let bundle = kiosk.bundle(q1, &handed, &stack[pick], response, BundleKind::Real);
        check_out(self.election, &bundle, rng)?;
        let results = activate_all(&victim, &[&bundle], &self.election.ledger, ActivationOrder::PrintOrder, rng)?;
        let mut trial = Trial::clean(match first_failure(&results) {
            Some(by) => Outcome::Detected { by },
            None => Outcome::AdversarySuccess,
        });
        if results[0].passed() && pick != guess && G::ID == trip_core::GroupId::ProductionCurve {
            trial.violations.push("unanswerable commit passed activation".into());
        }
        Ok(trial)
    }

    /// All envelopes are copies of one; fakes reuse it.
    fn envelope_replacement(&self, fake_fraction: f64, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let copy = envelope_stack(self.election, 1, rng)?.remove(0);
        let ticket = trip_protocol::officials::checkin_issue(
            official(self.election, rng),
            &victim,
            self.clock,
            &self.election.ledger,
        )?;
        let kiosk = RogueKiosk::new(self.election, &ticket, rng)?;
        let handed = fresh_credential::<G>(rng);
        let forged = kiosk.simulate(&handed, &copy, rng);
        let mut bundles = vec![kiosk.bundle(kiosk.commit(&forged), &handed, &copy, forged.response, BundleKind::Real)];
        let fakes = if rng.gen_bool(fake_fraction) { rng.gen_range(1..=MAX_FAKES) } else { 0 };
        for _ in 0..fakes {
            let fake = fresh_credential::<G>(rng);
            let t = kiosk.simulate(&fake, &copy, rng);
            bundles.push(kiosk.bundle(kiosk.commit(&t), &fake, &copy, t.response, BundleKind::Fake));
        }
        check_out(self.election, &bundles[0], rng)?;
        let refs: Vec<_> = bundles.iter().collect();
        let results = activate_all(&victim, &refs, &self.election.ledger, ActivationOrder::Shuffled, rng)?;
        let mut trial = Trial::clean(match first_failure(&results) {
            Some(by) => Outcome::Detected { by },
            None => Outcome::AdversarySuccess,
        });
        if results.iter().filter(|r| r.passed()).count() != 1 {
            trial.violations.push("exactly one bundle sharing the envelope should activate".into());
        }
        Ok(trial)
    }

    /// The kiosk only ever runs the fake process.
    fn fake_only(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let stack = envelope_stack(self.election, self.config.envelopes, rng)?;
        let ticket = trip_protocol::officials::checkin_issue(
            official(self.election, rng),
            &victim,
            self.clock,
            &self.election.ledger,
        )?;
        let kiosk = RogueKiosk::new(self.election, &ticket, rng)?;
        let handed = fresh_credential::<G>(rng);
        let envelope = &stack[rng.gen_range(0..stack.len())];
        let forged = kiosk.simulate(&handed, envelope, rng);
        let bundle = kiosk.bundle(kiosk.commit(&forged), &handed, envelope, forged.response, BundleKind::Real);
        let seen = [
            SessionEvent::TicketAccepted,
            SessionEvent::EnvelopeScanned,
            SessionEvent::ReceiptPrinted { kind: BundleKind::Fake },
            SessionEvent::Finished,
        ];
        check_out(self.election, &bundle, rng)?;
        let results = activate_all(&victim, &[&bundle], &self.election.ledger, ActivationOrder::PrintOrder, rng)?;
        let outcome = if !commit_before_scan(&seen) {
            Outcome::Detected { by: Detection::ProcessOrder }
        } else {
            first_failure(&results).map_or(Outcome::AdversarySuccess, |by| Outcome::Detected { by })
        };
        let mut trial = Trial::clean(outcome);
        if !results[0].passed() {
            trial.violations.push("a proof simulated for the scanned envelope should activate".into());
        }
        Ok(trial)
    }

    /// The kiosk leaks the real credential; the thief votes with it.
    fn credential_theft(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let ledger = &self.election.ledger;
        let fakes = rng.gen_range(0..=MAX_FAKES);
        let mut stack = self.stack(fakes, rng)?;
        let visit = honest_visit(self.election, &victim, fakes, &mut stack, Picker::Uniform, 1, self.clock, rng)?;
        check_out(self.election, &visit.real, rng)?;
        let bundles: Vec<_> = visit.bundles().collect();
        let results = activate_all(&victim, &bundles, ledger, ActivationOrder::Shuffled, rng)?;
        let device: Vec<_> = results.iter().filter_map(|r| r.credential.clone()).collect();
        let stolen = visit.secrets.credential.secret.expect("real credentials carry a secret");

        let key = self.election.key_material.public.key;
        let event = open_event(official(self.election, rng), ledger, "theft", 2, RevotePolicy::LastCounts, true)?;
        let mut own = HashSet::new();
        let voter_first = rng.gen_bool(0.5);
        let mut voter_votes = |rng: &mut ChaCha20Rng| -> Result<(), SimError> {
            let cred = &device[rng.gen_range(0..device.len())];
            let signer = SigningKeypair::<G>::from_secret(cred.secret.expect("credential secret"));
            own.insert(ballot_accept(ledger, cast_ballot(&signer, rng.gen_range(0..2), &event, &key, rng)?)?);
            Ok(())
        };
        if voter_first {
            voter_votes(rng)?;
        }
        let thief = SigningKeypair::<G>::from_secret(stolen);
        let stolen_at = ballot_accept(ledger, cast_ballot(&thief, rng.gen_range(0..2), &event, &key, rng)?);
        if !voter_first {
            voter_votes(rng)?;
        }
        let mine: Vec<_> = device.iter().map(|c| c.public).collect();
        let unrecognized = ledger.ballots("theft").iter().any(|b| mine.contains(b.author()) && !own.contains(&b.index));
        let mut trial = Trial::clean(if unrecognized {
            Outcome::Detected { by: Detection::UnrecognizedBallot }
        } else {
            Outcome::AdversarySuccess
        });
        if stolen_at.is_err() {
            trial.violations.push("ballot under the stolen real credential was rejected".into());
        }
        Ok(trial)
    }

    /// The kiosk re-signs a check-out ticket for a different `V_e`, which
    /// the official posts.
    fn checkout_swap(&self, rng: &mut ChaCha20Rng) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let fakes = rng.gen_range(0..=MAX_FAKES);
        let mut stack = self.stack(fakes, rng)?;
        let visit = honest_visit(self.election, &victim, fakes, &mut stack, Picker::Uniform, 1, self.clock, rng)?;
        let rogue = RogueKiosk::new(self.election, &visit.ticket, rng)?;
        let kiosk = self
            .election
            .kiosks
            .iter()
            .find(|k| *k.public() == visit.real.t_ot.kiosk)
            .expect("visit used a bound kiosk");
        let swapped = trip_protocol::kiosk::sign_checkout(kiosk, &victim, visit.ticket.d, &rogue.v_e);
        trip_protocol::officials::checkout_process(official(self.election, rng), &swapped, &self.election.ledger)?;
        let bundles: Vec<_> = visit.bundles().collect();
        let results = activate_all(&victim, &bundles, &self.election.ledger, ActivationOrder::Shuffled, rng)?;
        // the real bundle is the one the voter relies on
        Ok(Trial::clean(match results[0].failed.first() {
            Some(&c) => Outcome::Detected { by: Detection::Check(c) },
            None => Outcome::AdversarySuccess,
        }))
    }

    /// The voter registers with at least one fake, activates everything
    /// and hands over the real bundle or a fake with equal odds.
    fn coerce(
        &self,
        order: ActivationOrder,
        picker: Picker,
        fake_candidates: usize,
        classifier: &dyn Classifier<G>,
        rng: &mut ChaCha20Rng,
    ) -> Result<Trial, SimError> {
        let victim = self.victim(rng);
        let ledger = &self.election.ledger;
        let fakes = rng.gen_range(1..=MAX_FAKES);
        let mut stack = self.stack(fakes, rng)?;
        let visit = honest_visit(self.election, &victim, fakes, &mut stack, picker, fake_candidates, self.clock, rng)?;
        check_out(self.election, &visit.real, rng)?;
        let bundles: Vec<_> = visit.bundles().collect();
        let results = activate_all(&victim, &bundles, ledger, order, rng)?;
        let truth = if rng.gen_bool(0.5) { Truth::Real } else { Truth::Fake };
        let surrendered: &ReceiptBundle<G> = match truth {
            Truth::Real => &visit.real,
            Truth::Fake => visit.fakes.choose(rng).expect("at least one fake"),
        };
        let guess = classifier.classify(&Surrendered::from_bundle(&victim, surrendered), ledger);
        let mut trial = Trial::clean(Outcome::Classified { truth, guess });
        if results.iter().any(|r| !r.passed()) {
            trial.violations.push("an honest bundle failed activation".into());
        }
        Ok(trial)
    }
}
