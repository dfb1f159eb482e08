//! Fixture builder and plaintext oracle for tally tests.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use trip_core::{Group, SigningKeypair};
use trip_ledger::{Ledger, RevotePolicy};
use trip_protocol::{
    ceremony::{register_voter, VisitPlan},
    setup::{setup_election, Election, ElectionConfig},
    ManualClock, VoterDevice,
};
use trip_tally::{ballot_accept, cast_ballot, close_event, open_event, tally, TallyError, TallyResult};

#[derive(Debug, Clone)]
pub struct VoterSpec {
    /// Entity index when the voter delegates instead of holding a credential.
    pub standing: Option<usize>,
    pub fakes: usize,
    /// Option voted with the real credential (ignored for delegators).
    pub real_vote: Option<usize>,
    /// Revote with the real credential.
    pub revote: Option<usize>,
    /// Options voted with the fakes, one per fake at most.
    pub fake_votes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub options: usize,
    pub entities: usize,
    pub revote: RevotePolicy,
    pub vote_limit: bool,
    pub voters: Vec<VoterSpec>,
    /// Option each entity votes, if it votes.
    pub entity_votes: Vec<Option<usize>>,
    /// Never-registered keys that try to vote.
    pub rogue_votes: Vec<usize>,
}

impl FixtureSpec {
    pub fn random(rng: &mut impl Rng, max_voters: usize) -> Self {
        let options = rng.gen_range(1..=4);
        let entities = rng.gen_range(0..=1);
        let n = rng.gen_range(1..=max_voters);
        let mut fakes_left: usize = 5;
        let mut delegations_left: usize = if entities > 0 { 2 } else { 0 };
        let voters = (0..n)
            .map(|_| {
                let standing = if delegations_left > 0 && rng.gen_bool(0.2) {
                    delegations_left -= 1;
                    Some(0)
                } else {
                    None
                };
                let fakes = rng.gen_range(0..=fakes_left.min(2));
                fakes_left -= fakes;
                VoterSpec {
                    standing,
                    fakes,
                    real_vote: rng.gen_bool(0.8).then(|| rng.gen_range(0..options)),
                    revote: rng.gen_bool(0.15).then(|| rng.gen_range(0..options)),
                    fake_votes: (0..fakes).flat_map(|_| rng.gen_bool(0.7).then(|| rng.gen_range(0..options))).collect(),
                }
            })
            .collect();
        Self {
            options,
            entities,
            revote: if rng.gen_bool(0.5) { RevotePolicy::Forbid } else { RevotePolicy::LastCounts },
            vote_limit: rng.gen_bool(0.5),
            voters,
            entity_votes: (0..entities).map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(0..options))).collect(),
            rogue_votes: (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..options)).collect(),
        }
    }
}

pub struct Built<G: Group> {
    pub election: Election<G>,
    /// Current real credential key of each roll voter (entity key for delegators).
    pub real_keys: Vec<G::Element>,
    /// `(author, option)` of every accepted ballot, in ledger order.
    pub accepted: Vec<(G::Element, usize)>,
    pub rejected: Vec<TallyError>,
}

pub const EVENT: &str = "ballot-measure";

/// Registers, activates and votes as the fixture says, then closes the event.
pub fn build<G: Group>(spec: &FixtureSpec, seed: u64) -> Built<G> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut config = ElectionConfig::small(spec.voters.len());
    config.entities = (0..spec.entities).map(|i| format!("Entity {i}")).collect();
    let election = setup_election::<G, _>(&config, Ledger::in_memory(), &mut rng).unwrap();
    let clock = ManualClock::new(0);
    let mut credentials = Vec::new();
    for (i, voter) in spec.voters.iter().enumerate() {
        let v_id = format!("v{i}");
        let plan = VisitPlan { real: voter.standing, fakes: vec![None; voter.fakes], candidates: 1 };
        let visit = register_voter(&election, 0, &v_id, &plan, &clock, &mut rng).unwrap();
        let mut device = VoterDevice::new(&v_id);
        for bundle in visit.bundles() {
            assert!(device.activate(bundle, &election.ledger, &mut rng).unwrap().passed());
        }
        credentials.push(device.credentials);
    }
    let real_keys = credentials.iter().map(|c| c[0].public).collect();

    let official = &election.officials[0];
    let event = open_event(official, &election.ledger, EVENT, spec.options, spec.revote, spec.vote_limit).unwrap();
    let key = election.key_material.public.key;
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut cast = |signer: &SigningKeypair<G>, option: usize, rng: &mut ChaCha20Rng| {
        let entry = cast_ballot(signer, option, &event, &key, rng).unwrap();
        match ballot_accept(&election.ledger, entry) {
            Ok(_) => accepted.push((*signer.public(), option)),
            Err(e) => rejected.push(e),
        }
    };
    for (voter, creds) in spec.voters.iter().zip(&credentials) {
        let keypairs: Vec<_> = creds.iter().filter_map(|c| c.secret.map(SigningKeypair::<G>::from_secret)).collect();
        let (real, fakes) =
            if voter.standing.is_some() { (None, &keypairs[..]) } else { (Some(&keypairs[0]), &keypairs[1..]) };
        if let Some(real) = real {
            for option in voter.real_vote.iter().chain(&voter.revote) {
                cast(real, *option, &mut rng);
            }
        }
        for (fake, option) in fakes.iter().zip(&voter.fake_votes) {
            cast(fake, *option, &mut rng);
        }
    }
    for (entity, vote) in election.entities.iter().zip(&spec.entity_votes) {
        if let Some(option) = vote {
            cast(&entity.1, *option, &mut rng);
        }
    }
    for option in &spec.rogue_votes {
        let rogue = SigningKeypair::<G>::generate(&mut rng);
        cast(&rogue, *option, &mut rng);
    }
    close_event(official, &election.ledger, EVENT).unwrap();
    Built { election, real_keys, accepted, rejected }
}

/// Plaintext tally from the known credentials and votes, without any PET or
/// decryption.
pub fn oracle<G: Group>(
    options: usize,
    revote: RevotePolicy,
    real_keys: &[G::Element],
    accepted: &[(G::Element, usize)],
) -> Vec<u64> {
    let enc = |k: &G::Element| G::encode_element(k);
    let mut chosen: HashMap<Vec<u8>, usize> = HashMap::new();
    for (author, option) in accepted {
        match revote {
            RevotePolicy::Forbid => {
                chosen.entry(enc(author)).or_insert(*option);
            }
            RevotePolicy::LastCounts => {
                chosen.insert(enc(author), *option);
            }
        }
    }
    let mut counts = vec![0; options];
    for (author, option) in chosen {
        counts[option] += real_keys.iter().filter(|k| enc(k) == author).count() as u64;
    }
    counts
}

pub fn run<G: Group>(built: &Built<G>, seed: u64) -> TallyResult {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let e = &built.election;
    let shares = e.key_material.subset(&[1, 3]);
    tally(&e.ledger, EVENT, &shares, &trip_tally::roll_from_ledger(&e.ledger), &mut rng).unwrap()
}
