use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use trip_core::TestGroup;
use trip_ledger::Ledger;
use trip_protocol::{
    activation::{activate_bundle, Mode},
    ceremony::{register_voter, VisitPlan},
    setup::{setup_election, ElectionConfig},
    BundleKind, Check, LedgerView, ManualClock, Payload, SessionEvent,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sessions_keep_their_structural_invariants(
        seed in any::<u64>(),
        fakes in prop::collection::vec(prop::option::of(0usize..2), 0..4),
        standing in prop::option::of(0usize..2),
        candidates in 1usize..4,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut config = ElectionConfig::small(1);
        config.entities = vec!["A".into(), "B".into()];
        let e = setup_election::<TestGroup, _>(&config, Ledger::in_memory(), &mut rng).unwrap();
        let clock = ManualClock::new(0);
        let plan = VisitPlan { real: standing, fakes: fakes.clone(), candidates };
        let visit = register_voter(&e, 0, "v0", &plan, &clock, &mut rng).unwrap();

        // one real-or-standing bundle, the rest fake
        let kinds: Vec<_> = visit.bundles().map(|b| b.kind).collect();
        prop_assert_eq!(kinds.iter().filter(|k| **k != BundleKind::Fake).count(), 1);
        prop_assert_eq!(kinds.len(), fakes.len() + 1);

        // commit printed before any envelope enters the session
        let printed = visit.log.iter().position(|e| *e == SessionEvent::CommitPrinted).unwrap();
        let scanned = visit.log.iter().position(|e| *e == SessionEvent::EnvelopeScanned).unwrap();
        prop_assert!(printed < scanned);

        // same grammar and the same check-out ticket everywhere
        for b in visit.bundles() {
            prop_assert_eq!(b.t_ot.to_bytes(), visit.real.t_ot.to_bytes());
            prop_assert_eq!(b.q1.to_bytes().len(), visit.real.q1.to_bytes().len());
            prop_assert_eq!(b.q2.to_bytes().len(), visit.real.q2.to_bytes().len());
            prop_assert_eq!(b.q1.v_e, visit.real.q1.v_e);
        }

        // each bundle activates once; a replay of its envelope fails
        let view = LedgerView::Online(&e.ledger);
        for b in visit.bundles() {
            let r = activate_bundle("v0", b, &view, Mode::Commit, &mut rng).unwrap();
            prop_assert!(r.passed(), "{:?} {:?}", b.kind, r.failed);
        }
        for b in visit.bundles() {
            let again = activate_bundle("v0", b, &view, Mode::Commit, &mut rng).unwrap();
            prop_assert_eq!(again.failed, vec![Check::ChallengeExistsAndUnused]);
        }
    }
}
