//! Coercer classifiers: given a surrendered bundle and the whole ledger,
//! guess whether the bundle is the voter's real credential.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use trip_core::{schnorr, Group};
use trip_ledger::{EntryKind, Ledger};
use trip_protocol::{
    activate, Check, CheckStatus, CheckoutTicket, CommitPayload, Envelope, LedgerView, Mode, Payload, ReceiptBundle,
    ResponsePayload,
};

use crate::{booth::glyph, report::Truth};

/// What the voter hands over: payloads only, kind and marks stripped.
#[derive(Debug, Clone)]
pub struct Surrendered<G: Group> {
    pub v_id: String,
    pub q1: CommitPayload<G>,
    pub t_ot: CheckoutTicket<G>,
    pub q2: ResponsePayload<G>,
    pub envelope: Envelope<G>,
}

impl<G: Group> Surrendered<G> {
    pub fn from_bundle(v_id: &str, bundle: &ReceiptBundle<G>) -> Self {
        Self {
            v_id: v_id.to_owned(),
            q1: bundle.q1.clone(),
            t_ot: bundle.t_ot.clone(),
            q2: bundle.q2.clone(),
            envelope: bundle.envelope.clone(),
        }
    }
}

pub trait Classifier<G: Group>: Sync {
    fn name(&self) -> &'static str;
    fn classify(&self, bundle: &Surrendered<G>, ledger: &Ledger<G>) -> Truth;
}

/// Uses every public field and the ledger.
///
/// It reruns activation as a dry run and calls the bundle fake if any
/// check other than envelope consumption disagrees with a real, already
/// activated bundle. Otherwise it bets that the real credential was the
/// first one the kiosk registered after the voter's session.
#[derive(Debug, Clone, Copy, Default)]
pub struct Baseline;

impl<G: Group> Classifier<G> for Baseline {
    fn name(&self) -> &'static str {
        "baseline"
    }

    fn classify(&self, b: &Surrendered<G>, ledger: &Ledger<G>) -> Truth {
        // a dry run draws no randomness
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let Ok(result) =
            activate(&b.v_id, &b.q1, &b.envelope, &b.q2, &LedgerView::Online(ledger), Mode::DryRun, &mut rng)
        else {
            return Truth::Fake;
        };
        let expected = |c: Check| {
            if c == Check::ChallengeExistsAndUnused && ledger.consumption(&b.envelope.challenge_hash()).is_some() {
                CheckStatus::Failed
            } else {
                CheckStatus::Passed
            }
        };
        if result.checks.iter().any(|&(c, s)| s != expected(c)) {
            return Truth::Fake;
        }
        let Some(session) = ledger.latest_registration(&b.v_id) else {
            return Truth::Fake;
        };
        let posted = session.registration().is_some_and(|r| {
            r.d == b.t_ot.d && r.v_e == b.t_ot.v_e && r.kiosk == b.t_ot.kiosk && r.kiosk_sig == b.t_ot.sig
        });
        if !posted || b.t_ot.v_e != b.q1.v_e {
            return Truth::Fake;
        }
        let Some(secret) = b.q2.secret else {
            return Truth::Fake;
        };
        let credential = schnorr::pubkey::<G>(&secret);
        let first = ledger
            .entries_of(EntryKind::CredentialRegistered)
            .into_iter()
            .find(|e| e.index > session.index && *e.author() == b.q2.kiosk);
        match first {
            Some(e) if matches!(e.body(), trip_ledger::EntryBody::CredentialRegistered(r) if r.credential == credential) => {
                Truth::Real
            }
            _ => Truth::Fake,
        }
    }
}

/// The visual Fiat-Shamir coercer: the real envelope was chosen to look
/// like `q1`.
#[derive(Debug, Clone, Copy)]
pub struct VisualMatch {
    pub buckets: u8,
}

impl<G: Group> Classifier<G> for VisualMatch {
    fn name(&self) -> &'static str {
        "visual-match"
    }

    fn classify(&self, b: &Surrendered<G>, _ledger: &Ledger<G>) -> Truth {
        if glyph(&b.q1.to_bytes(), self.buckets) == glyph(&b.envelope.to_bytes(), self.buckets) {
            Truth::Real
        } else {
            Truth::Fake
        }
    }
}
