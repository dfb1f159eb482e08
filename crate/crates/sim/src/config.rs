//! Scenario parameters.

use serde::{Deserialize, Serialize};
use trip_core::GroupId;
use trip_ledger::RollEntry;
use trip_protocol::ElectionConfig;

use crate::SimError;

/// Order in which the voter's device activates a visit's bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationOrder {
    #[default]
    Shuffled,
    /// Real bundle first, fakes in print order. Leaks the real bundle
    /// through ledger ordering; kept to show the baseline classifier bites.
    PrintOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Adversary {
    /// Honest run; the report lists invariant violations only.
    None,
    /// Someone registers in the victim's name; the victim's mailbox shows a
    /// session they never attended.
    Impersonation,
    /// The kiosk pre-simulates the proof for one guessed envelope of the
    /// stack and hands the voter a credential that is not the one on the
    /// ledger.
    KioskGuess,
    /// Every envelope in the stack is a copy of one unclaimed envelope, so
    /// the kiosk's guess always lands. Voters who make fakes reuse it.
    EnvelopeReplacement {
        /// Share of voters who make at least one fake credential.
        fake_fraction: f64,
    },
    /// The kiosk runs only the fake process, printing nothing before the
    /// envelope is scanned.
    FakeOnly,
    /// The kiosk leaks the real credential and the adversary votes with it.
    CredentialTheft,
    /// At check-out a different `V_e` is posted for the voter.
    CheckoutSwap,
    /// A coercer is handed the real or a fake bundle and must tell which.
    CoercerDistinguisher {
        #[serde(default)]
        activation: ActivationOrder,
    },
    /// The coerced voter picks the real envelope to look like `q1`; fakes
    /// may use the advanced option to pick a matching `q1` in turn.
    VisualFiatShamir {
        advanced: bool,
        /// Visual classes a QR code falls into.
        buckets: u8,
        /// Candidate commits shown per fake under the advanced option.
        candidates: usize,
    },
    /// Printer noise, timing and similar channels.
    SideChannel,
}

impl Adversary {
    pub fn name(&self) -> &'static str {
        match self {
            Adversary::None => "none",
            Adversary::Impersonation => "impersonation",
            Adversary::KioskGuess => "kiosk-guess",
            Adversary::EnvelopeReplacement { .. } => "envelope-replacement",
            Adversary::FakeOnly => "fake-only",
            Adversary::CredentialTheft => "credential-theft",
            Adversary::CheckoutSwap => "checkout-swap",
            Adversary::CoercerDistinguisher { .. } => "coercer-distinguisher",
            Adversary::VisualFiatShamir { .. } => "visual-fiat-shamir",
            Adversary::SideChannel => "side-channel",
        }
    }

    /// Scenarios whose outcome is a real/fake guess rather than a detection.
    pub fn is_classification(&self) -> bool {
        matches!(self, Adversary::CoercerDistinguisher { .. } | Adversary::VisualFiatShamir { .. })
    }
}

/// Missing fields take the [`ScenarioConfig::new`] defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub voters: usize,
    pub officials: usize,
    pub kiosks: usize,
    pub printers: usize,
    pub talliers: usize,
    pub threshold: usize,
    /// Envelopes in the booth stack.
    pub envelopes: usize,
    pub adversary: Adversary,
    pub trials: usize,
    pub seed: u64,
    pub group: GroupId,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::new(Adversary::None, 100, 0)
    }
}

impl ScenarioConfig {
    /// Three voters, one of each booth actor, 2-of-3 talliers, ten envelopes.
    pub fn new(adversary: Adversary, trials: usize, seed: u64) -> Self {
        Self {
            voters: 3,
            officials: 1,
            kiosks: 1,
            printers: 1,
            talliers: 3,
            threshold: 2,
            envelopes: 10,
            adversary,
            trials,
            seed,
            group: GroupId::ProductionCurve,
        }
    }

    pub fn with_group(mut self, group: GroupId) -> Self {
        self.group = group;
        self
    }

    pub fn with_envelopes(mut self, n: usize) -> Self {
        self.envelopes = n;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_owned()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.voters == 0 || self.officials == 0 || self.kiosks == 0 || self.printers == 0 {
            return bad("every actor count must be at least 1");
        }
        if self.threshold == 0 || self.threshold > self.talliers {
            return bad("threshold must be between 1 and the tallier count");
        }
        if self.envelopes == 0 {
            return bad("the envelope stack cannot be empty");
        }
        match &self.adversary {
            Adversary::KioskGuess if self.envelopes < 2 => bad("kiosk-guess needs at least 2 envelopes"),
            Adversary::EnvelopeReplacement { fake_fraction } if !(0.0..=1.0).contains(fake_fraction) => {
                bad("fake_fraction must lie in [0, 1]")
            }
            Adversary::VisualFiatShamir { buckets, candidates, .. } if *buckets == 0 || *candidates == 0 => {
                bad("buckets and candidates must be at least 1")
            }
            _ => Ok(()),
        }
    }

    pub fn election(&self) -> ElectionConfig {
        ElectionConfig {
            officials: self.officials,
            kiosks: self.kiosks,
            printers: self.printers,
            talliers: self.talliers,
            threshold: self.threshold,
            roll: (0..self.voters).map(|i| RollEntry { v_id: format!("v{i}"), name: format!("Voter {i}") }).collect(),
            entities: Vec::new(),
        }
    }
}
