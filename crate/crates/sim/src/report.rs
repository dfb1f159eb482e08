//! Per-trial outcomes and the aggregate report.

use std::{collections::BTreeMap, fmt::Write};

use serde::{Deserialize, Serialize};
use trip_core::GroupId;
use trip_protocol::Check;

/// How an attack was noticed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// An activation check failed on the voter's device.
    Check(Check),
    /// The mailbox holds a registration session the voter never attended.
    DisownedSession,
    /// A ballot under one of the voter's credentials that the device did not cast.
    UnrecognizedBallot,
    /// The kiosk scanned an envelope before printing the real commit.
    ProcessOrder,
}

impl Detection {
    pub fn name(self) -> String {
        match self {
            Detection::Check(c) => c.name().replace(' ', "-"),
            Detection::DisownedSession => "disowned-session".into(),
            Detection::UnrecognizedBallot => "unrecognized-ballot".into(),
            Detection::ProcessOrder => "process-order".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truth {
    Real,
    Fake,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum Outcome {
    /// No adversary acted.
    Honest,
    Detected {
        by: Detection,
    },
    AdversarySuccess,
    Classified {
        truth: Truth,
        guess: Truth,
    },
}

impl Outcome {
    pub fn is_correct_guess(&self) -> bool {
        matches!(self, Outcome::Classified { truth, guess } if truth == guess)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson(k: usize, n: usize) -> Interval {
    if n == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let z = 1.959_963_984_540_054_f64;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Interval { low: (centre - half).max(0.0), high: (centre + half).min(1.0) }
}

/// Chance plus three binomial standard deviations for `n` fair guesses.
pub fn chance_bound(n: usize) -> f64 {
    0.5 + 3.0 * (0.25 / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub group: GroupId,
    pub seed: u64,
    pub trials: usize,
    pub envelopes: usize,
    pub outcomes: Vec<TrialRecord>,
    pub honest: usize,
    pub detected: usize,
    pub adversary_successes: usize,
    /// Detections over attacked trials.
    pub detection_rate: Option<f64>,
    pub detection_interval: Option<Interval>,
    pub detections_by_event: BTreeMap<String, usize>,
    /// Correct guesses over classified trials.
    pub accuracy: Option<f64>,
    pub accuracy_interval: Option<Interval>,
    pub chance_bound: Option<f64>,
    pub violations: Vec<Violation>,
    /// Set when the scenario is not simulated at all.
    pub out_of_scope: Option<String>,
}

impl ScenarioReport {
    pub fn new(
        scenario: &str,
        group: GroupId,
        seed: u64,
        envelopes: usize,
        outcomes: Vec<TrialRecord>,
        violations: Vec<Violation>,
    ) -> Self {
        let count = |f: &dyn Fn(&Outcome) -> bool| outcomes.iter().filter(|t| f(&t.outcome)).count();
        let honest = count(&|o| matches!(o, Outcome::Honest));
        let detected = count(&|o| matches!(o, Outcome::Detected { .. }));
        let adversary_successes = count(&|o| matches!(o, Outcome::AdversarySuccess));
        let classified = count(&|o| matches!(o, Outcome::Classified { .. }));
        let correct = count(&|o| o.is_correct_guess());
        let mut detections_by_event = BTreeMap::new();
        for t in &outcomes {
            if let Outcome::Detected { by } = t.outcome {
                *detections_by_event.entry(by.name()).or_insert(0) += 1;
            }
        }
        let attacked = detected + adversary_successes;
        let ratio = |k: usize, n: usize| (n > 0).then(|| k as f64 / n as f64);
        Self {
            scenario: scenario.to_owned(),
            group,
            seed,
            trials: outcomes.len(),
            envelopes,
            honest,
            detected,
            adversary_successes,
            detection_rate: ratio(detected, attacked),
            detection_interval: (attacked > 0).then(|| wilson(detected, attacked)),
            detections_by_event,
            accuracy: ratio(correct, classified),
            accuracy_interval: (classified > 0).then(|| wilson(correct, classified)),
            chance_bound: (classified > 0).then(|| chance_bound(classified)),
            outcomes,
            violations,
            out_of_scope: None,
        }
    }

    pub fn out_of_scope(scenario: &str, group: GroupId, seed: u64, reason: &str) -> Self {
        let mut report = Self::new(scenario, group, seed, 0, Vec::new(), Vec::new());
        report.out_of_scope = Some(reason.to_owned());
        report
    }

    /// Trials that ended neither in an honest pass, a detection, an
    /// adversary success nor a guess. Always zero by construction of
    /// [`Outcome`]; exposed for the no-silent-outcomes check.
    pub fn silent(&self) -> usize {
        self.trials - self.honest - self.detected - self.adversary_successes - self.classified()
    }

    pub fn classified(&self) -> usize {
        self.outcomes.iter().filter(|t| matches!(t.outcome, Outcome::Classified { .. })).count()
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("plain data serializes")
    }

    /// Deterministic human-readable summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let group =
            serde_json::to_value(self.group).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        let _ =
            writeln!(s, "group: {group}  seed: {}  trials: {}  envelopes: {}", self.seed, self.trials, self.envelopes);
        if let Some(reason) = &self.out_of_scope {
            let _ = writeln!(s, "out of scope: {reason}");
            return s;
        }
        let _ = writeln!(
            s,
            "honest: {}  detected: {}  adversary-success: {}  classified: {}",
            self.honest,
            self.detected,
            self.adversary_successes,
            self.classified()
        );
        if let (Some(rate), Some(ci)) = (self.detection_rate, self.detection_interval) {
            let _ = writeln!(s, "detection rate: {rate:.4} (95% CI {:.4}..{:.4})", ci.low, ci.high);
        }
        for (event, n) in &self.detections_by_event {
            let _ = writeln!(s, "  {event}: {n}");
        }
        if let (Some(acc), Some(ci), Some(bound)) = (self.accuracy, self.accuracy_interval, self.chance_bound) {
            let _ = writeln!(s, "accuracy: {acc:.4} (95% CI {:.4}..{:.4}, chance bound {bound:.4})", ci.low, ci.high);
        }
        let _ = writeln!(s, "violations: {}", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(s, "  trial {}: {}", v.trial, v.message);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_hand_computation() {
        // 900 of 1000: p = 0.9, z^2/n tiny; interval ~ 0.9 -+ 1.96 * 0.00949
        let ci = wilson(900, 1000);
        assert!((ci.low - 0.8797).abs() < 5e-4, "{ci:?}");
        assert!((ci.high - 0.9170).abs() < 5e-4, "{ci:?}");
        let all = wilson(10, 10);
        assert!(all.high <= 1.0 && all.low > 0.69);
        assert_eq!(wilson(0, 0), Interval { low: 0.0, high: 1.0 });
    }

    #[test]
    fn chance_bound_for_five_hundred() {
        // 0.5 + 3 * 0.5 / sqrt(500)
        assert!((chance_bound(500) - 0.567_08).abs() < 1e-4);
    }

    #[test]
    fn report_counts_outcomes() {
        let outcomes = vec![
            TrialRecord { trial: 0, outcome: Outcome::Detected { by: Detection::Check(Check::Zkp) } },
            TrialRecord { trial: 1, outcome: Outcome::AdversarySuccess },
            TrialRecord { trial: 2, outcome: Outcome::Detected { by: Detection::DisownedSession } },
            TrialRecord { trial: 3, outcome: Outcome::Detected { by: Detection::Check(Check::Zkp) } },
        ];
        let r = ScenarioReport::new("x", GroupId::TestModP, 1, 10, outcomes, Vec::new());
        assert_eq!(r.detection_rate, Some(0.75));
        assert_eq!(r.detections_by_event["zkp"], 2);
        assert_eq!(r.detections_by_event["disowned-session"], 1);
        assert_eq!(r.silent(), 0);
        assert!(r.accuracy.is_none());
        assert!(r.to_text().contains("detection rate: 0.7500"));
    }

    #[test]
    fn outcome_json_is_flat() {
        let t = TrialRecord { trial: 4, outcome: Outcome::Classified { truth: Truth::Real, guess: Truth::Fake } };
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(text, r#"{"trial":4,"outcome":"classified","truth":"real","guess":"fake"}"#);
        let d = serde_json::to_string(&Detection::Check(Check::FreshReceipt)).unwrap();
        assert_eq!(d, r#"{"check":"fresh-receipt"}"#);
    }
}
