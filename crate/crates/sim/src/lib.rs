//! Seeded adversary scenarios over the registration ceremony.
//!
//! Each trial sets up a fresh election from its own RNG stream, runs one
//! attack against a voter and ends in a named detection, an adversary
//! success, or a real/fake guess by a coercer. [`run_scenario`] aggregates
//! the trials into a [`ScenarioReport`] whose bytes depend only on the
//! config.

pub mod booth;
pub mod coercer;
mod config;
mod error;
mod report;
mod scenarios;

pub use crate::{
    coercer::{Baseline, Classifier, Surrendered, VisualMatch},
    config::{ActivationOrder, Adversary, ScenarioConfig},
    error::SimError,
    report::{chance_bound, wilson, Detection, Interval, Outcome, ScenarioReport, TrialRecord, Truth, Violation},
    scenarios::{run_scenario, run_with, trial_rng},
};
