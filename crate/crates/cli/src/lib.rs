//! `trip`: operator commands over a ledger file and a key file.
//!
//! Every command is a thin shell over the library crates. Exit codes: 0 on
//! success, 1 when a verification fails, 2 on usage or runtime errors.

mod commands;
mod error;
mod roll;

use std::{io::Write, path::PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use trip_core::GroupId;
use trip_ledger::RevotePolicy;
use trip_sim::ActivationOrder;

pub use crate::{error::CliError, roll::parse_roll};

#[derive(Debug, Parser)]
#[command(name = "trip", version, about = "Coercion-resistant in-person registration: operator tooling")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Ledger file.
    #[arg(long, global = true, default_value = "ledger.bin")]
    pub ledger: PathBuf,
    /// Key file written by `setup`.
    #[arg(long, global = true, default_value = "keys.json")]
    pub keys: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Leave wall-clock times and durations out of the output.
    #[arg(long, global = true)]
    pub no_timestamps: bool,
    /// Seed for every random choice; the OS is used when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genesis, key generation and roll import.
    Setup(SetupArgs),
    /// Prints a batch of envelopes and publishes their commitments.
    EnvelopeBatch(EnvelopeArgs),
    /// Runs the HTTP service over the ledger and key file.
    Serve(ServeArgs),
    /// Replays a ceremony fixture and writes its transcript.
    CeremonyReplay(ReplayArgs),
    /// Runs the offline and online activation checks on a receipt bundle.
    VerifyCredential(VerifyArgs),
    /// Opens or closes a voting event.
    #[command(subcommand)]
    Event(EventCommand),
    /// Casts a ballot with a stored credential.
    Cast(CastArgs),
    /// Tallies a closed event and publishes the result.
    Tally(TallyArgs),
    /// Runs a simulation scenario.
    Scenario(ScenarioArgs),
    #[command(subcommand)]
    Ledger(LedgerCommand),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    /// Roll file: one `V_id display name` per line.
    #[arg(long)]
    pub roll: PathBuf,
    #[arg(long, value_parser = parse_group, default_value = "production-curve")]
    pub group: GroupId,
    #[arg(long, default_value_t = 1)]
    pub officials: usize,
    #[arg(long, default_value_t = 1)]
    pub kiosks: usize,
    #[arg(long, default_value_t = 1)]
    pub printers: usize,
    #[arg(long, default_value_t = 3)]
    pub talliers: usize,
    #[arg(long, default_value_t = 2)]
    pub threshold: usize,
    /// Standing-vote entity name; repeatable.
    #[arg(long = "entity")]
    pub entities: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub printer: usize,
    /// Writes the envelopes as a JSON list of base64 strings.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Service config JSON; `TRIP_*` variables override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub fixture: PathBuf,
    /// Transcript destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Creates the election in the ledger and key files instead of memory.
    #[arg(long, conflicts_with = "existing")]
    pub persist: bool,
    /// Runs the visits against the election already in the ledger and key files.
    #[arg(long)]
    pub existing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A bundle `{q1, envelope, q2}` or a whole transcript.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Required for bare bundles; taken from the transcript otherwise.
    #[arg(long)]
    pub v_id: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub visit: usize,
    /// Bundle position within the visit, real first.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Records the activation on the ledger when every check passes.
    #[arg(long)]
    pub commit: bool,
    /// Stores the activated credential for `cast`.
    #[arg(long, requires = "commit")]
    pub save_credential: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EventCommand {
    Open {
        id: String,
        #[arg(long)]
        options: usize,
        #[arg(long, value_enum, default_value_t = Revote::LastCounts)]
        revote: Revote,
        /// At most one counted ballot per credential.
        #[arg(long)]
        vote_limit: bool,
    },
    Close {
        id: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Revote {
    Forbid,
    LastCounts,
}

impl From<Revote> for RevotePolicy {
    fn from(r: Revote) -> Self {
        match r {
            Revote::Forbid => RevotePolicy::Forbid,
            Revote::LastCounts => RevotePolicy::LastCounts,
        }
    }
}

#[derive(Debug, Args)]
pub struct CastArgs {
    /// Credential file written by `verify-credential --save-credential`.
    #[arg(long)]
    pub credential: PathBuf,
    #[arg(long)]
    pub event: String,
    #[arg(long)]
    pub option: usize,
}

#[derive(Debug, Args)]
pub struct TallyArgs {
    pub event: String,
    /// Tallier indices, comma separated; the first `t` by default.
    #[arg(long, value_delimiter = ',')]
    pub talliers: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Adversary kind, e.g. `kiosk-guess`; omit when `--config` is given.
    pub kind: Option<String>,
    /// Full scenario config JSON.
    #[arg(long, conflicts_with = "kind")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub envelopes: usize,
    #[arg(long, default_value_t = 3)]
    pub voters: usize,
    #[arg(long, value_parser = parse_group, default_value = "production-curve")]
    pub group: GroupId,
    #[arg(long)]
    pub fake_fraction: Option<f64>,
    #[arg(long)]
    pub buckets: Option<u8>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub advanced: bool,
    #[arg(long, value_enum)]
    pub activation: Option<Activation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Activation {
    Shuffled,
    PrintOrder,
}

impl From<Activation> for ActivationOrder {
    fn from(a: Activation) -> Self {
        match a {
            Activation::Shuffled => ActivationOrder::Shuffled,
            Activation::PrintOrder => ActivationOrder::PrintOrder,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum LedgerCommand {
    /// Re-verifies every record and signature; names the first bad index.
    Audit,
    /// Prints one line per entry.
    Show,
}

fn parse_group(s: &str) -> Result<GroupId, String> {
    s.parse().map_err(|e: trip_core::CryptoError| e.to_string())
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let c = &cli.config;
    match &cli.command {
        Command::Setup(a) => commands::setup(c, a, out),
        Command::EnvelopeBatch(a) => commands::envelope_batch(c, a, out),
        Command::Serve(a) => commands::serve(c, a),
        Command::CeremonyReplay(a) => commands::ceremony_replay(c, a, out),
        Command::VerifyCredential(a) => commands::verify_credential(c, a, out),
        Command::Event(e) => commands::event(c, e, out),
        Command::Cast(a) => commands::cast(c, a, out),
        Command::Tally(a) => commands::tally(c, a, out),
        Command::Scenario(a) => commands::scenario(c, a, out),
        Command::Ledger(LedgerCommand::Audit) => commands::ledger_audit(c, out),
        Command::Ledger(LedgerCommand::Show) => commands::ledger_show(c, out),
    }
}
