//! Service state: election, clock, RNG and the session store.

use std::{
    collections::HashMap,
    path::Path,
    sync::{Arc, Mutex},
};

use axum::http::StatusCode;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use trip_core::Group;
use trip_ledger::Ledger;
use trip_protocol::{Clock, Election, ElectionSecrets, KioskSession, VoterDevice};

use crate::{ApiError, ServiceConfig, ServiceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionRole {
    Official,
    VoterAtKiosk,
    VoterDevice,
}

pub enum SessionState<G: Group> {
    Official,
    Kiosk(Box<KioskSession<G>>),
    Device(VoterDevice<G>),
}

impl<G: Group> SessionState<G> {
    pub fn role(&self) -> SessionRole {
        match self {
            SessionState::Official => SessionRole::Official,
            SessionState::Kiosk(_) => SessionRole::VoterAtKiosk,
            SessionState::Device(_) => SessionRole::VoterDevice,
        }
    }
}

struct Session<G: Group> {
    state: SessionState<G>,
    last_used: u64,
}

pub struct Service<G: Group> {
    pub election: Election<G>,
    pub config: ServiceConfig,
    pub clock: Arc<dyn Clock>,
    rng: Mutex<ChaCha20Rng>,
    sessions: Mutex<HashMap<String, Session<G>>>,
}

impl<G: Group> Service<G> {
    /// `seed` fixes the RNG for tests; otherwise it is seeded from the OS.
    pub fn new(election: Election<G>, config: ServiceConfig, clock: Arc<dyn Clock>, seed: Option<u64>) -> Self {
        let rng = seed.map_or_else(ChaCha20Rng::from_entropy, ChaCha20Rng::seed_from_u64);
        Self { election, config, clock, rng: Mutex::new(rng), sessions: Mutex::new(HashMap::new()) }
    }

    /// Opens the ledger file and key file named in `config`.
    pub fn from_files(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let ledger_path = config.ledger.clone().ok_or_else(|| ServiceError::Config("no ledger path".into()))?;
        let keys_path = config.keys.clone().ok_or_else(|| ServiceError::Config("no key file path".into()))?;
        let election = load_election::<G>(&ledger_path, &keys_path)?;
        Ok(Self::new(election, config, clock, None))
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    pub fn with_rng<T>(&self, f: impl FnOnce(&mut ChaCha20Rng) -> T) -> T {
        f(&mut self.rng.lock().expect("rng lock poisoned"))
    }

    /// Stores a new session and returns its unguessable 256-bit id.
    pub fn open_session(&self, state: SessionState<G>) -> (String, u64) {
        let id = self.with_rng(|rng| {
            let mut bytes = [0u8; 32];
            rng.fill_bytes(&mut bytes);
            hex::encode(bytes)
        });
        let now = self.now();
        self.sessions.lock().expect("session lock poisoned").insert(id.clone(), Session { state, last_used: now });
        (id, now + self.config.idle_timeout)
    }

    pub fn close_session(&self, id: &str) -> bool {
        self.sessions.lock().expect("session lock poisoned").remove(id).is_some()
    }

    /// Runs `f` on session `id` after checking expiry and role. Steps of one
    /// session are serialized by the store lock.
    pub fn with_session<T>(
        &self,
        id: &str,
        role: Option<SessionRole>,
        f: impl FnOnce(&mut SessionState<G>, &mut ChaCha20Rng) -> Result<T, ApiError>,
    ) -> Result<(T, u64), ApiError> {
        let now = self.now();
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        let session = sessions.get_mut(id).ok_or_else(|| ApiError::not_found("unknown-session", "no such session"))?;
        if now.saturating_sub(session.last_used) > self.config.idle_timeout {
            sessions.remove(id);
            return Err(ApiError::new(StatusCode::GONE, "session-expired", "session idle for too long"));
        }
        if let Some(role) = role {
            if session.state.role() != role {
                return Err(ApiError::new(
                    StatusCode::FORBIDDEN,
                    "wrong-role",
                    format!("session is a {:?} session", session.state.role()),
                ));
            }
        }
        session.last_used = now;
        let out = self.with_rng(|rng| f(&mut session.state, rng))?;
        Ok((out, now + self.config.idle_timeout))
    }

    pub fn ledger(&self) -> &Ledger<G> {
        &self.election.ledger
    }
}

pub fn load_election<G: Group>(ledger: &Path, keys: &Path) -> Result<Election<G>, ServiceError> {
    let text = std::fs::read_to_string(keys).map_err(|e| ServiceError::Config(format!("{}: {e}", keys.display())))?;
    let secrets: ElectionSecrets =
        serde_json::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", keys.display())))?;
    Ok(Election::restore(&secrets, Ledger::open(ledger)?)?)
}
