//! Election setup: actor keys, distributed election key, genesis entry.

use std::collections::HashSet;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use trip_core::{threshold::meg_keygen_distributed, Group, GroupId, SigningKeypair, TallierKeyMaterial, TallierShare};
use trip_ledger::{Entry, EntryBody, KeyBinding, Ledger, Role, RollEntry, StandingEntity};

use crate::{kiosk::KioskConfig, ProtocolError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionConfig {
    pub officials: usize,
    pub kiosks: usize,
    pub printers: usize,
    pub talliers: usize,
    pub threshold: usize,
    pub roll: Vec<RollEntry>,
    /// Names of standing-vote entities.
    #[serde(default)]
    pub entities: Vec<String>,
}

impl ElectionConfig {
    /// One of each actor, 2-of-3 talliers, voters `v0..v{voters}`.
    pub fn small(voters: usize) -> Self {
        Self {
            officials: 1,
            kiosks: 1,
            printers: 1,
            talliers: 3,
            threshold: 2,
            roll: (0..voters).map(|i| RollEntry { v_id: format!("v{i}"), name: format!("Voter {i}") }).collect(),
            entities: Vec::new(),
        }
    }
}

/// Every secret an election authority holds, plus the live ledger.
pub struct Election<G: Group> {
    pub ledger: Ledger<G>,
    pub officials: Vec<SigningKeypair<G>>,
    pub kiosks: Vec<SigningKeypair<G>>,
    pub printers: Vec<SigningKeypair<G>>,
    pub talliers: Vec<SigningKeypair<G>>,
    pub key_material: TallierKeyMaterial<G>,
    /// Standing-vote entities and their signing keys.
    pub entities: Vec<(String, SigningKeypair<G>)>,
}

/// Generates all keys and appends the genesis binding to `ledger`.
pub fn setup_election<G: Group, R: RngCore + CryptoRng>(
    config: &ElectionConfig,
    ledger: Ledger<G>,
    rng: &mut R,
) -> Result<Election<G>, ProtocolError> {
    // keys are drawn distinct so roles never alias, which matters in the test group
    let mut seen = HashSet::new();
    let mut fresh = |rng: &mut R| loop {
        let key = SigningKeypair::<G>::generate(rng);
        if seen.insert(G::encode_element(key.public())) {
            break key;
        }
    };
    let wanted =
        [config.officials, config.kiosks, config.printers, config.talliers].iter().map(|n| n.max(&1)).sum::<usize>()
            + config.entities.len();
    if wanted as u128 >= group_order::<G>() {
        return Err(ProtocolError::TooManyKeys(wanted));
    }
    let mut keys = |n: usize, rng: &mut R| (0..n.max(1)).map(|_| fresh(rng)).collect::<Vec<_>>();
    let officials = keys(config.officials, rng);
    let kiosks = keys(config.kiosks, rng);
    let printers = keys(config.printers, rng);
    let talliers = keys(config.talliers, rng);
    let entities: Vec<_> = config.entities.iter().map(|name| (name.clone(), fresh(rng))).collect();
    let key_material = meg_keygen_distributed::<G, R>(config.talliers, config.threshold, rng)?;

    let mut bound = Vec::new();
    for (role, group) in
        [(Role::Official, &officials), (Role::Kiosk, &kiosks), (Role::Printer, &printers), (Role::Tallier, &talliers)]
    {
        bound.extend(group.iter().map(|k| (role, *k.public())));
    }
    let genesis = KeyBinding {
        group: G::ID,
        keys: bound,
        election: Some(key_material.public.clone()),
        entities: entities
            .iter()
            .map(|(name, key)| StandingEntity { name: name.clone(), credential: *key.public() })
            .collect(),
        roll: config.roll.clone(),
    };
    ledger.append(Entry::sign(&officials[0], EntryBody::KeyBinding(genesis)))?;
    Ok(Election { ledger, officials, kiosks, printers, talliers, key_material, entities })
}

fn group_order<G: Group>() -> u128 {
    G::order_be().iter().take(16).fold(0u128, |acc, b| acc.saturating_mul(256).saturating_add(*b as u128))
}

impl<G: Group> Election<G> {
    pub fn kiosk_config(&self, kiosk: usize) -> Result<KioskConfig<G>, ProtocolError> {
        KioskConfig::from_ledger(self.kiosks[kiosk], &self.ledger)
    }

    pub fn secrets(&self) -> ElectionSecrets {
        let keys = |ks: &[SigningKeypair<G>]| ks.iter().map(|k| hex::encode(G::encode_scalar(k.secret()))).collect();
        ElectionSecrets {
            group: G::ID,
            officials: keys(&self.officials),
            kiosks: keys(&self.kiosks),
            printers: keys(&self.printers),
            talliers: keys(&self.talliers),
            shares: self
                .key_material
                .shares
                .iter()
                .map(|s| {
                    let (s1, s2) = s.secrets();
                    ShareRecord {
                        index: s.index(),
                        s1: hex::encode(G::encode_scalar(&s1)),
                        s2: hex::encode(G::encode_scalar(&s2)),
                    }
                })
                .collect(),
            entities: self
                .entities
                .iter()
                .map(|(name, k)| (name.clone(), hex::encode(G::encode_scalar(k.secret()))))
                .collect(),
        }
    }

    /// Rebuilds the authority's view from a key file and its ledger. Every
    /// key must match what the genesis entry binds.
    pub fn restore(secrets: &ElectionSecrets, ledger: Ledger<G>) -> Result<Self, ProtocolError> {
        if secrets.group != G::ID {
            return Err(ProtocolError::KeyFile("group profile differs from the ledger"));
        }
        let public = ledger.election_key().ok_or(ProtocolError::NoElectionKey)?;
        let keys = |hexes: &[String], role: Role| -> Result<Vec<SigningKeypair<G>>, ProtocolError> {
            hexes
                .iter()
                .map(|h| {
                    let key = SigningKeypair::from_secret(scalar::<G>(h)?);
                    if ledger.has_role(key.public(), role) {
                        Ok(key)
                    } else {
                        Err(ProtocolError::KeyFile("key is not bound on the ledger"))
                    }
                })
                .collect()
        };
        let officials = keys(&secrets.officials, Role::Official)?;
        let kiosks = keys(&secrets.kiosks, Role::Kiosk)?;
        let printers = keys(&secrets.printers, Role::Printer)?;
        let talliers = keys(&secrets.talliers, Role::Tallier)?;
        let shares = secrets
            .shares
            .iter()
            .map(|r| Ok(TallierShare::new(r.index, scalar::<G>(&r.s1)?, scalar::<G>(&r.s2)?)))
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        if shares.iter().any(|s| public.verification_key(s.index()) != Some(&s.verification_key())) {
            return Err(ProtocolError::KeyFile("tallier share does not match its verification key"));
        }
        let registry = ledger.entities();
        let entities = secrets
            .entities
            .iter()
            .map(|(name, h)| {
                let key = SigningKeypair::from_secret(scalar::<G>(h)?);
                if registry.iter().any(|e| e.name == *name && e.credential == *key.public()) {
                    Ok((name.clone(), key))
                } else {
                    Err(ProtocolError::KeyFile("entity key is not in the registry"))
                }
            })
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        if officials.is_empty() || kiosks.is_empty() || printers.is_empty() {
            return Err(ProtocolError::KeyFile("key file lacks an official, kiosk or printer"));
        }
        let key_material = TallierKeyMaterial { public, shares };
        Ok(Self { ledger, officials, kiosks, printers, talliers, key_material, entities })
    }
}

fn scalar<G: Group>(text: &str) -> Result<G::Scalar, ProtocolError> {
    let bytes = hex::decode(text.trim()).map_err(|_| ProtocolError::KeyFile("scalar is not hex"))?;
    G::decode_scalar(&bytes).ok_or(ProtocolError::KeyFile("scalar out of range"))
}

/// Tallier share as stored in a key file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRecord {
    pub index: u32,
    pub s1: String,
    pub s2: String,
}

/// Every authority secret as a JSON key file, scalars in big-endian hex.
/// One file holding all roles is an operator convenience for local runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionSecrets {
    pub group: GroupId,
    pub officials: Vec<String>,
    pub kiosks: Vec<String>,
    pub printers: Vec<String>,
    pub talliers: Vec<String>,
    pub shares: Vec<ShareRecord>,
    #[serde(default)]
    pub entities: Vec<(String, String)>,
}
