//! Signing inputs shared by the ceremony actors and the ledger.
//!
//! Each function lays out its fields in the order the actors concatenate
//! them, using the length-prefixed codec so that no two distinct inputs
//! produce the same bytes.

use trip_core::{codec::Writer, hash, Ciphertext, Digest, Group, Signature};

use crate::EntryKind;

/// Check-in attestation `σ_r` over `V_id ‖ d`.
pub fn checkin(v_id: &str, d: u64) -> Vec<u8> {
    Writer::new().field(v_id.as_bytes()).u64(d).finish()
}

/// Commit attestation `σ_k1` over `V_id ‖ d ‖ V_e ‖ Y_c`.
pub fn kiosk_commit<G: Group>(v_id: &str, d: u64, v_e: &Ciphertext<G>, y_c: &[G::Element; 3]) -> Vec<u8> {
    let mut w = Writer::new();
    w.field(v_id.as_bytes()).u64(d).field(&v_e.to_bytes());
    for y in y_c {
        w.element::<G>(y);
    }
    w.finish()
}

/// Check-out ticket signature `σ_k2` over `V_id ‖ d ‖ V_e`.
pub fn kiosk_checkout<G: Group>(v_id: &str, d: u64, v_e: &Ciphertext<G>) -> Vec<u8> {
    Writer::new().field(v_id.as_bytes()).u64(d).field(&v_e.to_bytes()).finish()
}

/// Official's check-out signature over `V_id ‖ d ‖ V_e ‖ σ_k2`.
pub fn official_checkout<G: Group>(v_id: &str, d: u64, v_e: &Ciphertext<G>, kiosk_sig: &Signature<G>) -> Vec<u8> {
    Writer::new().field(v_id.as_bytes()).u64(d).field(&v_e.to_bytes()).field(&kiosk_sig.to_bytes()).finish()
}

/// `H(V_id ‖ d ‖ V_e ‖ v ‖ Y_c ‖ c ‖ r)`, the receipt digest under `σ_k3`.
///
/// `secret` is the encoded credential secret, or the absent marker for
/// standing votes; `challenge` is the raw envelope nonce.
#[allow(clippy::too_many_arguments)]
pub fn receipt_digest<G: Group>(
    v_id: &str,
    d: u64,
    v_e: &Ciphertext<G>,
    secret: &[u8],
    y_c: &[G::Element; 3],
    challenge: &[u8],
    response: &G::Scalar,
) -> Digest {
    let mut w = Writer::new();
    w.field(v_id.as_bytes()).u64(d).field(&v_e.to_bytes()).field(secret);
    for y in y_c {
        w.element::<G>(y);
    }
    w.field(challenge).scalar::<G>(response);
    hash(&w.finish())
}

/// Receipt signature `σ_k3` over `V ‖ h`.
pub fn receipt<G: Group>(credential: &G::Element, digest: &Digest) -> Vec<u8> {
    Writer::new().element::<G>(credential).field(digest).finish()
}

/// Printer signature `σ_p` over `H(c)`.
pub fn envelope(challenge_hash: &Digest) -> Vec<u8> {
    challenge_hash.to_vec()
}

/// Ballot signature `σ_v` over `E1 ‖ E2 ‖ Pf ‖ ε`.
pub fn ballot<G: Group>(e1: &Ciphertext<G>, e2: &Ciphertext<G>, proof: &[u8], event: &str) -> Vec<u8> {
    Writer::new().field(&e1.to_bytes()).field(&e2.to_bytes()).field(proof).field(event.as_bytes()).finish()
}

/// Signing input for entry kinds that have no ceremony-defined signature.
pub fn entry(kind: EntryKind, body: &[u8]) -> Vec<u8> {
    let mut w = Writer::new();
    w.field(b"trip/ledger/entry").field(&[kind.tag()]).long_field(body);
    w.finish()
}
