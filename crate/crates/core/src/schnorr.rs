//! Schnorr signatures over `g1`.
//!
//! Messages are pre-hashed under a scheme-specific tag. Nonces are derived
//! deterministically from the secret key and the message digest.

use rand::{CryptoRng, RngCore};

use crate::{
    codec::{Reader, Writer},
    group::{random_nonzero_scalar, Group},
    hash::{fiat_shamir_challenge, hash},
    CryptoError,
};

const MESSAGE_TAG: &[u8] = b"trip/schnorr/message";
const NONCE_TAG: &[u8] = b"trip/schnorr/nonce";
const CHALLENGE_TAG: &[u8] = b"trip/schnorr/challenge";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigningKeypair<G: Group> {
    sk: G::Scalar,
    pk: G::Element,
}

impl<G: Group> SigningKeypair<G> {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(random_nonzero_scalar::<G, R>(rng))
    }

    pub fn from_secret(sk: G::Scalar) -> Self {
        Self { sk, pk: pubkey::<G>(&sk) }
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.sk
    }

    pub fn public(&self) -> &G::Element {
        &self.pk
    }

    pub fn sign(&self, msg: &[u8]) -> Signature<G> {
        sign::<G>(&self.sk, msg)
    }
}

/// `(R, s)` with `g1^s = R · pk^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature<G: Group> {
    commit: G::Element,
    response: G::Scalar,
}

impl<G: Group> Signature<G> {
    pub const LEN: usize = G::ELEMENT_LEN + G::SCALAR_LEN;

    /// Fixed-length encoding: element ‖ scalar, no length prefixes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = G::encode_element(&self.commit);
        out.extend(G::encode_scalar(&self.response));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != Self::LEN {
            return Err(CryptoError::MalformedSignature);
        }
        let (commit, response) = bytes.split_at(G::ELEMENT_LEN);
        Ok(Self {
            commit: G::decode_element(commit).ok_or(CryptoError::MalformedSignature)?,
            response: G::decode_scalar(response).ok_or(CryptoError::MalformedSignature)?,
        })
    }
}

pub fn pubkey<G: Group>(sk: &G::Scalar) -> G::Element {
    G::pow(&G::g1(), sk)
}

fn challenge<G: Group>(commit: &G::Element, pk: &G::Element, digest: &[u8]) -> G::Scalar {
    let transcript = Writer::new().element::<G>(commit).element::<G>(pk).field(digest).finish();
    fiat_shamir_challenge::<G>(CHALLENGE_TAG, &transcript)
}

fn message_digest(msg: &[u8]) -> [u8; 32] {
    let mut input = MESSAGE_TAG.to_vec();
    input.extend_from_slice(msg);
    hash(&input)
}

pub fn sign<G: Group>(sk: &G::Scalar, msg: &[u8]) -> Signature<G> {
    let pk = pubkey::<G>(sk);
    let digest = message_digest(msg);
    let nonce_input = Writer::new().scalar::<G>(sk).field(&digest).finish();
    let k = fiat_shamir_challenge::<G>(NONCE_TAG, &nonce_input);
    let commit = G::pow(&G::g1(), &k);
    let e = challenge::<G>(&commit, &pk, &digest);
    Signature { commit, response: k + e * *sk }
}

pub fn verify<G: Group>(pk: &G::Element, sig: &Signature<G>, msg: &[u8]) -> bool {
    let digest = message_digest(msg);
    let e = challenge::<G>(&sig.commit, pk, &digest);
    G::pow(&G::g1(), &sig.response) == G::op(&sig.commit, &G::pow(pk, &e))
}

/// Decodes `sig_bytes` and verifies it; malformed encodings fail.
pub fn verify_bytes<G: Group>(pk: &G::Element, sig_bytes: &[u8], msg: &[u8]) -> bool {
    Signature::<G>::from_bytes(sig_bytes).is_ok_and(|sig| verify(pk, &sig, msg))
}

impl<G: Group> Signature<G> {
    pub fn read(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Self::from_bytes(r.field()?)
    }
}
