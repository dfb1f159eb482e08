//! Cryptographic core for in-person coercion-resistant voter registration.
//!
//! Everything is written against the [`Group`] trait, which has two
//! implementations: [`TestGroup`], the order-11 subgroup of `Z_23^*` used for
//! brute-force oracles, and [`Ristretto`], the production prime-order group.
//!
//! The building blocks are:
//!
//! - [`elgamal`]: M-ElGamal with two generators and two secret keys.
//! - [`threshold`]: (t, n) distributed key generation and verifiable partial
//!   decryption.
//! - [`schnorr`]: Schnorr signatures over `g1`.
//! - [`zkp`]: the sigma protocol for equality of discrete logarithms, with
//!   honest and simulated construction, plus Fiat-Shamir variants.
//! - [`pet`]: plaintext equivalence tests run jointly by the talliers.

pub mod codec;
pub mod elgamal;
mod error;
pub mod group;
pub mod hash;
mod modp;
pub mod pet;
mod ristretto;
pub mod schnorr;
pub mod threshold;
pub mod zkp;

pub use crate::{
    elgamal::Ciphertext,
    error::CryptoError,
    group::{group_setup, Group, GroupId, GroupParams},
    hash::{fiat_shamir_challenge, hash, Digest},
    modp::TestGroup,
    ristretto::Ristretto,
    schnorr::{Signature, SigningKeypair},
    threshold::{ElectionPublicKey, TallierKeyMaterial, TallierShare},
    zkp::{ProverState, ZkpTranscript},
};

/// Runs `$body` with the type alias `$g` bound to the group selected by a
/// runtime [`GroupId`].
#[macro_export]
macro_rules! with_group {
    ($id:expr, $g:ident => $body:expr) => {
        match $id {
            $crate::GroupId::TestModP => {
                type $g = $crate::TestGroup;
                $body
            }
            $crate::GroupId::ProductionCurve => {
                type $g = $crate::Ristretto;
                $body
            }
        }
    };
}
