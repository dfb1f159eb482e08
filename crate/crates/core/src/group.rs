//! Prime-order group abstraction.

use std::{
    fmt,
    ops::{Add, Mul, Neg, Sub},
    str::FromStr,
};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::{CryptoError, Ristretto, TestGroup};

/// Runtime identifier of a group profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupId {
    /// Order-11 subgroup of `Z_23^*` with generators 2 and 3.
    TestModP,
    /// Ristretto255.
    ProductionCurve,
}

impl GroupId {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupId::TestModP => "test-mod-p",
            GroupId::ProductionCurve => "production-curve",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            GroupId::TestModP => 1,
            GroupId::ProductionCurve => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(GroupId::TestModP),
            2 => Some(GroupId::ProductionCurve),
            _ => None,
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupId {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "test-mod-p" | "test" => Ok(GroupId::TestModP),
            "production-curve" | "production" | "ristretto255" => Ok(GroupId::ProductionCurve),
            other => Err(CryptoError::UnknownProfile(other.to_owned())),
        }
    }
}

/// A cyclic group of prime order `q` with two independent generators.
///
/// The group is written multiplicatively. Element and scalar encodings are
/// fixed-length, big-endian and canonical; decoders reject anything else.
pub trait Group: Copy + Clone + fmt::Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Copy
        + Eq
        + fmt::Debug
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;
    type Element: Copy + Eq + fmt::Debug + Send + Sync;

    const ID: GroupId;
    const ELEMENT_LEN: usize;
    const SCALAR_LEN: usize;

    fn g1() -> Self::Element;
    fn g2() -> Self::Element;
    fn identity() -> Self::Element;
    fn op(a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(a: &Self::Element) -> Self::Element;
    fn pow(base: &Self::Element, exp: &Self::Scalar) -> Self::Element;

    fn scalar(n: u64) -> Self::Scalar;
    fn invert_scalar(s: &Self::Scalar) -> Option<Self::Scalar>;
    /// Interprets 64 bytes as a big-endian integer and reduces it mod `q`.
    fn reduce_wide(bytes: &[u8; 64]) -> Self::Scalar;

    fn encode_element(e: &Self::Element) -> Vec<u8>;
    fn decode_element(bytes: &[u8]) -> Option<Self::Element>;
    fn encode_scalar(s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(bytes: &[u8]) -> Option<Self::Scalar>;

    /// Big-endian encoding of the group order.
    fn order_be() -> Vec<u8>;
    /// Human-readable description of the modulus or curve.
    fn structure() -> String;

    fn params(lambda: u32) -> GroupParams {
        GroupParams {
            id: Self::ID,
            order: Self::order_be(),
            g1: Self::encode_element(&Self::g1()),
            g2: Self::encode_element(&Self::g2()),
            structure: Self::structure(),
            lambda,
        }
    }
}

pub fn div<G: Group>(a: &G::Element, b: &G::Element) -> G::Element {
    G::op(a, &G::inverse(b))
}

pub fn zero<G: Group>() -> G::Scalar {
    G::scalar(0)
}

pub fn random_scalar<G: Group, R: RngCore + CryptoRng>(rng: &mut R) -> G::Scalar {
    let mut wide = [0_u8; 64];
    rng.fill_bytes(&mut wide);
    G::reduce_wide(&wide)
}

pub fn random_nonzero_scalar<G: Group, R: RngCore + CryptoRng>(rng: &mut R) -> G::Scalar {
    loop {
        let s = random_scalar::<G, R>(rng);
        if s != zero::<G>() {
            return s;
        }
    }
}

/// Reduces an arbitrary big-endian byte string (at most 64 bytes) mod `q`.
pub fn scalar_from_be_bytes<G: Group>(bytes: &[u8]) -> G::Scalar {
    assert!(bytes.len() <= 64, "at most 64 bytes can be reduced");
    let mut wide = [0_u8; 64];
    wide[64 - bytes.len()..].copy_from_slice(bytes);
    G::reduce_wide(&wide)
}

/// Product of `bases[i]^exps[i]`.
pub fn multi_pow<G: Group>(bases: &[G::Element], exps: &[G::Scalar]) -> G::Element {
    debug_assert_eq!(bases.len(), exps.len());
    bases.iter().zip(exps).fold(G::identity(), |acc, (b, e)| G::op(&acc, &G::pow(b, e)))
}

/// Public description of a group profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    pub id: GroupId,
    /// Big-endian group order `q`.
    pub order: Vec<u8>,
    pub g1: Vec<u8>,
    pub g2: Vec<u8>,
    pub structure: String,
    pub lambda: u32,
}

impl GroupParams {
    pub fn order_bits(&self) -> usize {
        let first = self.order.iter().position(|&b| b != 0);
        match first {
            None => 0,
            Some(i) => (self.order.len() - i - 1) * 8 + (8 - self.order[i].leading_zeros() as usize),
        }
    }

    /// Length in bytes of envelope challenge nonces.
    pub fn nonce_len(&self) -> usize {
        (self.lambda as usize).div_ceil(8)
    }
}

/// Builds and validates the parameters for `profile`.
pub fn group_setup(profile: GroupId, lambda: u32) -> Result<GroupParams, CryptoError> {
    match profile {
        GroupId::TestModP => Ok(TestGroup::params(lambda)),
        GroupId::ProductionCurve => {
            if lambda < 128 {
                return Err(CryptoError::WeakSecurityParameter(lambda));
            }
            Ok(Ristretto::params(lambda))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn test_profile_is_fixed() {
        let params = group_setup(GroupId::TestModP, 0).unwrap();
        assert_eq!(params.order, vec![11]);
        assert_eq!(params.g1, vec![2]);
        assert_eq!(params.g2, vec![3]);
        assert!(params.structure.contains("23"));
        assert_eq!(params, group_setup(GroupId::TestModP, 0).unwrap());
    }

    #[test]
    fn test_generators_have_order_q_by_direct_exponentiation() {
        // independent square-and-multiply oracle, no group code involved
        let pow_mod = |mut b: u64, mut e: u64, m: u64| {
            let mut acc = 1;
            b %= m;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % m;
                }
                b = b * b % m;
                e >>= 1;
            }
            acc
        };
        assert!(is_prime(23) && is_prime(11));
        assert_eq!(pow_mod(2, 11, 23), 1);
        assert_eq!(pow_mod(3, 11, 23), 1);
        assert_ne!(pow_mod(2, 1, 23), 1);
        assert_ne!(pow_mod(3, 1, 23), 1);
    }

    #[test]
    fn production_profile_has_large_prime_order() {
        let params = group_setup(GroupId::ProductionCurve, 128).unwrap();
        assert!(params.order_bits() >= 250);
        assert_ne!(params.g1, params.g2);
        assert_eq!(group_setup(GroupId::ProductionCurve, 64), Err(CryptoError::WeakSecurityParameter(64)));
    }

    #[test]
    fn unknown_profile_is_rejected() {
        assert!(matches!("secp256k1".parse::<GroupId>(), Err(CryptoError::UnknownProfile(_))));
        assert_eq!("test-mod-p".parse::<GroupId>().unwrap(), GroupId::TestModP);
    }

    fn check_generators<G: Group>() {
        let q_minus_one = -G::scalar(1);
        for g in [G::g1(), G::g2()] {
            assert_ne!(g, G::identity());
            // g^q = g^(q-1) * g = identity
            assert_eq!(G::op(&G::pow(&g, &q_minus_one), &g), G::identity());
        }
        assert_ne!(G::g1(), G::g2());
    }

    #[test]
    fn generators_have_prime_order() {
        check_generators::<TestGroup>();
        check_generators::<Ristretto>();
    }
}
