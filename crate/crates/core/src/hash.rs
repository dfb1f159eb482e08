//! SHA-256 and hash-to-scalar.

use sha2::{Digest as _, Sha256};

use crate::{codec::concat, Group};

/// A 256-bit SHA-256 digest.
pub type Digest = [u8; 32];

pub fn hash(data: &[u8]) -> Digest {
    Sha256::digest(data).into()
}

/// Derives a challenge scalar from `tag ‖ transcript`.
///
/// Two counter-separated SHA-256 blocks are reduced together so the result is
/// close to uniform mod `q` even for 252-bit orders.
pub fn fiat_shamir_challenge<G: Group>(tag: &[u8], transcript: &[u8]) -> G::Scalar {
    let input = concat(&[tag, transcript]);
    let mut wide = [0_u8; 64];
    for (counter, half) in wide.chunks_exact_mut(32).enumerate() {
        let mut h = Sha256::new();
        h.update([counter as u8]);
        h.update(&input);
        half.copy_from_slice(&h.finalize());
    }
    G::reduce_wide(&wide)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Ristretto, TestGroup};

    #[test]
    fn empty_string_digest_matches_published_vector() {
        // FIPS 180-2 / `sha256sum < /dev/null`
        let expected = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
        let got: String = hash(b"").iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn abc_digest_matches_published_vector() {
        let expected = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
        let got: String = hash(b"abc").iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn appending_a_zero_byte_changes_the_digest() {
        let x = b"registration".to_vec();
        let mut y = x.clone();
        y.push(0);
        assert_eq!(hash(&x), hash(&x));
        assert_ne!(hash(&x), hash(&y));
    }

    #[test]
    fn challenges_are_deterministic_and_domain_separated() {
        let a = fiat_shamir_challenge::<Ristretto>(b"ballot", b"data");
        assert_eq!(a, fiat_shamir_challenge::<Ristretto>(b"ballot", b"data"));
        assert_ne!(a, fiat_shamir_challenge::<Ristretto>(b"tally", b"data"));
        // moving a byte between tag and transcript must not collide
        assert_ne!(fiat_shamir_challenge::<Ristretto>(b"ab", b"c"), fiat_shamir_challenge::<Ristretto>(b"a", b"bc"));
    }

    #[test]
    fn challenges_are_reduced() {
        for i in 0..200_u32 {
            let c = fiat_shamir_challenge::<TestGroup>(b"t", &i.to_be_bytes());
            assert!(c.value() < 11);
            let c = fiat_shamir_challenge::<Ristretto>(b"t", &i.to_be_bytes());
            assert!(Ristretto::decode_scalar(&Ristretto::encode_scalar(&c)).is_some());
        }
    }
}
