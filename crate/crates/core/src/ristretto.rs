use curve25519_dalek::{
    constants::RISTRETTO_BASEPOINT_POINT,
    ristretto::{CompressedRistretto, RistrettoPoint},
    scalar::Scalar,
    traits::Identity,
};
use sha2::Sha512;

use crate::group::{Group, GroupId};

const G2_DOMAIN: &[u8] = b"trip/ristretto255/g2";

/// Ristretto255, the production group.
///
/// `g1` is the standard basepoint; `g2` is hashed to the curve from a fixed
/// domain string, so nobody knows `log_g1(g2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ristretto;

impl Group for Ristretto {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    const ID: GroupId = GroupId::ProductionCurve;
    const ELEMENT_LEN: usize = 32;
    const SCALAR_LEN: usize = 32;

    fn g1() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn g2() -> RistrettoPoint {
        RistrettoPoint::hash_from_bytes::<Sha512>(G2_DOMAIN)
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn op(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn inverse(a: &RistrettoPoint) -> RistrettoPoint {
        -a
    }

    fn pow(base: &RistrettoPoint, exp: &Scalar) -> RistrettoPoint {
        base * exp
    }

    fn scalar(n: u64) -> Scalar {
        Scalar::from(n)
    }

    fn invert_scalar(s: &Scalar) -> Option<Scalar> {
        (*s != Scalar::ZERO).then(|| s.invert())
    }

    fn reduce_wide(bytes: &[u8; 64]) -> Scalar {
        let mut le = *bytes;
        le.reverse();
        Scalar::from_bytes_mod_order_wide(&le)
    }

    fn encode_element(e: &RistrettoPoint) -> Vec<u8> {
        e.compress().to_bytes().to_vec()
    }

    fn decode_element(bytes: &[u8]) -> Option<RistrettoPoint> {
        CompressedRistretto::from_slice(bytes).ok()?.decompress()
    }

    fn encode_scalar(s: &Scalar) -> Vec<u8> {
        let mut be = s.to_bytes();
        be.reverse();
        be.to_vec()
    }

    fn decode_scalar(bytes: &[u8]) -> Option<Scalar> {
        let mut le: [u8; 32] = bytes.try_into().ok()?;
        le.reverse();
        Scalar::from_canonical_bytes(le).into()
    }

    fn order_be() -> Vec<u8> {
        // l = 2^252 + 27742317777372353535851937790883648493
        let mut be = (-Scalar::ONE).to_bytes();
        be.reverse();
        // l - 1 ends in ...ec, so adding one never carries
        be[31] += 1;
        be.to_vec()
    }

    fn structure() -> String {
        "ristretto255".to_owned()
    }
}
