//! Printed and scanned payloads.
//!
//! Each payload is a tag byte (high nibble: format version, low nibble:
//! payload type) followed by length-prefixed fields in ceremony order.

use base64::{engine::general_purpose::STANDARD, Engine};
use serde::{Deserialize, Serialize};
use trip_core::{
    codec::{Reader, Writer},
    group::{scalar_from_be_bytes, zero},
    hash, Ciphertext, CryptoError, Digest, Group, Signature,
};

pub trait Payload: Sized {
    const TAG: u8;
    const NAME: &'static str;

    fn write_fields(&self, w: &mut Writer);
    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError>;

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::tagged(Self::TAG);
        self.write_fields(&mut w);
        w.finish()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes, Self::NAME);
        r.expect_tag(Self::TAG)?;
        let payload = Self::read_fields(&mut r)?;
        r.finish()?;
        Ok(payload)
    }

    /// Text form, which is what a QR code carries.
    fn to_base64(&self) -> String {
        STANDARD.encode(self.to_bytes())
    }

    fn from_base64(text: &str) -> Result<Self, CryptoError> {
        let bytes = STANDARD.decode(text.trim()).map_err(|_| CryptoError::Malformed(Self::NAME))?;
        Self::from_bytes(&bytes)
    }
}

/// Check-in ticket `t_in = V_id ‖ d ‖ R ‖ σ_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckInTicket<G: Group> {
    pub v_id: String,
    pub d: u64,
    pub official: G::Element,
    pub sig: Signature<G>,
}

impl<G: Group> Payload for CheckInTicket<G> {
    const TAG: u8 = 0x11;
    const NAME: &'static str = "check-in ticket";

    fn write_fields(&self, w: &mut Writer) {
        w.field(self.v_id.as_bytes()).u64(self.d).element::<G>(&self.official).field(&self.sig.to_bytes());
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(Self {
            v_id: r.utf8()?.to_owned(),
            d: r.u64()?,
            official: r.element::<G>()?,
            sig: Signature::from_bytes(r.field()?)?,
        })
    }
}

/// Envelope `e = (P, c, σ_p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope<G: Group> {
    pub printer: G::Element,
    /// The λ-bit nonce `c`.
    pub challenge: Vec<u8>,
    pub sig: Signature<G>,
}

impl<G: Group> Envelope<G> {
    pub fn challenge_hash(&self) -> Digest {
        hash(&self.challenge)
    }

    /// `c` read as a big-endian integer and reduced mod `q`.
    pub fn challenge_scalar(&self) -> G::Scalar {
        scalar_from_be_bytes::<G>(&self.challenge)
    }
}

impl<G: Group> Payload for Envelope<G> {
    const TAG: u8 = 0x12;
    const NAME: &'static str = "envelope";

    fn write_fields(&self, w: &mut Writer) {
        w.element::<G>(&self.printer).field(&self.challenge).field(&self.sig.to_bytes());
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let printer = r.element::<G>()?;
        let challenge = r.field()?;
        if challenge.is_empty() || challenge.len() > 64 {
            return Err(CryptoError::Malformed("envelope challenge"));
        }
        Ok(Self { printer, challenge: challenge.to_vec(), sig: Signature::from_bytes(r.field()?)? })
    }
}

/// First receipt payload `q1 = V_e ‖ Y_c ‖ σ_k1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitPayload<G: Group> {
    pub v_e: Ciphertext<G>,
    pub commit: [G::Element; 3],
    pub sig: Signature<G>,
}

impl<G: Group> Payload for CommitPayload<G> {
    const TAG: u8 = 0x13;
    const NAME: &'static str = "commit payload";

    fn write_fields(&self, w: &mut Writer) {
        self.v_e.write(w);
        for y in &self.commit {
            w.element::<G>(y);
        }
        w.field(&self.sig.to_bytes());
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let v_e = Ciphertext::read(r)?;
        let commit = [r.element::<G>()?, r.element::<G>()?, r.element::<G>()?];
        Ok(Self { v_e, commit, sig: Signature::from_bytes(r.field()?)? })
    }
}

/// Check-out ticket `t_ot = V_id ‖ d ‖ V_e ‖ K ‖ σ_k2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckoutTicket<G: Group> {
    pub v_id: String,
    pub d: u64,
    pub v_e: Ciphertext<G>,
    pub kiosk: G::Element,
    pub sig: Signature<G>,
}

impl<G: Group> Payload for CheckoutTicket<G> {
    const TAG: u8 = 0x14;
    const NAME: &'static str = "check-out ticket";

    fn write_fields(&self, w: &mut Writer) {
        w.field(self.v_id.as_bytes()).u64(self.d);
        self.v_e.write(w);
        w.element::<G>(&self.kiosk).field(&self.sig.to_bytes());
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(Self {
            v_id: r.utf8()?.to_owned(),
            d: r.u64()?,
            v_e: Ciphertext::read(r)?,
            kiosk: r.element::<G>()?,
            sig: Signature::from_bytes(r.field()?)?,
        })
    }
}

/// Second receipt payload `q2 = V_id ‖ d ‖ v ‖ r ‖ K ‖ σ_k3`.
///
/// Standing-vote bundles carry no credential secret; the field then holds
/// an all-zero scalar-length marker, which no generated secret can equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponsePayload<G: Group> {
    pub v_id: String,
    pub d: u64,
    pub secret: Option<G::Scalar>,
    pub response: G::Scalar,
    pub kiosk: G::Element,
    pub sig: Signature<G>,
}

/// Encodes the `v` field, absent or not, at scalar length.
pub fn secret_field<G: Group>(secret: Option<&G::Scalar>) -> Vec<u8> {
    match secret {
        Some(v) => G::encode_scalar(v),
        None => vec![0; G::SCALAR_LEN],
    }
}

impl<G: Group> Payload for ResponsePayload<G> {
    const TAG: u8 = 0x15;
    const NAME: &'static str = "response payload";

    fn write_fields(&self, w: &mut Writer) {
        w.field(self.v_id.as_bytes())
            .u64(self.d)
            .field(&secret_field::<G>(self.secret.as_ref()))
            .scalar::<G>(&self.response)
            .element::<G>(&self.kiosk)
            .field(&self.sig.to_bytes());
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        let v_id = r.utf8()?.to_owned();
        let d = r.u64()?;
        let secret = match G::decode_scalar(r.field()?) {
            Some(s) if s == zero::<G>() => None,
            Some(s) => Some(s),
            None => return Err(CryptoError::Malformed("credential secret")),
        };
        Ok(Self {
            v_id,
            d,
            secret,
            response: r.scalar::<G>()?,
            kiosk: r.element::<G>()?,
            sig: Signature::from_bytes(r.field()?)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleKind {
    Real,
    Fake,
    Standing,
}

/// Physical configuration of a printed receipt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleState {
    /// Only the envelope and the check-out ticket show.
    Transport,
    /// `q1`, the envelope and `q2` show.
    Activate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visible {
    Q1,
    Envelope,
    CheckoutTicket,
    Q2,
}

/// A printed credential: receipt plus the envelope it was made with.
///
/// `kind` and `marked` are what the voter knows about the bundle; neither
/// is part of any payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiptBundle<G: Group> {
    pub q1: CommitPayload<G>,
    pub t_ot: CheckoutTicket<G>,
    pub q2: ResponsePayload<G>,
    pub envelope: Envelope<G>,
    pub kind: BundleKind,
    pub marked: bool,
    pub state: BundleState,
}

impl<G: Group> ReceiptBundle<G> {
    pub fn visible(&self) -> &'static [Visible] {
        match self.state {
            BundleState::Transport => &[Visible::Envelope, Visible::CheckoutTicket],
            BundleState::Activate => &[Visible::Q1, Visible::Envelope, Visible::Q2],
        }
    }

    /// Payload bytes readable in the current state.
    pub fn visible_payloads(&self) -> Vec<(Visible, Vec<u8>)> {
        self.visible()
            .iter()
            .map(|&v| {
                let bytes = match v {
                    Visible::Q1 => self.q1.to_bytes(),
                    Visible::Envelope => self.envelope.to_bytes(),
                    Visible::CheckoutTicket => self.t_ot.to_bytes(),
                    Visible::Q2 => self.q2.to_bytes(),
                };
                (v, bytes)
            })
            .collect()
    }

    pub fn fold_for_activation(&mut self) {
        self.state = BundleState::Activate;
    }

    /// Every payload of the bundle, kind and marks excluded.
    pub fn payload_bytes(&self) -> Vec<u8> {
        Writer::tagged(0x16)
            .field(&self.q1.to_bytes())
            .field(&self.t_ot.to_bytes())
            .field(&self.q2.to_bytes())
            .field(&self.envelope.to_bytes())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use trip_core::{elgamal::encrypt, Ristretto, SigningKeypair, TestGroup};

    type Samples<G> = (CheckInTicket<G>, Envelope<G>, CommitPayload<G>, CheckoutTicket<G>, ResponsePayload<G>);

    fn samples<G: Group>(seed: u64, standing: bool) -> Samples<G> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let key = SigningKeypair::<G>::generate(&mut rng);
        let sig = key.sign(b"m");
        let v_e = encrypt::<G, _>(&G::g2(), &G::g1(), None, &mut rng).unwrap();
        (
            CheckInTicket { v_id: "voter-7".into(), d: seed, official: *key.public(), sig },
            Envelope { printer: *key.public(), challenge: vec![seed as u8; 16], sig },
            CommitPayload { v_e, commit: [G::g1(), G::g2(), *key.public()], sig },
            CheckoutTicket { v_id: "voter-7".into(), d: seed, v_e, kiosk: *key.public(), sig },
            ResponsePayload {
                v_id: "voter-7".into(),
                d: seed,
                secret: (!standing).then(|| *key.secret()),
                response: G::scalar(seed),
                kiosk: *key.public(),
                sig,
            },
        )
    }

    fn check_round_trip<P: Payload + PartialEq + std::fmt::Debug>(p: &P) {
        let bytes = p.to_bytes();
        let parsed = P::from_bytes(&bytes).unwrap();
        assert_eq!(&parsed, p);
        assert_eq!(parsed.to_bytes(), bytes);
        assert_eq!(&P::from_base64(&p.to_base64()).unwrap(), p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn payloads_round_trip(seed in any::<u64>(), standing in any::<bool>()) {
            let (t, e, q1, t_ot, q2) = samples::<Ristretto>(seed, standing);
            check_round_trip(&t);
            check_round_trip(&e);
            check_round_trip(&q1);
            check_round_trip(&t_ot);
            check_round_trip(&q2);
            let (t, e, q1, t_ot, q2) = samples::<TestGroup>(seed, standing);
            check_round_trip(&t);
            check_round_trip(&e);
            check_round_trip(&q1);
            check_round_trip(&t_ot);
            check_round_trip(&q2);
        }
    }

    #[test]
    fn absent_secret_keeps_payload_length() {
        let (.., with) = samples::<Ristretto>(1, false);
        let (.., without) = samples::<Ristretto>(1, true);
        assert_eq!(with.to_bytes().len(), without.to_bytes().len());
        assert_eq!(ResponsePayload::<Ristretto>::from_bytes(&without.to_bytes()).unwrap().secret, None);
    }

    #[test]
    fn wrong_tag_rejected() {
        let (t, ..) = samples::<Ristretto>(2, false);
        assert!(Envelope::<Ristretto>::from_bytes(&t.to_bytes()).is_err());
    }

    #[test]
    fn challenge_reduces_mod_q() {
        let (_, mut e, ..) = samples::<TestGroup>(3, false);
        e.challenge = vec![0, 0, 0, 14];
        assert_eq!(e.challenge_scalar(), TestGroup::scalar(3));
    }
}
