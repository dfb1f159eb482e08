//! M-ElGamal: `enc(A, m; r) = (g1^r, g2^r, A^r · m)` under `A = g1^sk1 · g2^sk2`.

use rand::{CryptoRng, RngCore};

use crate::{
    codec::{Reader, Writer},
    group::{div, random_nonzero_scalar, random_scalar, zero, Group},
    CryptoError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ciphertext<G: Group> {
    pub c1: G::Element,
    pub c2: G::Element,
    pub c3: G::Element,
}

impl<G: Group> Ciphertext<G> {
    pub fn new(c1: G::Element, c2: G::Element, c3: G::Element) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn components(&self) -> [G::Element; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Component-wise quotient; decrypts to the quotient of plaintexts.
    pub fn div(&self, other: &Self) -> Self {
        Self { c1: div::<G>(&self.c1, &other.c1), c2: div::<G>(&self.c2, &other.c2), c3: div::<G>(&self.c3, &other.c3) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { c1: G::op(&self.c1, &other.c1), c2: G::op(&self.c2, &other.c2), c3: G::op(&self.c3, &other.c3) }
    }

    /// Raises every component to `exp`; decrypts to `m^exp`.
    pub fn pow(&self, exp: &G::Scalar) -> Self {
        Self { c1: G::pow(&self.c1, exp), c2: G::pow(&self.c2, exp), c3: G::pow(&self.c3, exp) }
    }

    /// Multiplies in a fresh encryption of the identity.
    pub fn rerandomize<R: RngCore + CryptoRng>(&self, key: &G::Element, rng: &mut R) -> Self {
        let r = random_nonzero_scalar::<G, R>(rng);
        self.mul(&encrypt_with::<G>(key, &G::identity(), &r))
    }

    pub fn write(&self, w: &mut Writer) {
        w.element::<G>(&self.c1).element::<G>(&self.c2).element::<G>(&self.c3);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(Self { c1: r.element::<G>()?, c2: r.element::<G>()?, c3: r.element::<G>()? })
    }

    /// Stand-alone encoding as three length-prefixed elements.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Reader::new(bytes, "ciphertext");
        let ct = Self::read(&mut r)?;
        r.finish()?;
        Ok(ct)
    }
}

fn encrypt_with<G: Group>(key: &G::Element, m: &G::Element, r: &G::Scalar) -> Ciphertext<G> {
    Ciphertext { c1: G::pow(&G::g1(), r), c2: G::pow(&G::g2(), r), c3: G::op(&G::pow(key, r), m) }
}

/// Encrypts `m` under `key`, drawing `r` from `rng` unless one is supplied.
///
/// `r = 0` would output `m` in the clear and is rejected.
pub fn encrypt<G: Group, R: RngCore + CryptoRng>(
    key: &G::Element,
    m: &G::Element,
    r: Option<G::Scalar>,
    rng: &mut R,
) -> Result<Ciphertext<G>, CryptoError> {
    let r = match r {
        Some(r) => r,
        None => random_nonzero_scalar::<G, R>(rng),
    };
    if r == zero::<G>() {
        return Err(CryptoError::ZeroRandomness);
    }
    Ok(encrypt_with(key, m, &r))
}

/// Like [`encrypt`], also returning the randomness used.
pub fn encrypt_returning_randomness<G: Group, R: RngCore + CryptoRng>(
    key: &G::Element,
    m: &G::Element,
    rng: &mut R,
) -> (Ciphertext<G>, G::Scalar) {
    let r = random_nonzero_scalar::<G, R>(rng);
    (encrypt_with(key, m, &r), r)
}

/// Centralised M-ElGamal key pair; threshold keys live in [`crate::threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElGamalKeypair<G: Group> {
    pub sk1: G::Scalar,
    pub sk2: G::Scalar,
    pub pk: G::Element,
}

impl<G: Group> ElGamalKeypair<G> {
    pub fn from_secrets(sk1: G::Scalar, sk2: G::Scalar) -> Self {
        Self { sk1, sk2, pk: G::op(&G::pow(&G::g1(), &sk1), &G::pow(&G::g2(), &sk2)) }
    }

    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secrets(random_scalar::<G, R>(rng), random_scalar::<G, R>(rng))
    }

    /// `m = C3 · (C1^sk1 · C2^sk2)^-1`
    pub fn decrypt(&self, ct: &Ciphertext<G>) -> G::Element {
        let mask = G::op(&G::pow(&ct.c1, &self.sk1), &G::pow(&ct.c2, &self.sk2));
        div::<G>(&ct.c3, &mask)
    }
}
