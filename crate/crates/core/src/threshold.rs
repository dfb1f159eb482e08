//! (t, n)-threshold M-ElGamal.
//!
//! Key generation is a joint-Feldman style DKG: every tallier deals Shamir
//! sharings of two random contributions `(a_i0, b_i0)` and publishes
//! commitments `C_ik = g1^a_ik · g2^b_ik` to its polynomial coefficients.
//! Each recipient checks its share against them. Final shares are the sums
//! of the dealt shares, and `A = Π_i C_i0 = g1^sk1 · g2^sk2`.

use std::collections::BTreeSet;

use rand::{CryptoRng, RngCore};

use crate::{
    elgamal::Ciphertext,
    group::{div, multi_pow, random_scalar, Group},
    zkp::RepresentationProof,
    CryptoError,
};

const PARTIAL_TAG: &[u8] = b"trip/partial-decryption";
const MAX_KEYGEN_ATTEMPTS: usize = 64;

/// One tallier's secret share `(s1, s2)` at evaluation point `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TallierShare<G: Group> {
    index: u32,
    s1: G::Scalar,
    s2: G::Scalar,
}

/// What the talliers publish after key generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionPublicKey<G: Group> {
    /// Collective key `A`.
    pub key: G::Element,
    pub threshold: usize,
    /// `g1^s1_j · g2^s2_j` for tallier `j = 1..=n`, in index order.
    pub verification_keys: Vec<G::Element>,
}

impl<G: Group> ElectionPublicKey<G> {
    pub fn talliers(&self) -> usize {
        self.verification_keys.len()
    }

    pub fn verification_key(&self, index: u32) -> Option<&G::Element> {
        (index as usize).checked_sub(1).and_then(|i| self.verification_keys.get(i))
    }
}

/// Output of key generation. In a deployment each share lives only with its
/// tallier; this struct is the simulation-side handle on all of them.
#[derive(Debug, Clone)]
pub struct TallierKeyMaterial<G: Group> {
    pub public: ElectionPublicKey<G>,
    pub shares: Vec<TallierShare<G>>,
}

impl<G: Group> TallierKeyMaterial<G> {
    pub fn share(&self, index: u32) -> Option<&TallierShare<G>> {
        self.shares.iter().find(|s| s.index == index)
    }

    /// Shares with the given indices, in the given order.
    pub fn subset(&self, indices: &[u32]) -> Vec<TallierShare<G>> {
        indices.iter().filter_map(|&i| self.share(i).copied()).collect()
    }
}

impl<G: Group> TallierShare<G> {
    pub fn new(index: u32, s1: G::Scalar, s2: G::Scalar) -> Self {
        Self { index, s1, s2 }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn secrets(&self) -> (G::Scalar, G::Scalar) {
        (self.s1, self.s2)
    }

    pub fn verification_key(&self) -> G::Element {
        multi_pow::<G>(&[G::g1(), G::g2()], &[self.s1, self.s2])
    }

    /// `D = C1^s1 · C2^s2` with a proof that the same `(s1, s2)` opens this
    /// tallier's verification key.
    pub fn partial_decrypt<R: RngCore + CryptoRng>(&self, ct: &Ciphertext<G>, rng: &mut R) -> PartialDecryption<G> {
        let value = multi_pow::<G>(&[ct.c1, ct.c2], &[self.s1, self.s2]);
        let rows = partial_rows(ct, &self.verification_key(), &value);
        let proof = RepresentationProof::prove(PARTIAL_TAG, &rows, (self.s1, self.s2), &ct.to_bytes(), rng);
        PartialDecryption { index: self.index, value, proof }
    }
}

fn partial_rows<G: Group>(
    ct: &Ciphertext<G>,
    vk: &G::Element,
    value: &G::Element,
) -> [([G::Element; 2], G::Element); 2] {
    [([G::g1(), G::g2()], *vk), ([ct.c1, ct.c2], *value)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialDecryption<G: Group> {
    pub index: u32,
    pub value: G::Element,
    pub proof: RepresentationProof<G>,
}

pub fn verify_partial<G: Group>(public: &ElectionPublicKey<G>, ct: &Ciphertext<G>, pd: &PartialDecryption<G>) -> bool {
    let Some(vk) = public.verification_key(pd.index) else {
        return false;
    };
    pd.proof.verify(PARTIAL_TAG, &partial_rows(ct, vk, &pd.value), &ct.to_bytes())
}

fn validate_parameters<G: Group>(n: usize, t: usize) -> Result<(), CryptoError> {
    if t == 0 || t > n {
        return Err(CryptoError::InvalidThreshold { t, n });
    }
    // indices 1..=n must stay distinct and non-zero mod q
    let max = G::scalar(n as u64);
    if (1..=n as u64).any(|i| G::scalar(i) == G::scalar(0)) || max == G::scalar(0) {
        return Err(CryptoError::TooManyTalliers { n });
    }
    Ok(())
}

/// Lagrange coefficients at zero for the evaluation points `indices`.
pub fn lagrange_at_zero<G: Group>(indices: &[u32]) -> Vec<G::Scalar> {
    indices
        .iter()
        .map(|&j| {
            let xj = G::scalar(u64::from(j));
            indices.iter().filter(|&&m| m != j).fold(G::scalar(1), |acc, &m| {
                let xm = G::scalar(u64::from(m));
                acc * xm * G::invert_scalar(&(xm - xj)).expect("distinct indices")
            })
        })
        .collect()
}

fn eval<G: Group>(coeffs: &[G::Scalar], at: u32) -> G::Scalar {
    let x = G::scalar(u64::from(at));
    coeffs.iter().rev().fold(G::scalar(0), |acc, c| acc * x + *c)
}

/// A tallier's dealing round: two random polynomials of degree `t − 1`.
#[derive(Debug, Clone)]
pub struct DkgDealer<G: Group> {
    index: u32,
    f: Vec<G::Scalar>,
    h: Vec<G::Scalar>,
}

/// Broadcast commitments plus the private share for each recipient.
#[derive(Debug, Clone)]
pub struct DealerMessage<G: Group> {
    pub dealer: u32,
    pub commitments: Vec<G::Element>,
    /// `shares[j - 1]` is sent privately to tallier `j`.
    pub shares: Vec<(G::Scalar, G::Scalar)>,
}

impl<G: Group> DkgDealer<G> {
    pub fn new<R: RngCore + CryptoRng>(index: u32, t: usize, rng: &mut R) -> Self {
        Self {
            index,
            f: (0..t).map(|_| random_scalar::<G, R>(rng)).collect(),
            h: (0..t).map(|_| random_scalar::<G, R>(rng)).collect(),
        }
    }

    fn with_constants<R: RngCore + CryptoRng>(sk1: G::Scalar, sk2: G::Scalar, t: usize, rng: &mut R) -> Self {
        let mut dealer = Self::new(1, t, rng);
        dealer.f[0] = sk1;
        dealer.h[0] = sk2;
        dealer
    }

    pub fn deal(&self, n: usize) -> DealerMessage<G> {
        DealerMessage {
            dealer: self.index,
            commitments: self
                .f
                .iter()
                .zip(&self.h)
                .map(|(a, b)| multi_pow::<G>(&[G::g1(), G::g2()], &[*a, *b]))
                .collect(),
            shares: (1..=n as u32).map(|j| (eval::<G>(&self.f, j), eval::<G>(&self.h, j))).collect(),
        }
    }
}

/// `Π_k C_k^(j^k)`, the commitment to the dealt share at point `j`.
fn committed_share<G: Group>(commitments: &[G::Element], j: u32) -> G::Element {
    let x = G::scalar(u64::from(j));
    let mut power = G::scalar(1);
    let mut exps = Vec::with_capacity(commitments.len());
    for _ in commitments {
        exps.push(power);
        power = power * x;
    }
    multi_pow::<G>(commitments, &exps)
}

pub fn verify_dealt_share<G: Group>(
    commitments: &[G::Element],
    recipient: u32,
    share: &(G::Scalar, G::Scalar),
) -> bool {
    multi_pow::<G>(&[G::g1(), G::g2()], &[share.0, share.1]) == committed_share::<G>(commitments, recipient)
}

/// Every recipient verifies and sums what it was dealt.
pub fn assemble<G: Group>(
    messages: &[DealerMessage<G>],
    n: usize,
    t: usize,
) -> Result<TallierKeyMaterial<G>, CryptoError> {
    validate_parameters::<G>(n, t)?;
    for msg in messages {
        if msg.commitments.len() != t || msg.shares.len() != n {
            return Err(CryptoError::InconsistentShare { dealer: msg.dealer, recipient: 0 });
        }
        for (j, share) in (1..=n as u32).zip(&msg.shares) {
            if !verify_dealt_share::<G>(&msg.commitments, j, share) {
                return Err(CryptoError::InconsistentShare { dealer: msg.dealer, recipient: j });
            }
        }
    }
    let shares: Vec<TallierShare<G>> = (1..=n as u32)
        .map(|j| {
            let (s1, s2) = messages.iter().fold((G::scalar(0), G::scalar(0)), |(a, b), msg| {
                let (x, y) = msg.shares[j as usize - 1];
                (a + x, b + y)
            });
            TallierShare::new(j, s1, s2)
        })
        .collect();
    let key = messages.iter().fold(G::identity(), |acc, msg| G::op(&acc, &msg.commitments[0]));
    let verification_keys = (1..=n as u32)
        .map(|j| {
            messages.iter().fold(G::identity(), |acc, msg| G::op(&acc, &committed_share::<G>(&msg.commitments, j)))
        })
        .collect();
    Ok(TallierKeyMaterial { public: ElectionPublicKey { key, threshold: t, verification_keys }, shares })
}

/// Runs the DKG among `n` simulated talliers, repeating whenever the
/// collective key is the identity (and hence not a generator).
pub fn meg_keygen_distributed<G: Group, R: RngCore + CryptoRng>(
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<TallierKeyMaterial<G>, CryptoError> {
    validate_parameters::<G>(n, t)?;
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let messages: Vec<_> = (1..=n as u32).map(|i| DkgDealer::<G>::new(i, t, rng).deal(n)).collect();
        let material = assemble(&messages, n, t)?;
        if material.public.key != G::identity() {
            return Ok(material);
        }
    }
    Err(CryptoError::KeygenExhausted(MAX_KEYGEN_ATTEMPTS))
}

/// Trusted-dealer sharing of fixed secrets; used for worked examples and
/// fixtures where `sk1, sk2` must be known.
pub fn deal_from_secrets<G: Group, R: RngCore + CryptoRng>(
    sk1: G::Scalar,
    sk2: G::Scalar,
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<TallierKeyMaterial<G>, CryptoError> {
    validate_parameters::<G>(n, t)?;
    let msg = DkgDealer::<G>::with_constants(sk1, sk2, t, rng).deal(n);
    assemble(&[msg], n, t)
}

/// Verifies partial decryptions and combines them by Lagrange interpolation
/// in the exponent.
pub fn combine<G: Group>(
    public: &ElectionPublicKey<G>,
    ct: &Ciphertext<G>,
    partials: &[PartialDecryption<G>],
) -> Result<G::Element, CryptoError> {
    let mut seen = BTreeSet::new();
    for pd in partials {
        if !seen.insert(pd.index) {
            return Err(CryptoError::DuplicateShare(pd.index));
        }
        if public.verification_key(pd.index).is_none() {
            return Err(CryptoError::UnknownTallier(pd.index));
        }
    }
    if partials.len() < public.threshold {
        return Err(CryptoError::InsufficientShares { needed: public.threshold, got: partials.len() });
    }
    if let Some(bad) = partials.iter().find(|pd| !verify_partial(public, ct, pd)) {
        return Err(CryptoError::InvalidPartialDecryption(bad.index));
    }
    let indices: Vec<u32> = partials.iter().map(|pd| pd.index).collect();
    let values: Vec<G::Element> = partials.iter().map(|pd| pd.value).collect();
    let mask = multi_pow::<G>(&values, &lagrange_at_zero::<G>(&indices));
    Ok(div::<G>(&ct.c3, &mask))
}

/// Decrypts with at least `t` distinct shares.
pub fn meg_decrypt_threshold<G: Group, R: RngCore + CryptoRng>(
    public: &ElectionPublicKey<G>,
    shares: &[TallierShare<G>],
    ct: &Ciphertext<G>,
    rng: &mut R,
) -> Result<G::Element, CryptoError> {
    check_share_set(public, shares)?;
    let partials: Vec<_> = shares.iter().map(|s| s.partial_decrypt(ct, rng)).collect();
    combine(public, ct, &partials)
}

pub(crate) fn check_share_set<G: Group>(
    public: &ElectionPublicKey<G>,
    shares: &[TallierShare<G>],
) -> Result<(), CryptoError> {
    let mut seen = BTreeSet::new();
    for s in shares {
        if !seen.insert(s.index) {
            return Err(CryptoError::DuplicateShare(s.index));
        }
    }
    if shares.len() < public.threshold {
        return Err(CryptoError::InsufficientShares { needed: public.threshold, got: shares.len() });
    }
    Ok(())
}
