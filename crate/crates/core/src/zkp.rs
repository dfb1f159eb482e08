//! Sigma protocol for equality of discrete logarithms.
//!
//! For bases `b_1..b_N` and publics `P_1..P_N` the prover shows knowledge of
//! `x` with `P_i = b_i^x` for every `i`:
//!
//! 1. commit `Y_i = b_i^y` for random `y`;
//! 2. receive challenge `c`;
//! 3. respond `r = y − c·x`.
//!
//! The verifier accepts iff `Y_i = b_i^r · P_i^c` for all `i`. Knowing `c`
//! before committing lets anyone produce an accepting transcript without `x`
//! ([`DleqStatement::simulate`]); this is how fake credentials are built.
//!
//! The booth uses the interactive form with three bases `(g1, g2, A)`.
//! Ballots and tally steps use the Fiat-Shamir form ([`NizkProof`]).

use rand::{CryptoRng, RngCore};

use crate::{
    codec::{Reader, Writer},
    group::{multi_pow, random_scalar, Group},
    hash::fiat_shamir_challenge,
    CryptoError,
};

/// Public statement `P_i = b_i^x` for all `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DleqStatement<G: Group, const N: usize> {
    pub bases: [G::Element; N],
    pub publics: [G::Element; N],
}

/// Transcript of one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DleqTranscript<G: Group, const N: usize> {
    pub commit: [G::Element; N],
    pub challenge: G::Scalar,
    pub response: G::Scalar,
}

/// The credential proof `C1 = g1^x ∧ C2 = g2^x ∧ X = A^x`.
pub type ZkpTranscript<G> = DleqTranscript<G, 3>;

impl<G: Group, const N: usize> DleqStatement<G, N> {
    pub fn new(bases: [G::Element; N], publics: [G::Element; N]) -> Self {
        Self { bases, publics }
    }

    pub fn verify(&self, transcript: &DleqTranscript<G, N>) -> bool {
        (0..N).all(|i| {
            transcript.commit[i]
                == multi_pow::<G>(&[self.bases[i], self.publics[i]], &[transcript.response, transcript.challenge])
        })
    }

    /// Builds an accepting transcript for a challenge known in advance.
    pub fn simulate<R: RngCore + CryptoRng>(&self, challenge: G::Scalar, rng: &mut R) -> DleqTranscript<G, N> {
        self.simulate_with_nonce(challenge, random_scalar::<G, R>(rng))
    }

    /// Simulation with an explicit commit secret `y`; the response equals `y`.
    pub fn simulate_with_nonce(&self, challenge: G::Scalar, nonce: G::Scalar) -> DleqTranscript<G, N> {
        let commit = std::array::from_fn(|i| multi_pow::<G>(&[self.bases[i], self.publics[i]], &[nonce, challenge]));
        DleqTranscript { commit, challenge, response: nonce }
    }

    fn write(&self, w: &mut Writer) {
        for e in self.bases.iter().chain(&self.publics) {
            w.element::<G>(e);
        }
    }
}

impl<G: Group> DleqStatement<G, 3> {
    /// Statement for a credential ciphertext `(C1, C2, ·)` with derived secret `X`.
    pub fn credential(key: &G::Element, c1: &G::Element, c2: &G::Element, x: &G::Element) -> Self {
        Self::new([G::g1(), G::g2(), *key], [*c1, *c2, *x])
    }
}

impl<G: Group, const N: usize> DleqTranscript<G, N> {
    pub fn write_commit(&self, w: &mut Writer) {
        for e in &self.commit {
            w.element::<G>(e);
        }
    }

    pub fn read_commit(r: &mut Reader<'_>) -> Result<[G::Element; N], CryptoError> {
        let mut out = [G::identity(); N];
        for e in &mut out {
            *e = r.element::<G>()?;
        }
        Ok(out)
    }
}

/// Prover side of the interactive protocol.
///
/// The commit secret is erased by the first call to [`ProverState::respond`];
/// a second call fails, so one commitment can never answer two challenges.
#[derive(Debug)]
pub struct ProverState<G: Group, const N: usize> {
    secret: G::Scalar,
    nonce: Option<G::Scalar>,
    commit: [G::Element; N],
}

impl<G: Group, const N: usize> ProverState<G, N> {
    pub fn commit<R: RngCore + CryptoRng>(bases: &[G::Element; N], secret: G::Scalar, rng: &mut R) -> Self {
        Self::commit_with_nonce(bases, secret, random_scalar::<G, R>(rng))
    }

    pub fn commit_with_nonce(bases: &[G::Element; N], secret: G::Scalar, nonce: G::Scalar) -> Self {
        Self { secret, nonce: Some(nonce), commit: bases.map(|b| G::pow(&b, &nonce)) }
    }

    pub fn commitment(&self) -> &[G::Element; N] {
        &self.commit
    }

    pub fn is_consumed(&self) -> bool {
        self.nonce.is_none()
    }

    /// `r = y − c·x`.
    pub fn respond(&mut self, challenge: G::Scalar) -> Result<G::Scalar, CryptoError> {
        let nonce = self.nonce.take().ok_or(CryptoError::ProverStateConsumed)?;
        Ok(nonce - challenge * self.secret)
    }

    /// Responds and returns the full transcript.
    pub fn transcript(&mut self, challenge: G::Scalar) -> Result<DleqTranscript<G, N>, CryptoError> {
        let response = self.respond(challenge)?;
        Ok(DleqTranscript { commit: self.commit, challenge, response })
    }
}

/// Starts the credential proof for secret `x`: commit `(g1^y, g2^y, A^y)`.
pub fn zkp_commit<G: Group, R: RngCore + CryptoRng>(key: &G::Element, x: G::Scalar, rng: &mut R) -> ProverState<G, 3> {
    ProverState::commit(&[G::g1(), G::g2(), *key], x, rng)
}

pub fn zkp_respond<G: Group>(state: &mut ProverState<G, 3>, challenge: G::Scalar) -> Result<G::Scalar, CryptoError> {
    state.respond(challenge)
}

/// Checks `Y1 = g1^r·C1^c`, `Y2 = g2^r·C2^c` and `Y3 = A^r·X^c`.
pub fn zkp_verify<G: Group>(
    key: &G::Element,
    c1: &G::Element,
    c2: &G::Element,
    x: &G::Element,
    transcript: &ZkpTranscript<G>,
) -> bool {
    DleqStatement::credential(key, c1, c2, x).verify(transcript)
}

pub fn zkp_simulate<G: Group, R: RngCore + CryptoRng>(
    key: &G::Element,
    c1: &G::Element,
    c2: &G::Element,
    x: &G::Element,
    challenge: G::Scalar,
    rng: &mut R,
) -> ZkpTranscript<G> {
    DleqStatement::credential(key, c1, c2, x).simulate(challenge, rng)
}

/// Non-interactive proof `(c, r)`; commitments are recomputed by the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NizkProof<G: Group> {
    pub challenge: G::Scalar,
    pub response: G::Scalar,
}

impl<G: Group> NizkProof<G> {
    fn challenge_for<const N: usize>(
        tag: &[u8],
        statement: &DleqStatement<G, N>,
        commit: &[G::Element; N],
        context: &[u8],
    ) -> G::Scalar {
        let mut w = Writer::new();
        statement.write(&mut w);
        for e in commit {
            w.element::<G>(e);
        }
        w.field(context);
        fiat_shamir_challenge::<G>(tag, &w.finish())
    }

    pub fn prove<const N: usize, R: RngCore + CryptoRng>(
        tag: &[u8],
        statement: &DleqStatement<G, N>,
        secret: G::Scalar,
        context: &[u8],
        rng: &mut R,
    ) -> Self {
        let mut prover = ProverState::<G, N>::commit(&statement.bases, secret, rng);
        let challenge = Self::challenge_for(tag, statement, prover.commitment(), context);
        let response = prover.respond(challenge).expect("fresh prover state");
        Self { challenge, response }
    }

    pub fn verify<const N: usize>(&self, tag: &[u8], statement: &DleqStatement<G, N>, context: &[u8]) -> bool {
        let commit = std::array::from_fn(|i| {
            multi_pow::<G>(&[statement.bases[i], statement.publics[i]], &[self.response, self.challenge])
        });
        Self::challenge_for(tag, statement, &commit, context) == self.challenge
    }

    pub fn write(&self, w: &mut Writer) {
        w.scalar::<G>(&self.challenge).scalar::<G>(&self.response);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CryptoError> {
        Ok(Self { challenge: r.scalar::<G>()?, response: r.scalar::<G>()? })
    }
}

/// Fiat-Shamir proof of knowledge of `(a, b)` with `P_k = B_k1^a · B_k2^b`
/// for every row `k`, all rows sharing the same pair.
///
/// Used for partial decryptions: `VK = g1^s1·g2^s2` and `D = C1^s1·C2^s2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepresentationProof<G: Group> {
    pub challenge: G::Scalar,
    pub z1: G::Scalar,
    pub z2: G::Scalar,
}

/// One row `P = B1^a · B2^b`.
pub type RepresentationRow<G> = ([<G as Group>::Element; 2], <G as Group>::Element);

impl<G: Group> RepresentationProof<G> {
    fn challenge_for(tag: &[u8], rows: &[RepresentationRow<G>], commits: &[G::Element], context: &[u8]) -> G::Scalar {
        let mut w = Writer::new();
        for ([b1, b2], p) in rows {
            w.element::<G>(b1).element::<G>(b2).element::<G>(p);
        }
        for t in commits {
            w.element::<G>(t);
        }
        w.field(context);
        fiat_shamir_challenge::<G>(tag, &w.finish())
    }

    pub fn prove<R: RngCore + CryptoRng>(
        tag: &[u8],
        rows: &[RepresentationRow<G>],
        secrets: (G::Scalar, G::Scalar),
        context: &[u8],
        rng: &mut R,
    ) -> Self {
        let w1 = random_scalar::<G, R>(rng);
        let w2 = random_scalar::<G, R>(rng);
        let commits: Vec<_> = rows.iter().map(|(b, _)| multi_pow::<G>(b, &[w1, w2])).collect();
        let challenge = Self::challenge_for(tag, rows, &commits, context);
        Self { challenge, z1: w1 - challenge * secrets.0, z2: w2 - challenge * secrets.1 }
    }

    pub fn verify(&self, tag: &[u8], rows: &[RepresentationRow<G>], context: &[u8]) -> bool {
        let commits: Vec<_> = rows
            .iter()
            .map(|([b1, b2], p)| multi_pow::<G>(&[*b1, *b2, *p], &[self.z1, self.z2, self.challenge]))
            .collect();
        Self::challenge_for(tag, rows, &commits, context) == self.challenge
    }
}
