//! Plaintext equivalence test.
//!
//! The quotient `a / b` encrypts `m_a / m_b`. Participating talliers blind it
//! in sequence, each raising the running ciphertext to a secret non-zero `z_i`
//! and proving it did so consistently. The product of non-zero exponents is
//! non-zero, so the blinded ciphertext decrypts to the identity exactly when
//! the plaintexts match. The same talliers then threshold-decrypt it.

use rand::{CryptoRng, RngCore};

use crate::{
    elgamal::Ciphertext,
    group::{random_nonzero_scalar, Group},
    threshold::{check_share_set, combine, ElectionPublicKey, PartialDecryption, TallierShare},
    zkp::{DleqStatement, NizkProof},
    CryptoError,
};

const BLIND_TAG: &[u8] = b"trip/pet/blind";

/// One tallier's blinding contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlindingStep<G: Group> {
    pub tallier: u32,
    pub output: Ciphertext<G>,
    pub proof: NizkProof<G>,
}

/// Public record of a PET: enough to re-verify the outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetSession<G: Group> {
    pub quotient: Ciphertext<G>,
    pub blinding: Vec<BlindingStep<G>>,
    pub partials: Vec<PartialDecryption<G>>,
    pub result: G::Element,
}

impl<G: Group> PetSession<G> {
    pub fn equal(&self) -> bool {
        self.result == G::identity()
    }

    fn blinded(&self) -> &Ciphertext<G> {
        self.blinding.last().map_or(&self.quotient, |s| &s.output)
    }
}

fn blind_statement<G: Group>(input: &Ciphertext<G>, output: &Ciphertext<G>) -> DleqStatement<G, 3> {
    DleqStatement::new(input.components(), output.components())
}

/// Runs a PET with the given tallier shares (at least `t`).
pub fn pet_test<G: Group, R: RngCore + CryptoRng>(
    public: &ElectionPublicKey<G>,
    shares: &[TallierShare<G>],
    a: &Ciphertext<G>,
    b: &Ciphertext<G>,
    rng: &mut R,
) -> Result<PetSession<G>, CryptoError> {
    check_share_set(public, shares)?;
    let quotient = a.div(b);
    let mut current = quotient;
    let mut blinding = Vec::with_capacity(shares.len());
    for share in shares {
        let z = random_nonzero_scalar::<G, R>(rng);
        let output = current.pow(&z);
        let proof = NizkProof::prove(BLIND_TAG, &blind_statement(&current, &output), z, &[], rng);
        blinding.push(BlindingStep { tallier: share.index(), output, proof });
        current = output;
    }
    let partials: Vec<_> = shares.iter().map(|s| s.partial_decrypt(&current, rng)).collect();
    let result = combine(public, &current, &partials)?;
    Ok(PetSession { quotient, blinding, partials, result })
}

/// Re-checks every proof in a PET record against the inputs.
pub fn verify_pet<G: Group>(
    public: &ElectionPublicKey<G>,
    a: &Ciphertext<G>,
    b: &Ciphertext<G>,
    session: &PetSession<G>,
) -> Result<bool, CryptoError> {
    if session.quotient != a.div(b) {
        return Err(CryptoError::Malformed("pet quotient"));
    }
    let mut current = session.quotient;
    for step in &session.blinding {
        // z = 0 would collapse any quotient to the identity
        if step.output.components().iter().all(|e| *e == G::identity())
            && current.components().iter().any(|e| *e != G::identity())
        {
            return Err(CryptoError::InvalidBlinding(step.tallier));
        }
        if !step.proof.verify(BLIND_TAG, &blind_statement(&current, &step.output), &[]) {
            return Err(CryptoError::InvalidBlinding(step.tallier));
        }
        current = step.output;
    }
    let result = combine(public, session.blinded(), &session.partials)?;
    if result != session.result {
        return Err(CryptoError::Malformed("pet result"));
    }
    Ok(session.equal())
}
