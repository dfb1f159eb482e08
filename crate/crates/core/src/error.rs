use thiserror::Error;

/// Errors produced by the cryptographic core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("unknown group profile `{0}`")]
    UnknownProfile(String),
    #[error("security parameter {0} is below the 128-bit minimum for this profile")]
    WeakSecurityParameter(u32),
    #[error("threshold {t} must satisfy 1 <= t <= n = {n}")]
    InvalidThreshold { t: usize, n: usize },
    #[error("{n} talliers cannot be indexed by distinct non-zero scalars in this group")]
    TooManyTalliers { n: usize },
    #[error("key generation produced a non-generator public key {0} times in a row")]
    KeygenExhausted(usize),
    #[error("dealer {dealer} sent tallier {recipient} a share inconsistent with its commitments")]
    InconsistentShare { dealer: u32, recipient: u32 },
    #[error("encryption randomness must be non-zero")]
    ZeroRandomness,
    #[error("need at least {needed} decryption shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("duplicate tallier index {0}")]
    DuplicateShare(u32),
    #[error("unknown tallier index {0}")]
    UnknownTallier(u32),
    #[error("partial decryption from tallier {0} failed verification")]
    InvalidPartialDecryption(u32),
    #[error("blinding step from tallier {0} failed verification")]
    InvalidBlinding(u32),
    #[error("prover state already consumed by a response")]
    ProverStateConsumed,
    #[error("malformed {0} encoding")]
    Malformed(&'static str),
    #[error("malformed signature encoding")]
    MalformedSignature,
}
