use thiserror::Error;

use crate::quaternion::Quaternion;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("the two primes must be distinct (got {0} twice)")]
    SamePrime(u64),

    #[error("r_(p,l) needs p, l = 1 mod 4 (got p = {p}, l = {l})")]
    NotBothOneModFour { p: u64, l: u64 },

    #[error("inadmissible half-set for q = {q}: {reason}")]
    InadmissibleHalfSet { q: u64, reason: String },

    #[error("{z} is not in X_{q}")]
    NotInNormSet { z: Quaternion, q: u64 },

    #[error("factoring {x} * {y}: expected 4 solutions, found {found}")]
    Factorization { x: Quaternion, y: Quaternion, found: usize },

    #[error("expected {expected} distinct square relators, found {found}")]
    RelatorCount { expected: usize, found: usize },

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("abelianization {0} is infinite; the quotient map needs a finite target")]
    InfiniteTarget(String),

    #[error("subgroup index {index} exceeds the ceiling {ceiling}")]
    IndexCeiling { index: u64, ceiling: u64 },

    #[error("quotient map is invalid: {0}")]
    InvalidQuotientMap(String),

    #[error("presentation has no quaternion generators (needed for {0})")]
    NotQuaternionPresentation(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cache entry for ({p}, {l}, {kind}) disagrees with recomputation")]
    CacheCorrupt { p: u64, l: u64, kind: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
