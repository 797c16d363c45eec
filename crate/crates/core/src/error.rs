use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("coefficient index {index} is at or beyond precision {prec}")]
    PrecisionExceeded { index: i64, prec: i64 },
    #[error("operation needs the integral exponent grid, found M={0}")]
    GridError(i64),
    #[error("unknown catalog label {0:?}")]
    UnknownLabel(String),
    #[error("coset kind {kind} is not available for odd m={m}")]
    KindUnavailable { m: i64, kind: String },
    #[error("residues for (x,z)=({x},{z}) are not a gcd-filtered system")]
    IncompleteResidues { x: i64, z: i64 },
    #[error("replicate index {0} does not resolve")]
    UnresolvedIndex(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("coefficient a_{index} of member {member} is not available")]
    MissingDependency { member: String, index: i64 },
    #[error("seed a_{index} of member {member} is {seed} but derives to {derived}")]
    SeedConflict {
        member: String,
        index: i64,
        seed: String,
        derived: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("multiset does not materialize to rational data: {0}")]
    NonRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
