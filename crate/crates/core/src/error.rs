use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("modulus {0:?} is not irreducible over F_{1}")]
    ReducibleModulus(Vec<u32>, u32),
    #[error("invalid ring spec: {0}")]
    InvalidRingSpec(String),
    #[error("no built-in modulus for GF({p}^{r}); supply one explicitly")]
    NoModulus { p: u32, r: u32 },
    #[error("rings differ")]
    RingMismatch,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("Witt table guard exceeded: level {n} for p = {p} (limit {limit})")]
    WittGuard { p: u32, n: usize, limit: usize },
    #[error("ideal element has nonzero leading coordinate")]
    NotInIdeal,
    #[error("map is not a ring homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("matrix is not invertible over W_n(R)")]
    NotInvertible,
    #[error("pre-display axiom violated: {0}")]
    AxiomViolation(String),
    #[error("base ring is not perfect")]
    NotPerfect,
    #[error("base ring is not a finite field")]
    NotAField,
    #[error("level-1 condition Ker F = Im V fails")]
    LevelOneCondition,
    #[error("Dieudonne relation fails: {0}")]
    DieudonneRelation(String),
    #[error("insufficient level {n} to determine the Newton polygon")]
    InsufficientLevel { n: usize },
    #[error("map is not injective at the working precision")]
    NotInjective,
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("action formula failed verification: {0}")]
    ActionVerification(String),
    #[error("oracle discrepancy: {0}")]
    Discrepancy(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
