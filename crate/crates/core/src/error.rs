use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigensolver failed to converge")]
    ConvergenceFailure,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state vector is zero")]
    ZeroVector,
    #[error("operation not defined for classical states")]
    ClassicalStateNotSupported,
    #[error("states belong to incompatible state spaces")]
    SpaceMismatch,
    #[error("sector mismatch: expected sector {expected}, found {found}")]
    SectorMismatch { expected: usize, found: usize },
    #[error("unknown sector {0}")]
    UnknownSector(usize),
    #[error("unknown classical point {0:?}")]
    UnknownPoint(String),
    #[error("not a transition probability matrix: {0}")]
    NotATransitionProbability(String),
    #[error("the two states coincide")]
    DegeneratePair,
    #[error("hbar must be positive and finite, got {0}")]
    InvalidHbar(f64),
    #[error("no bracket sample above the signal threshold")]
    InsufficientSignal,
    #[error("bracket samples are inconsistent with a single hbar (spread {spread:e})")]
    InconsistentBracket { spread: f64 },
    #[error("observable has complex coefficients")]
    ComplexCoefficients,
    #[error("observable spans several sectors; resolve per sector")]
    MultiSector,
    #[error("observable carries no sector information")]
    EmptyObservable,
    #[error("sampled span has rank {found}, expected {expected}")]
    RankDeficient { expected: usize, found: usize },
    #[error("subspaces are not nested")]
    NotComparable,
    #[error("atom already lies in the subspace")]
    AtomInside,
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
