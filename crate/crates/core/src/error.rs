use thiserror::Error;

/// Errors produced by the numerics engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("lattice has no dimer covering")]
    NoCoverings,
    #[error("invalid covering: {0}")]
    InvalidCovering(String),
    #[error("invalid site list: {0}")]
    InvalidSites(String),
    #[error("subsystem of {size} sites exceeds the partial-trace cap of {cap}")]
    SubsystemTooLarge { size: usize, cap: usize },
    #[error("{sites} sites exceed the exhaustive cap of {cap}")]
    TooLargeForExhaustive { sites: usize, cap: usize },
    #[error("unsupported family {0} for this backend")]
    UnsupportedFamily(String),
    #[error("site sets overlap or the conditioning set is empty")]
    OverlappingSets,
    #[error("column height {m_prime} exceeds cap {cap}")]
    HeightTooLarge { m_prime: usize, cap: usize },
    #[error("alpha basis grew past {cap} vectors without closing")]
    BasisBlowup { cap: usize },
    #[error("numeric overflow in recursion at step {0}")]
    NumericOverflow(usize),
    #[error("density matrix is not physical: {0}")]
    NotPhysical(String),
    #[error("need at least {need} samples with distinct sizes, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("degenerate fit: {reason}")]
    DegenerateFit {
        reason: String,
        g_c: f64,
        k: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
