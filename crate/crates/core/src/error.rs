use thiserror::Error;

/// Errors raised by the simulator and the algorithms built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("requested {requested} qubits but the simulator cap is {cap}")]
    CapacityExceeded { requested: usize, cap: usize },

    #[error("requested {requested} qubits but only {available} are free")]
    OutOfQubits { requested: usize, available: usize },

    #[error("register width must be positive")]
    InvalidArity,

    #[error("qubit {0} is not live")]
    DeadQubit(usize),

    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),

    #[error("registers overlap on qubit {0}")]
    OverlappingRegisters(usize),

    #[error("forget mismatch at basis state {witness}: register holds {found}, expected {expected}")]
    ForgetMismatch {
        witness: usize,
        found: u64,
        expected: u64,
    },

    #[error("register is not determined by its environment: basis states {first} and {second} share an environment")]
    ForgetUndetermined { first: usize, second: usize },

    #[error("gate {0} creates superposition on an ancilla and cannot be uncomputed")]
    NotQfree(String),

    #[error("oracle arity {expected} does not match register width {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("mark count {marks} is outside 1..={size}")]
    InvalidMarks { marks: u64, size: u64 },

    #[error("table contains duplicate entry {0}")]
    DuplicateEntries(u64),

    #[error("table is empty")]
    EmptyTable,

    #[error("random bound must be positive")]
    ZeroBound,

    #[error("bound {0} needs more than 30 qubits")]
    BoundTooLarge(u64),

    #[error("subset cardinality {k} is outside 2..={n}")]
    InvalidCardinality { k: usize, n: usize },

    #[error("no collision found")]
    NoCollisionFound,

    #[error("superposition size {0} must be at least 2")]
    InvalidM(u64),

    #[error("value {value} does not fit in {width} qubits")]
    ValueTooWide { value: u64, width: usize },

    #[error("amplitude vector is invalid: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
