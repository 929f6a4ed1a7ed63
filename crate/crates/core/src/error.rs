use thiserror::Error;

/// Everything that can go wrong constructing, compiling, or simulating circuits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },

    #[error("duplicate qubit index {qubit} in one instruction")]
    DuplicateQubit { qubit: usize },

    #[error("{kind} takes {expected} qubit operand(s), got {got}")]
    ArityMismatch {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("clbit index {clbit} out of range for {num_clbits} clbit(s)")]
    ClbitOutOfRange { clbit: usize, num_clbits: usize },

    #[error("{kind} requires a clbit operand")]
    MissingClbit { kind: &'static str },

    #[error("{kind} does not take a clbit operand")]
    UnexpectedClbit { kind: &'static str },

    #[error("conditional reads clbit {clbit} before any measurement writes it")]
    ReadBeforeWrite { clbit: usize },

    #[error("width {width} exceeds the supported maximum of {max} qubits")]
    WidthTooLarge { width: usize, max: usize },

    #[error("circuit contains {kind}, which {context} does not support")]
    UnsupportedInstruction {
        kind: &'static str,
        context: &'static str,
    },

    #[error("circuits have different widths ({left} vs {right} qubits)")]
    WidthMismatch { left: usize, right: usize },

    #[error(
        "network capacity exhausted: {needed} computational qubits needed, {available} available"
    )]
    InsufficientCapacity { needed: usize, available: usize },

    #[error("QPU {qpu} has no communication qubit but hosts an endpoint of a remote CX")]
    NoCommQubit { qpu: usize },

    #[error("assignment does not cover qubit {qubit}")]
    UncoveredQubit { qubit: usize },

    #[error("assignment places {count} qubits on QPU {qpu}, which has only {capacity} computational slots")]
    QpuOverfull {
        qpu: usize,
        count: usize,
        capacity: usize,
    },

    #[error(
        "assignment maps qubits {first} and {second} to the same slot (QPU {qpu}, slot {slot})"
    )]
    SlotCollision {
        qpu: usize,
        slot: usize,
        first: usize,
        second: usize,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
