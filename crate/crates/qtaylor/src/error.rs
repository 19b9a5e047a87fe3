use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {0} appears more than once in a gate")]
    IndexCollision(usize),

    #[error("value {value} does not fit in a {width}-qubit register")]
    ValueOverflow { value: u64, width: usize },

    #[error("registers overlap at qubit {0}")]
    RegisterOverlap(usize),

    #[error("no register named {0:?} in layout")]
    UnknownRegister(String),

    #[error("{num_qubits} qubits exceed the dense backend cap of {cap}")]
    TooManyQubits { num_qubits: usize, cap: usize },

    #[error("readout not deterministic: best value {best} has probability {prob}")]
    NotDeterministic { best: u64, prob: f64 },

    #[error("control qubit {0} is not in a basis state; the gate would entangle")]
    WouldEntangle(usize),

    #[error("H on qubit {qubit} with phase {phase} leaves the product-state form")]
    NonProductHadamard { qubit: usize, phase: Dyadic },

    #[error("empty register")]
    EmptyRegister,

    #[error("register widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),

    #[error("accumulator of {width} qubits too narrow: need at least {needed}")]
    AccumulatorTooNarrow { width: usize, needed: usize },

    #[error("register of {width} qubits too narrow for value bound {bound}")]
    RegisterTooNarrow { width: usize, bound: u64 },

    #[error("circuit contains non-commuting gates and cannot be round-scheduled")]
    NonCommuting,

    #[error("phase denominator 2^{0} exceeds the supported precision")]
    PhasePrecision(u8),

    #[error("weight phase precision t must be at least 1")]
    PrecisionTooSmall,

    #[error("backends disagree: dense read {dense}, product read {product}")]
    BackendMismatch { dense: u64, product: u64 },

    #[error("invalid series spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
