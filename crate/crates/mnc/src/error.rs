//! Crate-wide error type.

use crate::machine::{Trace, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("address {q} out of range for capacity {capacity}")]
    AddressOutOfRange { q: f64, capacity: usize },

    #[error("non-finite {context}: {value}")]
    NonFinite { context: &'static str, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("memory layout error: {0}")]
    Layout(String),

    #[error("instance error: {0}")]
    Instance(String),

    #[error("table conflict: key {key:?} maps to distinct outputs ({first} vs {second})")]
    TableConflict {
        key: Vec<i64>,
        first: String,
        second: String,
    },

    #[error("table key component {value} is not an integer ({context})")]
    NonIntegerKey { value: f64, context: String },

    #[error("gate bound exceeded at step {step}: |{value}| > {bound} on write head {head}")]
    BoundExceeded {
        step: usize,
        head: usize,
        value: f64,
        bound: f64,
    },

    #[error("step contract violated at step {step}: {}", format_violations(violations))]
    Contract {
        step: usize,
        violations: Vec<Violation>,
    },

    #[error("address {addr} emitted at step {step} is not integral (strict mode)")]
    NonIntegralAddress { step: usize, addr: f64 },

    #[error("run exceeded {max_steps} steps without halting")]
    MaxSteps { max_steps: usize, trace: Box<Trace> },

    #[error("trace has not halted")]
    NotHalted,

    #[error("parent chain broken at record {record}")]
    BrokenChain { record: i64 },

    #[error("search-node capacity exceeded ({max} records)")]
    RecordCapacity { max: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("verification mismatch: {0}")]
    VerifyMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
