//! Barrier-synchronization process terms: syntax, validation and semantics.

pub mod parse;
pub mod semantics;
pub mod term;
pub mod validate;

use thiserror::Error;

pub use parse::parse_process;
pub use semantics::{
    count_state_space, count_state_space_with, enumerate_executions, enumerate_executions_with,
    normalize, step, step_with, sync_b, wait_b, DeadlockWitness, Enumeration, StateSpaceCount,
    SyncMode,
};
pub use term::{ActionLabel, BarrierName, Execution, ProcessTerm};
pub use validate::{validate, validate_with, ValidationOptions, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("syntax error at line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("duplicate action label `{0}`")]
    DuplicateLabel(ActionLabel),
    #[error("barrier `{0}` is used outside the scope of any nu({0})")]
    UnboundBarrier(BarrierName),
    #[error("more than {0} executions")]
    LimitExceeded(usize),
}
