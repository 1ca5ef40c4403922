//! Constraint specifications, translators, runtime recognizers and state
//! augmentation.

mod augment;
mod runtime;
mod spec;
mod translate;

pub use augment::{augment, embedding_dim, product_index, AugmentedState, Encoding};
pub use runtime::{RecognizerRuntime, StepOutcome};
pub use spec::{load_spec, ConstraintSpec, Source, ViolationMode};
pub use translate::{ActionSignal, BoundTranslator, EnvState, Move, Transition, TranslatorBinding};

use thiserror::Error;

use crate::automata::AutomataError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid constraint: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("cannot read constraint spec: {0}")]
    Io(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}
