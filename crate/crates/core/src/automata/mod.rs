//! Regex parsing, DFA compilation, minimization, equivalence and export.

mod alphabet;
pub mod builders;
mod dfa;
mod export;
mod nfa;
pub mod oracle;
mod regex;

pub use alphabet::Alphabet;
pub use dfa::{Dfa, StateId};
pub use export::ExportFormat;
pub use regex::{parse_regex, RegexAst};

use thiserror::Error;

/// Default cap on the number of subsets explored during determinization.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Environment variable that overrides [`DEFAULT_STATE_BUDGET`].
pub const STATE_BUDGET_ENV: &str = "FLC_STATE_BUDGET";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("state {state} out of range 0..{states}")]
    InvalidState { state: StateId, states: usize },
    #[error("subset construction exceeded the state budget of {budget}")]
    Capacity { budget: usize },
    #[error("DFAs are defined over different alphabets")]
    AlphabetMismatch,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid DFA: {0}")]
    InvalidDfa(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOptions {
    pub state_budget: usize,
    /// Reproduce the drawing convention where every transition that leaves
    /// the pattern's prefix tree returns to the start state, instead of
    /// exact suffix-matching semantics. A leading `.*` is dropped first.
    pub reset_heuristic: bool,
}

impl Default for CompileOptions {
    /// Exact semantics; budget from `FLC_STATE_BUDGET` when set and valid.
    fn default() -> Self {
        let state_budget = std::env::var(STATE_BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&b: &usize| b > 0)
            .unwrap_or(DEFAULT_STATE_BUDGET);
        Self {
            state_budget,
            reset_heuristic: false,
        }
    }
}

/// Compiles an AST to a complete, minimized DFA.
pub fn compile(
    ast: &RegexAst,
    alphabet: &Alphabet,
    options: &CompileOptions,
) -> Result<Dfa, AutomataError> {
    if options.reset_heuristic {
        let anchored = strip_leading_any_star(ast);
        let dfa = nfa::Nfa::from_ast(&anchored)
            .determinize(alphabet, options.state_budget)?
            .minimize();
        return Ok(dfa.reset_dead_to_start().minimize());
    }
    Ok(nfa::Nfa::from_ast(ast)
        .determinize(alphabet, options.state_budget)?
        .minimize())
}

/// Parses and compiles in one step.
pub fn compile_pattern(
    text: &str,
    alphabet: &Alphabet,
    options: &CompileOptions,
) -> Result<Dfa, AutomataError> {
    compile(&parse_regex(text, alphabet)?, alphabet, options)
}

fn strip_leading_any_star(ast: &RegexAst) -> RegexAst {
    let is_any_star = |n: &RegexAst| matches!(n, RegexAst::Star(c) if **c == RegexAst::Dot);
    match ast {
        RegexAst::Concat(parts) if parts.first().is_some_and(is_any_star) => {
            let rest = &parts[1..];
            match rest.len() {
                0 => RegexAst::Epsilon,
                1 => rest[0].clone(),
                _ => RegexAst::Concat(rest.to_vec()),
            }
        }
        other => other.clone(),
    }
}
