//! Hard constraints by one-step lookahead: walk the agent's ranked actions
//! and take the first one whose token keeps every recognizer out of its
//! accepting states.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::constraint::{ConstraintError, RecognizerRuntime, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionShapeError {
    /// Every candidate leads into a violation; the caller should fall back
    /// to a known safe policy.
    #[error("every candidate action ({candidates}) leads to a violation")]
    EmptyActionSet { candidates: usize },
    #[error("ranked action list must be non-empty and free of duplicates")]
    InvalidRanking,
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// Candidate actions, most preferred first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedActions<A> {
    actions: Vec<A>,
}

impl<A: PartialEq> RankedActions<A> {
    pub fn new(actions: Vec<A>) -> Result<Self, ActionShapeError> {
        let dup = actions
            .iter()
            .enumerate()
            .any(|(i, a)| actions[..i].contains(a));
        if actions.is_empty() || dup {
            return Err(ActionShapeError::InvalidRanking);
        }
        Ok(Self { actions })
    }
}

impl<A> RankedActions<A> {
    pub fn as_slice(&self) -> &[A] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Returns the highest-ranked action that no runtime would reject, and how
/// many better-ranked actions were skipped. `predict` builds the transition
/// an action would produce from the current environment state. Neither the
/// runtimes nor the environment are advanced.
pub fn filter_action<A, F>(
    runtimes: &[RecognizerRuntime],
    ranked: &RankedActions<A>,
    mut predict: F,
) -> Result<(A, usize), ActionShapeError>
where
    A: Clone,
    F: FnMut(&A) -> Transition,
{
    for (masked, action) in ranked.as_slice().iter().enumerate() {
        let t = predict(action);
        let mut safe = true;
        for rt in runtimes {
            if rt.would_violate(&t)? {
                safe = false;
                break;
            }
        }
        if safe {
            return Ok((action.clone(), masked));
        }
    }
    Err(ActionShapeError::EmptyActionSet {
        candidates: ranked.len(),
    })
}

/// When action shaping is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardMode {
    TrainAndEval,
    TrainOnly,
    EvalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

pub fn enforcement_schedule(mode: HardMode, phase: Phase) -> bool {
    matches!(
        (mode, phase),
        (HardMode::TrainAndEval, _) | (HardMode::TrainOnly, Phase::Train) | (HardMode::EvalOnly, Phase::Eval)
    )
}

impl FromStr for HardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(HardMode::TrainAndEval),
            "train" => Ok(HardMode::TrainOnly),
            "eval" => Ok(HardMode::EvalOnly),
            other => Err(format!("unknown hard mode {other:?} (expected both, train or eval)")),
        }
    }
}

impl fmt::Display for HardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardMode::TrainAndEval => "both",
            HardMode::TrainOnly => "train",
            HardMode::EvalOnly => "eval",
        })
    }
}
