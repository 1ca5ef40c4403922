//! Token-level monitor facade: one constraint plus its runtime behind a
//! small, host-friendly surface. Foreign-language bindings wrap this type
//! and nothing else, so every decision about semantics stays in the core.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::actionshape::ActionShapeError;
use crate::automata::StateId;
use crate::constraint::{
    augment, load_spec, AugmentedState, ConstraintError, ConstraintSpec, Encoding,
    RecognizerRuntime, StepOutcome, Transition,
};
use crate::shaping::{dense_cost, ShapingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitorError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    ActionShape(#[from] ActionShapeError),
    #[error(transparent)]
    Shaping(#[from] ShapingError),
}

impl MonitorError {
    /// Stable numeric code for hosts that cannot carry rich errors.
    pub fn code(&self) -> i32 {
        match self {
            MonitorError::Constraint(e) => match e {
                ConstraintError::Parse { .. } => 1,
                ConstraintError::Validation(_) => 2,
                ConstraintError::Domain(_) => 3,
                ConstraintError::Index(_) => 4,
                ConstraintError::Io(_) => 5,
                ConstraintError::Automata(_) => 6,
            },
            MonitorError::ActionShape(ActionShapeError::EmptyActionSet { .. }) => 10,
            MonitorError::ActionShape(_) => 11,
            MonitorError::Shaping(_) => 12,
        }
    }
}

/// What a host sees after each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorStep {
    /// Recognizer state after the step (the start state again after a
    /// violation in reset mode).
    pub q: StateId,
    pub cost: f64,
    pub violated: bool,
    /// G′ when potentials were supplied, otherwise equal to `cost`.
    pub dense_cost: f64,
}

#[derive(Debug, Clone)]
struct Potentials {
    phi: Vec<f64>,
    beta: f64,
    gamma: f64,
}

#[derive(Debug, Clone)]
pub struct Monitor {
    runtime: RecognizerRuntime,
    potentials: Option<Potentials>,
}

impl Monitor {
    /// Loads a spec file, falling back to the built-in constraint of the
    /// same file name.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, MonitorError> {
        Ok(Self::new(Arc::new(load_spec(path)?)))
    }

    pub fn new(spec: Arc<ConstraintSpec>) -> Self {
        Monitor {
            runtime: RecognizerRuntime::new(spec),
            potentials: None,
        }
    }

    /// Enables the dense cost G′ with per-state potentials Φ.
    pub fn with_potentials(mut self, phi: Vec<f64>, beta: f64, gamma: f64) -> Result<Self, MonitorError> {
        let n = self.spec().num_states();
        if phi.len() != n {
            return Err(ShapingError::Domain(format!(
                "expected {n} potentials, got {}",
                phi.len()
            ))
            .into());
        }
        self.potentials = Some(Potentials { phi, beta, gamma });
        Ok(self)
    }

    pub fn spec(&self) -> &Arc<ConstraintSpec> {
        self.runtime.spec()
    }

    pub fn runtime(&self) -> &RecognizerRuntime {
        &self.runtime
    }

    pub fn state(&self) -> StateId {
        self.runtime.state()
    }

    pub fn step_token(&mut self, token: &str) -> Result<MonitorStep, MonitorError> {
        let q_prev = self.runtime.state();
        let out = self.runtime.step_token(token)?;
        Ok(self.report(q_prev, out))
    }

    /// Steps on a raw transition, translated by the spec's translator.
    pub fn step_raw(&mut self, t: &Transition) -> Result<MonitorStep, MonitorError> {
        let q_prev = self.runtime.state();
        let out = self.runtime.step(t)?;
        Ok(self.report(q_prev, out))
    }

    /// Shorthand for scalar-actuation translators.
    pub fn step_value(&mut self, value: f64) -> Result<MonitorStep, MonitorError> {
        self.step_raw(&Transition::scalar(value))
    }

    fn report(&self, q_prev: StateId, out: StepOutcome) -> MonitorStep {
        let dense = match &self.potentials {
            Some(p) => dense_cost(q_prev, out.q_next, self.spec().costs(), &p.phi, p.beta, p.gamma),
            None => out.cost,
        };
        MonitorStep {
            q: self.runtime.state(),
            cost: out.cost,
            violated: out.violated,
            dense_cost: dense,
        }
    }

    /// Index into `ranked` (most preferred first) of the first token that
    /// does not lead to a violation. Does not advance the monitor.
    pub fn mask<S: AsRef<str>>(&self, ranked: &[S]) -> Result<usize, MonitorError> {
        let dfa = self.spec().dfa();
        let alphabet = self.spec().alphabet();
        for (i, tok) in ranked.iter().enumerate() {
            let a = alphabet.require(tok.as_ref()).map_err(ConstraintError::from)?;
            if !dfa.is_accepting(dfa.next(self.state(), a)) {
                return Ok(i);
            }
        }
        Err(ActionShapeError::EmptyActionSet {
            candidates: ranked.len(),
        }
        .into())
    }

    /// One-hot encoding of the current recognizer state.
    pub fn one_hot(&self) -> Vec<u8> {
        match augment(0, self.state(), Encoding::OneHot, self.spec().num_states()) {
            Ok(AugmentedState::OneHot { one_hot, .. }) => one_hot,
            _ => unreachable!("current state is always in range"),
        }
    }

    pub fn reset(&mut self) {
        self.runtime.reset();
    }
}
