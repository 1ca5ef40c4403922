use std::sync::Arc;

use crate::automata::StateId;

use super::spec::{ConstraintSpec, ViolationMode};
use super::translate::Transition;
use super::ConstraintError;

/// Result of advancing a recognizer by one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Symbol index the translator produced.
    pub symbol: usize,
    /// State the transition function led to. Under [`ViolationMode::Reset`]
    /// this is still the accepting state; the runtime itself has already
    /// moved back to the start state.
    pub q_next: StateId,
    /// G_C(q_next).
    pub cost: f64,
    pub violated: bool,
}

/// Live recognizer for one trajectory: current state plus cost and
/// violation counters.
#[derive(Debug, Clone)]
pub struct RecognizerRuntime {
    spec: Arc<ConstraintSpec>,
    q: StateId,
    violations: u64,
    episode_cost: f64,
    total_violations: u64,
    total_cost: f64,
}

impl RecognizerRuntime {
    pub fn new(spec: Arc<ConstraintSpec>) -> Self {
        let q = spec.dfa().start();
        Self {
            spec,
            q,
            violations: 0,
            episode_cost: 0.0,
            total_violations: 0,
            total_cost: 0.0,
        }
    }

    pub fn spec(&self) -> &Arc<ConstraintSpec> {
        &self.spec
    }

    pub fn state(&self) -> StateId {
        self.q
    }

    /// Violations since the last [`reset`](Self::reset).
    pub fn violation_count(&self) -> u64 {
        self.violations
    }

    /// Sum of emitted costs since the last reset.
    pub fn episode_cost(&self) -> f64 {
        self.episode_cost
    }

    /// Violations over the runtime's whole life; survives resets.
    pub fn total_violations(&self) -> u64 {
        self.total_violations
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Translates `t` and advances: c = G_C(D_C(T_C(t))).
    pub fn step(&mut self, t: &Transition) -> Result<StepOutcome, ConstraintError> {
        let symbol = self.spec.translator().symbol_index(t)?;
        Ok(self.step_symbol(symbol))
    }

    pub fn step_token(&mut self, token: &str) -> Result<StepOutcome, ConstraintError> {
        let symbol = self.spec.alphabet().require(token)?;
        Ok(self.step_symbol(symbol))
    }

    /// Advances on a symbol index. Panics if the index is outside the
    /// alphabet.
    pub fn step_symbol(&mut self, symbol: usize) -> StepOutcome {
        let dfa = self.spec.dfa();
        let q_next = dfa.next(self.q, symbol);
        let cost = self.spec.cost(q_next);
        let violated = dfa.is_accepting(q_next);
        self.episode_cost += cost;
        self.total_cost += cost;
        if violated {
            self.violations += 1;
            self.total_violations += 1;
        }
        self.q = match (violated, self.spec.mode()) {
            (true, ViolationMode::Reset) => dfa.start(),
            _ => q_next,
        };
        StepOutcome {
            symbol,
            q_next,
            cost,
            violated,
        }
    }

    /// State the recognizer would move to on `t`, without advancing.
    pub fn lookahead(&self, t: &Transition) -> Result<StateId, ConstraintError> {
        let symbol = self.spec.translator().symbol_index(t)?;
        Ok(self.spec.dfa().next(self.q, symbol))
    }

    pub fn would_violate(&self, t: &Transition) -> Result<bool, ConstraintError> {
        Ok(self.spec.dfa().is_accepting(self.lookahead(t)?))
    }

    /// Back to q₀ with per-episode counters cleared. Lifetime totals are kept.
    pub fn reset(&mut self) {
        self.q = self.spec.dfa().start();
        self.violations = 0;
        self.episode_cost = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::load_spec;

    fn dither() -> RecognizerRuntime {
        RecognizerRuntime::new(Arc::new(load_spec("dithering-1d.flc").unwrap()))
    }

    #[test]
    fn violation_then_reset_to_start() {
        let mut rt = dither();
        for tok in ["l", "r", "l"] {
            assert!(!rt.step_token(tok).unwrap().violated);
        }
        let out = rt.step_token("r").unwrap();
        assert!(out.violated);
        assert_eq!(out.cost, 1.0);
        assert!(rt.spec().dfa().is_accepting(out.q_next));
        assert_eq!(rt.state(), rt.spec().dfa().start());
    }

    #[test]
    fn noop_at_start_is_free() {
        let mut rt = dither();
        let out = rt.step_token("n").unwrap();
        assert_eq!(out.q_next, rt.spec().dfa().start());
        assert_eq!(out.cost, 0.0);
        assert!(!out.violated);
    }

    #[test]
    fn alternating_stream_counts_two_violations() {
        let mut rt = dither();
        for tok in ["l", "r", "l", "r", "l", "r", "l", "r"] {
            rt.step_token(tok).unwrap();
        }
        assert_eq!(rt.violation_count(), 2);
        assert_eq!(rt.episode_cost(), 2.0);
    }

    #[test]
    fn absorbing_mode_follows_delta() {
        let spec = load_spec("dithering-1d.flc").unwrap().with_mode(ViolationMode::Absorbing);
        let mut rt = RecognizerRuntime::new(Arc::new(spec));
        for tok in ["l", "r", "l", "r", "l"] {
            rt.step_token(tok).unwrap();
        }
        // lrlr and rlrl both complete.
        assert_eq!(rt.violation_count(), 2);
        let sigma = rt.spec().alphabet().clone();
        let word = sigma.encode(&["l", "r", "l", "r", "l"]).unwrap();
        assert_eq!(rt.state(), rt.spec().dfa().run(&word));
    }

    #[test]
    fn reset_is_idempotent_and_keeps_totals() {
        let mut rt = dither();
        for tok in ["l", "r", "l", "r", "l"] {
            rt.step_token(tok).unwrap();
        }
        rt.reset();
        let snapshot = (rt.state(), rt.violation_count(), rt.episode_cost());
        rt.reset();
        assert_eq!(snapshot, (rt.state(), rt.violation_count(), rt.episode_cost()));
        assert_eq!(rt.state(), rt.spec().dfa().start());
        assert_eq!(rt.violation_count(), 0);
        assert_eq!(rt.total_violations(), 1);
    }

    #[test]
    fn unknown_token_is_an_error() {
        let mut rt = dither();
        assert!(matches!(
            rt.step_token("x"),
            Err(ConstraintError::Automata(_))
        ));
    }

    #[test]
    fn lookahead_does_not_advance() {
        let mut rt = dither();
        for tok in ["l", "r", "l"] {
            rt.step_token(tok).unwrap();
        }
        let before = rt.state();
        assert!(rt.would_violate(&Transition::scalar(1.0)).unwrap());
        assert!(!rt.would_violate(&Transition::scalar(0.0)).unwrap());
        assert_eq!(rt.state(), before);
    }
}
