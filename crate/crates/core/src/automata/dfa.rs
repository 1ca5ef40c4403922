use std::collections::{HashMap, VecDeque};

use super::{Alphabet, AutomataError};

pub type StateId = usize;

/// Complete deterministic finite automaton over an [`Alphabet`].
///
/// Transitions are stored row-major: `delta[q * |Σ| + a]`. Values are
/// immutable once built and can be shared freely between readers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    states: usize,
    delta: Vec<StateId>,
    start: StateId,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Builds a DFA from a full transition table, checking completeness and
    /// index ranges.
    pub fn from_parts(
        alphabet: Alphabet,
        states: usize,
        delta: Vec<StateId>,
        start: StateId,
        accepting: Vec<bool>,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        if states == 0 {
            return Err(AutomataError::InvalidDfa("a DFA needs at least one state".into()));
        }
        if delta.len() != states * k {
            return Err(AutomataError::InvalidDfa(format!(
                "transition table has {} entries, expected {states} x {k}",
                delta.len()
            )));
        }
        if let Some(bad) = delta.iter().find(|&&t| t >= states) {
            return Err(AutomataError::InvalidDfa(format!(
                "transition target {bad} out of range 0..{states}"
            )));
        }
        if start >= states {
            return Err(AutomataError::InvalidDfa(format!(
                "start state {start} out of range 0..{states}"
            )));
        }
        if accepting.len() != states {
            return Err(AutomataError::InvalidDfa(format!(
                "accepting flags cover {} states, expected {states}",
                accepting.len()
            )));
        }
        Ok(Self {
            alphabet,
            states,
            delta,
            start,
            accepting,
        })
    }

    /// Builds a DFA from a transition function, used by the table builders.
    pub fn from_fn(
        alphabet: Alphabet,
        states: usize,
        start: StateId,
        mut next: impl FnMut(StateId, usize) -> StateId,
        mut accept: impl FnMut(StateId) -> bool,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        let mut delta = Vec::with_capacity(states * k);
        for q in 0..states {
            for a in 0..k {
                delta.push(next(q, a));
            }
        }
        let accepting = (0..states).map(&mut accept).collect();
        Self::from_parts(alphabet, states, delta, start, accepting)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        (0..self.states).filter(|&q| self.accepting[q]).collect()
    }

    /// δ(q, a) by symbol index. Panics if either index is out of range.
    #[inline]
    pub fn next(&self, q: StateId, symbol: usize) -> StateId {
        self.delta[q * self.alphabet.len() + symbol]
    }

    /// δ(q, token) by symbol name.
    pub fn step(&self, q: StateId, token: &str) -> Result<StateId, AutomataError> {
        if q >= self.states {
            return Err(AutomataError::InvalidState {
                state: q,
                states: self.states,
            });
        }
        Ok(self.next(q, self.alphabet.require(token)?))
    }

    /// Final state after reading `word` (symbol indices) from the start state.
    pub fn run(&self, word: &[usize]) -> StateId {
        word.iter().fold(self.start, |q, &a| self.next(q, a))
    }

    pub fn accepts_indices(&self, word: &[usize]) -> bool {
        self.accepting[self.run(word)]
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> Result<bool, AutomataError> {
        Ok(self.accepts_indices(&self.alphabet.encode(word)?))
    }

    /// States reachable from the start state, in breadth-first order with
    /// symbols visited in alphabet order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut order = vec![self.start];
        let mut seen = vec![false; self.states];
        seen[self.start] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for a in 0..self.alphabet.len() {
                let t = self.next(q, a);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let k = self.alphabet.len();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); self.states];
        for q in 0..self.states {
            for a in 0..k {
                preds[self.next(q, a)].push(q);
            }
        }
        let mut live = self.accepting.clone();
        let mut stack: Vec<StateId> = self.accepting_states();
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// Renumbers states so that reachable states come first in breadth-first
    /// order from the start, dropping the unreachable ones.
    pub(crate) fn canonical(&self) -> Dfa {
        let order = self.reachable();
        let mut rename = vec![usize::MAX; self.states];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new;
        }
        let k = self.alphabet.len();
        let mut delta = Vec::with_capacity(order.len() * k);
        for &old in &order {
            for a in 0..k {
                delta.push(rename[self.next(old, a)]);
            }
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            states: order.len(),
            delta,
            start: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
        }
    }

    /// Minimal language-equivalent DFA via Moore partition refinement.
    ///
    /// Unreachable states are removed first; the result is renumbered in
    /// breadth-first order, so two minimal DFAs for the same language over the
    /// same alphabet compare equal with `==`.
    pub fn minimize(&self) -> Dfa {
        let dfa = self.canonical();
        let n = dfa.states;
        let k = dfa.alphabet.len();

        let mut class: Vec<usize> = dfa.accepting.iter().map(|&acc| usize::from(acc)).collect();
        let mut count = if dfa.accepting.iter().all(|&a| a) || dfa.accepting.iter().all(|&a| !a) {
            // Single block: renumber to 0.
            class.iter_mut().for_each(|c| *c = 0);
            1
        } else {
            2
        };
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next_class = vec![0; n];
            for q in 0..n {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k).map(|a| class[dfa.next(q, a)]));
                let fresh = ids.len();
                next_class[q] = *ids.entry(sig).or_insert(fresh);
            }
            let refined = ids.len();
            class = next_class;
            if refined == count {
                break;
            }
            count = refined;
        }

        let mut delta = vec![0; count * k];
        let mut accepting = vec![false; count];
        for q in 0..n {
            let c = class[q];
            accepting[c] = dfa.accepting[q];
            for a in 0..k {
                delta[c * k + a] = class[dfa.next(q, a)];
            }
        }
        Dfa {
            alphabet: dfa.alphabet.clone(),
            states: count,
            delta,
            start: class[dfa.start],
            accepting,
        }
        .canonical()
    }

    /// Shortest word accepted by exactly one of `self` and `other`, or `None`
    /// when the languages are equal.
    pub fn distinguishing_word(&self, other: &Dfa) -> Result<Option<Vec<usize>>, AutomataError> {
        if self.alphabet != other.alphabet {
            return Err(AutomataError::AlphabetMismatch);
        }
        let k = self.alphabet.len();
        let pair = |a: StateId, b: StateId| a * other.states + b;
        let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
        let root = pair(self.start, other.start);
        let mut queue = VecDeque::from([(self.start, other.start)]);
        parent.insert(root, (usize::MAX, 0));
        while let Some((a, b)) = queue.pop_front() {
            if self.accepting[a] != other.accepting[b] {
                let mut word = Vec::new();
                let mut cur = pair(a, b);
                while cur != root {
                    let (prev, sym) = parent[&cur];
                    word.push(sym);
                    cur = prev;
                }
                word.reverse();
                return Ok(Some(word));
            }
            for s in 0..k {
                let (na, nb) = (self.next(a, s), other.next(b, s));
                let key = pair(na, nb);
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(key) {
                    e.insert((pair(a, b), s));
                    queue.push_back((na, nb));
                }
            }
        }
        Ok(None)
    }

    /// Language equality via the product automaton.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool, AutomataError> {
        Ok(self.distinguishing_word(other)?.is_none())
    }

    /// Redirects every transition into a dead state back to the start state
    /// and drops the dead states. Accepting states keep their transitions.
    pub(crate) fn reset_dead_to_start(&self) -> Dfa {
        let live = self.live_states();
        if !live[self.start] {
            return self.clone();
        }
        let k = self.alphabet.len();
        let delta = (0..self.states)
            .flat_map(|q| (0..k).map(move |a| (q, a)))
            .map(|(q, a)| {
                let t = self.next(q, a);
                if live[t] {
                    t
                } else {
                    self.start
                }
            })
            .collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            states: self.states,
            delta,
            start: self.start,
            accepting: self.accepting.clone(),
        }
        .canonical()
    }
}
