//! Thompson construction and subset construction.

use std::collections::HashMap;

use super::{Alphabet, AutomataError, Dfa, RegexAst};

#[derive(Debug, Clone, Copy)]
enum Label {
    Eps,
    Sym(usize),
    Any,
}

/// ε-NFA with a single start and a single final state.
#[derive(Debug)]
pub(crate) struct Nfa {
    edges: Vec<Vec<(Label, usize)>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    pub(crate) fn from_ast(ast: &RegexAst) -> Self {
        let mut nfa = Nfa {
            edges: Vec::new(),
            start: 0,
            accept: 0,
        };
        let (s, f) = nfa.build(ast);
        nfa.start = s;
        nfa.accept = f;
        nfa
    }

    fn state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    fn edge(&mut self, from: usize, label: Label, to: usize) {
        self.edges[from].push((label, to));
    }

    fn build(&mut self, ast: &RegexAst) -> (usize, usize) {
        match ast {
            RegexAst::Empty => (self.state(), self.state()),
            RegexAst::Epsilon => {
                let (s, f) = (self.state(), self.state());
                self.edge(s, Label::Eps, f);
                (s, f)
            }
            RegexAst::Sym(i) => {
                let (s, f) = (self.state(), self.state());
                self.edge(s, Label::Sym(*i), f);
                (s, f)
            }
            RegexAst::Dot => {
                let (s, f) = (self.state(), self.state());
                self.edge(s, Label::Any, f);
                (s, f)
            }
            RegexAst::Concat(parts) => {
                let s = self.state();
                let mut tail = s;
                for p in parts {
                    let (ps, pf) = self.build(p);
                    self.edge(tail, Label::Eps, ps);
                    tail = pf;
                }
                (s, tail)
            }
            RegexAst::Alt(parts) => {
                let (s, f) = (self.state(), self.state());
                for p in parts {
                    let (ps, pf) = self.build(p);
                    self.edge(s, Label::Eps, ps);
                    self.edge(pf, Label::Eps, f);
                }
                (s, f)
            }
            RegexAst::Star(child) => {
                let (s, f) = (self.state(), self.state());
                let (cs, cf) = self.build(child);
                self.edge(s, Label::Eps, cs);
                self.edge(s, Label::Eps, f);
                self.edge(cf, Label::Eps, cs);
                self.edge(cf, Label::Eps, f);
                (s, f)
            }
            RegexAst::Plus(child) => {
                let (s, f) = (self.state(), self.state());
                let (cs, cf) = self.build(child);
                self.edge(s, Label::Eps, cs);
                self.edge(cf, Label::Eps, cs);
                self.edge(cf, Label::Eps, f);
                (s, f)
            }
            RegexAst::Opt(child) => {
                let (s, f) = (self.state(), self.state());
                let (cs, cf) = self.build(child);
                self.edge(s, Label::Eps, cs);
                self.edge(s, Label::Eps, f);
                self.edge(cf, Label::Eps, f);
                (s, f)
            }
            RegexAst::Repeat(child, n) => {
                let s = self.state();
                let mut tail = s;
                for _ in 0..*n {
                    let (cs, cf) = self.build(child);
                    self.edge(tail, Label::Eps, cs);
                    tail = cf;
                }
                (s, tail)
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.edges.len()
    }

    /// Sorts and extends `set` in place to its ε-closure.
    fn close(&self, set: &mut Vec<usize>, seen: &mut [bool]) {
        let mut stack: Vec<usize> = set.clone();
        for &q in set.iter() {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &(label, to) in &self.edges[q] {
                if matches!(label, Label::Eps) && !seen[to] {
                    seen[to] = true;
                    set.push(to);
                    stack.push(to);
                }
            }
        }
        for &q in set.iter() {
            seen[q] = false;
        }
        set.sort_unstable();
    }

    /// Subset construction. The result is complete (the empty subset, when
    /// reachable, becomes the sink) but not minimized.
    pub(crate) fn determinize(
        &self,
        alphabet: &Alphabet,
        budget: usize,
    ) -> Result<Dfa, AutomataError> {
        let k = alphabet.len();
        let mut seen = vec![false; self.len()];
        let mut start = vec![self.start];
        self.close(&mut start, &mut seen);

        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        index.insert(start.clone(), 0);
        subsets.push(start);

        let mut delta: Vec<usize> = Vec::new();
        let mut cursor = 0;
        while cursor < subsets.len() {
            for sym in 0..k {
                let mut next: Vec<usize> = Vec::new();
                for &q in &subsets[cursor] {
                    for &(label, to) in &self.edges[q] {
                        let hit = match label {
                            Label::Sym(s) => s == sym,
                            Label::Any => true,
                            Label::Eps => false,
                        };
                        if hit && !seen[to] {
                            seen[to] = true;
                            next.push(to);
                        }
                    }
                }
                for &q in &next {
                    seen[q] = false;
                }
                self.close(&mut next, &mut seen);
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= budget {
                            return Err(AutomataError::Capacity { budget });
                        }
                        let id = subsets.len();
                        index.insert(next.clone(), id);
                        subsets.push(next);
                        id
                    }
                };
                delta.push(id);
            }
            cursor += 1;
        }

        let accepting = subsets
            .iter()
            .map(|s| s.binary_search(&self.accept).is_ok())
            .collect();
        Dfa::from_parts(alphabet.clone(), subsets.len(), delta, 0, accepting)
    }
}
