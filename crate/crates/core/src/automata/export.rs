use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Alphabet, AutomataError, Dfa};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Serialize, Deserialize)]
struct DfaJson {
    alphabet: Vec<String>,
    states: usize,
    start: usize,
    accepting: Vec<usize>,
    delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::Json => self.to_json(),
        }
    }

    /// Graphviz digraph with states `q0..qN-1`; accepting states are drawn
    /// as double circles and parallel edges share one comma-joined label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.is_accepting(q) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(out, "  __start -> q{};", self.start());
        let k = self.alphabet().len();
        for q in 0..self.num_states() {
            let mut targets: Vec<(usize, Vec<&str>)> = Vec::new();
            for a in 0..k {
                let t = self.next(q, a);
                let name = self.alphabet().symbol(a).unwrap_or_default();
                match targets.iter_mut().find(|(to, _)| *to == t) {
                    Some((_, labels)) => labels.push(name),
                    None => targets.push((t, vec![name])),
                }
            }
            for (t, labels) in targets {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", labels.join(","));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let k = self.alphabet().len();
        let doc = DfaJson {
            alphabet: self.alphabet().symbols().to_vec(),
            states: self.num_states(),
            start: self.start(),
            accepting: self.accepting_states(),
            delta: (0..self.num_states())
                .map(|q| (0..k).map(|a| self.next(q, a)).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("DFA JSON serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Dfa, AutomataError> {
        let doc: DfaJson =
            serde_json::from_str(text).map_err(|e| AutomataError::InvalidDfa(e.to_string()))?;
        let alphabet = Alphabet::new(doc.alphabet)?;
        if doc.delta.len() != doc.states {
            return Err(AutomataError::InvalidDfa(format!(
                "delta has {} rows, expected {}",
                doc.delta.len(),
                doc.states
            )));
        }
        let mut accepting = vec![false; doc.states];
        for q in doc.accepting {
            *accepting.get_mut(q).ok_or_else(|| {
                AutomataError::InvalidDfa(format!("accepting state {q} out of range"))
            })? = true;
        }
        let delta = doc.delta.into_iter().flatten().collect();
        Dfa::from_parts(alphabet, doc.states, delta, doc.start, accepting)
    }
}
