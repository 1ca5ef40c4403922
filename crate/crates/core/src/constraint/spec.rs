use std::fmt;
use std::path::Path;

use crate::automata::builders::Builder;
use crate::automata::{compile, parse_regex, Alphabet, AutomataError, CompileOptions, Dfa, StateId};
use crate::builtin;
use crate::kv;

use super::translate::{BoundTranslator, TranslatorBinding};
use super::ConstraintError;

/// What happens to the recognizer after it enters an accepting state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViolationMode {
    /// Return to the start state right after the violation is recorded, so
    /// violations within one episode can be counted separately.
    #[default]
    Reset,
    /// Keep following the transition function; the recognizer is only
    /// reset between episodes.
    Absorbing,
}

impl fmt::Display for ViolationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationMode::Reset => "reset",
            ViolationMode::Absorbing => "absorbing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Pattern { text: String, reset_heuristic: bool },
    Builder(Builder),
}

/// A validated constraint: recognizer, cost assignment, translator and limit.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    name: String,
    source: Source,
    dfa: Dfa,
    costs: Vec<f64>,
    mode: ViolationMode,
    translator: BoundTranslator,
    limit: f64,
}

impl ConstraintSpec {
    /// Assembles a spec from parts. `costs` of `None` selects the sparse
    /// default: 1.0 on accepting states, 0 elsewhere.
    pub fn new(
        name: impl Into<String>,
        source: Source,
        dfa: Dfa,
        costs: Option<Vec<f64>>,
        mode: ViolationMode,
        translator: TranslatorBinding,
        limit: f64,
    ) -> Result<Self, ConstraintError> {
        let costs = match costs {
            Some(c) => c,
            None => sparse_costs(&dfa),
        };
        if costs.len() != dfa.num_states() {
            return Err(ConstraintError::Validation(format!(
                "cost map covers {} states but the recognizer has {}",
                costs.len(),
                dfa.num_states()
            )));
        }
        if let Some(c) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(ConstraintError::Validation(format!(
                "costs must be finite and non-negative, got {c}"
            )));
        }
        if !(limit.is_finite() && limit >= 0.0) {
            return Err(ConstraintError::Validation(format!(
                "limit must be finite and non-negative, got {limit}"
            )));
        }
        let translator = translator.bind(dfa.alphabet())?;
        Ok(Self {
            name: name.into(),
            source,
            dfa,
            costs,
            mode,
            translator,
            limit,
        })
    }

    /// Convenience constructor for a regex constraint with default costs.
    pub fn from_pattern(
        name: &str,
        alphabet: Alphabet,
        pattern: &str,
        translator: TranslatorBinding,
        mode: ViolationMode,
    ) -> Result<Self, ConstraintError> {
        let ast = parse_regex(pattern, &alphabet)?;
        let dfa = compile(&ast, &alphabet, &CompileOptions::default())?;
        Self::new(
            name,
            Source::Pattern {
                text: pattern.to_string(),
                reset_heuristic: false,
            },
            dfa,
            None,
            mode,
            translator,
            0.0,
        )
    }

    /// Parses the text of a `.flc` file.
    pub fn parse(text: &str) -> Result<Self, ConstraintError> {
        let entries = kv::parse(text).map_err(|e| ConstraintError::Parse {
            line: e.line,
            message: e.message,
        })?;
        let parse_err = |line: usize, message: String| ConstraintError::Parse { line, message };

        let mut name = None;
        let mut alphabet: Option<(usize, Alphabet)> = None;
        let mut pattern: Option<(usize, String)> = None;
        let mut builder: Option<(usize, Builder)> = None;
        let mut translator = TranslatorBinding::Identity;
        let mut mode = ViolationMode::Reset;
        let mut limit = 0.0;
        let mut reset_heuristic = false;
        let mut cost_lines: Vec<(usize, usize, f64)> = Vec::new();

        for e in &entries {
            match e.key.as_str() {
                "name" => name = Some(e.value.clone()),
                "alphabet" => {
                    let symbols = kv::parse_list(&e.value).map_err(|m| parse_err(e.line, m))?;
                    let sigma =
                        Alphabet::new(symbols).map_err(|err| parse_err(e.line, err.to_string()))?;
                    alphabet = Some((e.line, sigma));
                }
                "pattern" => pattern = Some((e.line, e.value.clone())),
                "builder" => {
                    let b = Builder::parse(&e.value).map_err(|m| parse_err(e.line, m))?;
                    builder = Some((e.line, b));
                }
                "translator" => {
                    translator = TranslatorBinding::parse(&e.value).map_err(|m| {
                        ConstraintError::Validation(format!("line {}: {m}", e.line))
                    })?;
                }
                "mode" => {
                    mode = match e.value.as_str() {
                        "reset" => ViolationMode::Reset,
                        "absorbing" => ViolationMode::Absorbing,
                        other => {
                            return Err(parse_err(
                                e.line,
                                format!("mode must be reset or absorbing, got {other:?}"),
                            ))
                        }
                    }
                }
                "limit" => {
                    limit = e
                        .value
                        .parse()
                        .map_err(|_| parse_err(e.line, format!("limit must be a number, got {:?}", e.value)))?;
                }
                "reset_heuristic" => {
                    reset_heuristic = e
                        .value
                        .parse()
                        .map_err(|_| parse_err(e.line, "reset_heuristic must be true or false".into()))?;
                }
                key => match key.strip_prefix("cost.") {
                    Some(state) => {
                        let state: usize = state.parse().map_err(|_| {
                            parse_err(e.line, format!("cost key needs a state index, got {key:?}"))
                        })?;
                        let value: f64 = e.value.parse().map_err(|_| {
                            parse_err(e.line, format!("cost must be a number, got {:?}", e.value))
                        })?;
                        cost_lines.push((e.line, state, value));
                    }
                    None => return Err(parse_err(e.line, format!("unknown key {key:?}"))),
                },
            }
        }

        let name = name.ok_or_else(|| parse_err(0, "missing `name`".into()))?;
        let (_, alphabet) = alphabet.ok_or_else(|| parse_err(0, "missing `alphabet`".into()))?;
        let options = CompileOptions {
            reset_heuristic,
            ..CompileOptions::default()
        };
        let (source, dfa) = match (pattern, builder) {
            (Some((line, text)), None) => {
                let ast = parse_regex(&text, &alphabet).map_err(|err| match err {
                    AutomataError::Syntax { position, message } => parse_err(
                        line,
                        format!("pattern syntax error at position {position}: {message}"),
                    ),
                    other => other.into(),
                })?;
                let dfa = compile(&ast, &alphabet, &options)?;
                (
                    Source::Pattern {
                        text,
                        reset_heuristic,
                    },
                    dfa,
                )
            }
            (None, Some((line, b))) => {
                let dfa = b
                    .build(&alphabet)
                    .map_err(|err| parse_err(line, err.to_string()))?;
                (Source::Builder(b), dfa)
            }
            (Some(_), Some((line, _))) => {
                return Err(parse_err(line, "give either `pattern` or `builder`, not both".into()))
            }
            (None, None) => return Err(parse_err(0, "missing `pattern` or `builder`".into())),
        };

        let costs = if cost_lines.is_empty() {
            None
        } else {
            let mut costs = sparse_costs(&dfa);
            for (line, state, value) in cost_lines {
                if state >= dfa.num_states() {
                    return Err(ConstraintError::Validation(format!(
                        "line {line}: cost for state {state}, but the recognizer has {} states",
                        dfa.num_states()
                    )));
                }
                costs[state] = value;
            }
            Some(costs)
        };
        Self::new(name, source, dfa, costs, mode, translator, limit)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.dfa.alphabet()
    }

    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }

    /// G_C(q).
    #[inline]
    pub fn cost(&self, q: StateId) -> f64 {
        self.costs[q]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn mode(&self) -> ViolationMode {
        self.mode
    }

    pub fn translator(&self) -> &BoundTranslator {
        &self.translator
    }

    /// Per-episode expected-cost limit d.
    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn with_mode(mut self, mode: ViolationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_limit(mut self, limit: f64) -> Self {
        self.limit = limit;
        self
    }
}

fn sparse_costs(dfa: &Dfa) -> Vec<f64> {
    (0..dfa.num_states())
        .map(|q| if dfa.is_accepting(q) { 1.0 } else { 0.0 })
        .collect()
}

/// Loads a `.flc` file. When `path` does not exist and its file name matches
/// a built-in constraint (e.g. `dithering-1d.flc`), the built-in is used.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ConstraintSpec, ConstraintError> {
    let path = path.as_ref();
    match std::fs::read_to_string(path) {
        Ok(text) => ConstraintSpec::parse(&text),
        Err(io) => {
            let builtin = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(builtin::find);
            match builtin {
                Some(text) if !path.exists() => ConstraintSpec::parse(text),
                _ => Err(ConstraintError::Io(format!("{}: {io}", path.display()))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_dithering_loads() {
        let spec = load_spec("dithering-1d.flc").unwrap();
        assert_eq!(spec.name(), "dithering-1d");
        assert_eq!(spec.alphabet().symbols(), ["n", "f", "l", "r"]);
        assert_eq!(spec.mode(), ViolationMode::Reset);
        assert_eq!(spec.limit(), 25.0);
        assert_eq!(*spec.translator().binding(), TranslatorBinding::Sign1D);
        for q in 0..spec.num_states() {
            let expected = if spec.dfa().is_accepting(q) { 1.0 } else { 0.0 };
            assert_eq!(spec.cost(q), expected);
        }
    }

    #[test]
    fn cost_on_missing_state_is_a_validation_error() {
        let text = "name = x\nalphabet = [a b]\npattern = \".* a b\"\ncost.99 = 2\n";
        assert!(matches!(
            ConstraintSpec::parse(text),
            Err(ConstraintError::Validation(_))
        ));
    }

    #[test]
    fn cost_override_keeps_sparse_default_elsewhere() {
        let text = "name = x\nalphabet = [a b]\npattern = \".* a b\"\ncost.1 = 0.5\n";
        let spec = ConstraintSpec::parse(text).unwrap();
        assert_eq!(spec.cost(1), 0.5);
        let acc = spec.dfa().accepting_states();
        assert!(acc.iter().all(|&q| spec.cost(q) > 0.0));
    }

    #[test]
    fn unknown_translator_is_a_validation_error() {
        let text = "name = x\nalphabet = [a b]\npattern = \"a\"\ntranslator = psychic\n";
        assert!(matches!(
            ConstraintSpec::parse(text),
            Err(ConstraintError::Validation(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_pattern = "name = x\nalphabet = [a b]\npattern = \"(a\"\n";
        assert!(matches!(
            ConstraintSpec::parse(bad_pattern),
            Err(ConstraintError::Parse { line: 3, .. })
        ));
        let bad_key = "name = x\nwhat = 1\n";
        assert!(matches!(
            ConstraintSpec::parse(bad_key),
            Err(ConstraintError::Parse { line: 2, .. })
        ));
        let both = "name = x\nalphabet = [a]\npattern = \"a\"\nbuilder = successive_identical(k=2, reset=a)\n";
        assert!(matches!(
            ConstraintSpec::parse(both),
            Err(ConstraintError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn translator_outputs_must_be_in_alphabet() {
        let text = "name = x\nalphabet = [l r]\npattern = \".* l r\"\ntranslator = sign1d\n";
        assert!(matches!(
            ConstraintSpec::parse(text),
            Err(ConstraintError::Validation(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_spec("/nonexistent/dir/custom.flc"),
            Err(ConstraintError::Io(_))
        ));
    }
}
