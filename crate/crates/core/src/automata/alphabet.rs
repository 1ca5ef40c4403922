use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::AutomataError;

/// Ordered, duplicate-free set of token names a recognizer reads.
///
/// The index of a symbol never changes once the alphabet is built, so DFA
/// transition rows can be addressed by symbol index. Cloning is cheap: the
/// symbol table is shared.
#[derive(Clone)]
pub struct Alphabet {
    inner: Arc<AlphabetInner>,
}

struct AlphabetInner {
    symbols: Vec<String>,
    positions: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AutomataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = Vec::new();
        let mut positions = HashMap::new();
        for symbol in symbols {
            let symbol = symbol.into();
            if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
                return Err(AutomataError::InvalidAlphabet(format!(
                    "symbol {symbol:?} must be non-empty and contain no whitespace"
                )));
            }
            if positions.insert(symbol.clone(), list.len()).is_some() {
                return Err(AutomataError::InvalidAlphabet(format!(
                    "duplicate symbol {symbol:?}"
                )));
            }
            list.push(symbol);
        }
        if list.is_empty() {
            return Err(AutomataError::InvalidAlphabet(
                "alphabet must contain at least one symbol".into(),
            ));
        }
        Ok(Self {
            inner: Arc::new(AlphabetInner {
                symbols: list,
                positions,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.inner.symbols
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.inner.symbols.get(index).map(String::as_str)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.inner.positions.get(symbol).copied()
    }

    /// Like [`Alphabet::index_of`], but reports a missing symbol as an error.
    pub fn require(&self, symbol: &str) -> Result<usize, AutomataError> {
        self.index_of(symbol)
            .ok_or_else(|| AutomataError::UnknownSymbol(symbol.to_string()))
    }

    pub fn encode<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<usize>, AutomataError> {
        word.iter().map(|s| self.require(s.as_ref())).collect()
    }

    pub fn decode(&self, word: &[usize]) -> Vec<String> {
        word.iter()
            .map(|&i| self.inner.symbols[i].clone())
            .collect()
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.symbols == other.inner.symbols
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.symbols()).finish()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.symbols().join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_follow_declaration_order() {
        let sigma = Alphabet::new(["n", "f", "l", "r"]).unwrap();
        assert_eq!(sigma.index_of("l"), Some(2));
        assert_eq!(sigma.symbol(3), Some("r"));
        assert_eq!(sigma.to_string(), "[n f l r]");
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(["a b"]).is_err());
        assert!(Alphabet::new([""]).is_err());
    }

    #[test]
    fn unknown_symbol_is_reported() {
        let sigma = Alphabet::new(["a"]).unwrap();
        assert!(matches!(
            sigma.require("b"),
            Err(AutomataError::UnknownSymbol(s)) if s == "b"
        ));
    }
}
