//! Counter-style recognizers generated directly as transition tables.
//!
//! Bounded counting and windowed sums are awkward to write as regexes, so
//! these constraints are built from their definition. Each builder also
//! exposes [`Builder::holds`], a direct predicate over a word used to
//! validate the generated table.

use std::collections::HashMap;
use std::fmt;

use super::{Alphabet, AutomataError, Dfa};

#[derive(Debug, Clone, PartialEq)]
pub enum Builder {
    /// Accepts once the last `k` symbols are identical and none of them is
    /// the `reset` symbol.
    SuccessiveIdentical { k: usize, reset: String },
    /// The i-th alphabet symbol carries magnitude `i * increment`; accepts
    /// when the magnitudes of the last `window` symbols sum to more than
    /// `threshold`.
    SumThreshold {
        increment: f64,
        window: usize,
        threshold: f64,
    },
    /// One state per symbol remembering the most recent token; accepts when
    /// it is `accept`. Recognizes the same language as `.* accept` but keeps
    /// the last token visible in the recognizer state, so it is deliberately
    /// left unminimized.
    LastToken { accept: String },
}

impl Builder {
    /// Parses `name(key=value, ...)`.
    pub fn parse(text: &str) -> Result<Builder, String> {
        let (name, mut params) = crate::kv::parse_call(text)?;
        let mut take = |key: &str| params.remove(key);
        let num = |key: &str, v: Option<String>| -> Result<Option<f64>, String> {
            v.map(|s| {
                s.parse::<f64>()
                    .map_err(|_| format!("parameter {key} must be a number, got {s:?}"))
            })
            .transpose()
        };
        let builder = match name.as_str() {
            "successive_identical" => {
                let k = num("k", take("k"))?.unwrap_or(3.0);
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(format!("k must be a positive integer, got {k}"));
                }
                Builder::SuccessiveIdentical {
                    k: k as usize,
                    reset: take("reset").unwrap_or_else(|| "0".to_string()),
                }
            }
            "sum_threshold" => {
                let increment = num("increment", take("increment"))?.unwrap_or(0.2);
                let window = num("window", take("window"))?.unwrap_or(3.0);
                let threshold = num("threshold", take("threshold"))?.unwrap_or(4.0);
                if !(increment > 0.0 && increment.is_finite()) {
                    return Err("increment must be positive".into());
                }
                if window < 1.0 || window.fract() != 0.0 {
                    return Err(format!("window must be a positive integer, got {window}"));
                }
                if !threshold.is_finite() {
                    return Err("threshold must be finite".into());
                }
                Builder::SumThreshold {
                    increment,
                    window: window as usize,
                    threshold,
                }
            }
            "last_token" => Builder::LastToken {
                accept: take("accept").ok_or("last_token needs accept=<symbol>")?,
            },
            other => return Err(format!("unknown builder {other:?}")),
        };
        if let Some(extra) = params.keys().next() {
            return Err(format!("unknown parameter {extra:?} for builder {}", name));
        }
        Ok(builder)
    }

    /// Builds the recognizer over `alphabet`; minimized except for
    /// [`Builder::LastToken`].
    pub fn build(&self, alphabet: &Alphabet) -> Result<Dfa, AutomataError> {
        match self {
            Builder::LastToken { accept } => {
                // The first symbol doubles as the start state, so it cannot
                // be the accepting one.
                let accept = alphabet.require(accept)?;
                if accept == 0 {
                    return Err(AutomataError::InvalidDfa(
                        "last_token: accept symbol must not be the first alphabet symbol".into(),
                    ));
                }
                return Dfa::from_fn(alphabet.clone(), alphabet.len(), 0, |_, a| a, |q| q == accept);
            }
            Builder::SuccessiveIdentical { k, reset } => {
                successive_identical(alphabet, *k, alphabet.require(reset)?)
            }
            Builder::SumThreshold {
                increment,
                window,
                threshold,
            } => sum_threshold(alphabet, *window, sum_limit(*increment, *threshold)),
        }
        .map(|d| d.minimize())
    }

    /// Membership decided directly from the definition.
    pub fn holds(&self, alphabet: &Alphabet, word: &[usize]) -> bool {
        match self {
            Builder::SuccessiveIdentical { k, reset } => {
                let reset = alphabet.index_of(reset);
                word.len() >= *k && {
                    let tail = &word[word.len() - k..];
                    Some(tail[0]) != reset && tail.iter().all(|&a| a == tail[0])
                }
            }
            Builder::SumThreshold {
                increment,
                window,
                threshold,
            } => {
                let tail = &word[word.len().saturating_sub(*window)..];
                let units: usize = tail.iter().sum();
                units as f64 > sum_limit(*increment, *threshold)
            }
            Builder::LastToken { accept } => {
                word.last().is_some_and(|&a| Some(a) == alphabet.index_of(accept))
            }
        }
    }

    /// Longest suffix the language depends on.
    pub fn window(&self) -> usize {
        match self {
            Builder::SuccessiveIdentical { k, .. } => *k,
            Builder::SumThreshold { window, .. } => *window,
            Builder::LastToken { .. } => 1,
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builder::SuccessiveIdentical { k, reset } => {
                write!(f, "successive_identical(k={k}, reset={reset})")
            }
            Builder::SumThreshold {
                increment,
                window,
                threshold,
            } => write!(
                f,
                "sum_threshold(increment={increment}, window={window}, threshold={threshold})"
            ),
            Builder::LastToken { accept } => write!(f, "last_token(accept={accept})"),
        }
    }
}

/// Threshold expressed in increments. Snaps to the nearest integer when the
/// ratio is within rounding error of one, so 4.0 / 0.2 is exactly 20.
fn sum_limit(increment: f64, threshold: f64) -> f64 {
    let units = threshold / increment;
    if (units - units.round()).abs() < 1e-9 {
        units.round()
    } else {
        units
    }
}

fn successive_identical(alphabet: &Alphabet, k: usize, reset: usize) -> Result<Dfa, AutomataError> {
    // State 0: no run. State 1 + a*k + (c-1): run of c copies of symbol a.
    let states = 1 + alphabet.len() * k;
    Dfa::from_fn(
        alphabet.clone(),
        states,
        0,
        |q, a| {
            if a == reset {
                return 0;
            }
            let count = if q == 0 || (q - 1) / k != a {
                1
            } else {
                ((q - 1) % k + 2).min(k)
            };
            1 + a * k + (count - 1)
        },
        |q| q != 0 && (q - 1) % k == k - 1,
    )
}

fn sum_threshold(alphabet: &Alphabet, window: usize, limit: f64) -> Result<Dfa, AutomataError> {
    // State: magnitudes of the previous window-1 symbols plus whether the
    // last step crossed the threshold.
    type Key = (Vec<usize>, bool);
    let k = alphabet.len();
    let start: Key = (vec![0; window - 1], false);
    let mut ids: HashMap<Key, usize> = HashMap::from([(start.clone(), 0)]);
    let mut keys = vec![start];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let hist = keys[i].0.clone();
        for a in 0..k {
            let total: usize = hist.iter().sum::<usize>() + a;
            let mut next_hist = hist.clone();
            if window > 1 {
                next_hist.remove(0);
                next_hist.push(a);
            }
            let key = (next_hist, total as f64 > limit);
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                keys.len() - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    let accepting = keys.iter().map(|(_, acc)| *acc).collect();
    Dfa::from_parts(alphabet.clone(), keys.len(), delta, 0, accepting)
}
