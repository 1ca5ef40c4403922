//! Translation functions: MDP transition -> recognizer token.

use std::collections::BTreeMap;
use std::fmt;

use crate::automata::Alphabet;

use super::ConstraintError;

/// The eight grid moves, in the order of the 2D move alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Up,
    Right,
    Left,
    Down,
    UpRight,
    UpLeft,
    DownRight,
    DownLeft,
}

impl Move {
    pub const ALL: [Move; 8] = [
        Move::Up,
        Move::Right,
        Move::Left,
        Move::Down,
        Move::UpRight,
        Move::UpLeft,
        Move::DownRight,
        Move::DownLeft,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Move::Up => "u",
            Move::Right => "r",
            Move::Left => "l",
            Move::Down => "d",
            Move::UpRight => "ur",
            Move::UpLeft => "ul",
            Move::DownRight => "dr",
            Move::DownLeft => "dl",
        }
    }

    /// (dx, dy) with y growing upwards.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Move::Up => (0, 1),
            Move::Right => (1, 0),
            Move::Left => (-1, 0),
            Move::Down => (0, -1),
            Move::UpRight => (1, 1),
            Move::UpLeft => (-1, 1),
            Move::DownRight => (1, -1),
            Move::DownLeft => (-1, -1),
        }
    }
}

/// Translator-visible view of an environment state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnvState {
    pub index: usize,
    /// Normalized proximity to the nearest hazard; 1.0 means touching.
    pub hazard_level: f64,
    pub contact: bool,
}

/// Translator-visible view of an action.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionSignal {
    pub index: usize,
    /// Signed one-dimensional actuation (negative = left).
    pub value: f64,
    pub direction: Option<Move>,
    /// Side-effect action with no movement (the `f` token).
    pub fire: bool,
}

/// One MDP transition `(s_prev, a, s_next)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transition {
    pub prev: EnvState,
    pub action: ActionSignal,
    pub next: EnvState,
    /// Token supplied directly by the caller, read by the identity translator.
    pub label: Option<String>,
}

impl Transition {
    pub fn labelled(token: impl Into<String>) -> Self {
        Transition {
            label: Some(token.into()),
            ..Transition::default()
        }
    }

    pub fn scalar(value: f64) -> Self {
        Transition {
            action: ActionSignal {
                value,
                ..ActionSignal::default()
            },
            ..Transition::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TranslatorBinding {
    /// Negative actuation -> `l`, positive -> `r`, zero -> `n`, fire -> `f`.
    Sign1D,
    /// Grid move -> its move symbol; a no-op maps to `noop` when configured.
    Direction2D { noop: Option<String> },
    /// `|a|` in steps of `increment`, floored and capped at `bins - 1`,
    /// emitted as `m<k>`.
    MagnitudeBins { increment: f64, bins: usize },
    /// Hazard level of `s_next` in `levels` equal-width bins (`d<k>`), or
    /// `contact` when touching a hazard.
    ProximityBins { levels: usize },
    /// The transition's `label`, verbatim.
    Identity,
}

impl TranslatorBinding {
    /// Parses `kind` or `kind(key=value, ...)`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (kind, params) = crate::kv::parse_call(text)?;
        let number = |params: &BTreeMap<String, String>, key: &str, default: f64| -> Result<f64, String> {
            params.get(key).map_or(Ok(default), |v| {
                v.parse::<f64>()
                    .map_err(|_| format!("translator parameter {key} must be a number, got {v:?}"))
            })
        };
        let count = |params: &BTreeMap<String, String>, key: &str, default: usize| -> Result<usize, String> {
            params.get(key).map_or(Ok(default), |v| {
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| format!("translator parameter {key} must be a positive integer, got {v:?}"))
            })
        };
        let (binding, allowed): (Self, &[&str]) = match kind.as_str() {
            "sign1d" => (TranslatorBinding::Sign1D, &[]),
            "direction2d" => (
                TranslatorBinding::Direction2D {
                    noop: params.get("noop").cloned(),
                },
                &["noop"],
            ),
            "magnitude_bins" => {
                let increment = number(&params, "increment", 0.2)?;
                if !(increment > 0.0 && increment.is_finite()) {
                    return Err("increment must be positive".into());
                }
                (
                    TranslatorBinding::MagnitudeBins {
                        increment,
                        bins: count(&params, "bins", 8)?,
                    },
                    &["increment", "bins"],
                )
            }
            "proximity_bins" => (
                TranslatorBinding::ProximityBins {
                    levels: count(&params, "levels", 10)?,
                },
                &["levels"],
            ),
            "identity" => (TranslatorBinding::Identity, &[]),
            other => return Err(format!("unknown translator kind {other:?}")),
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown translator parameter {extra:?}"));
        }
        Ok(binding)
    }

    /// Every symbol this translator can emit, or `None` when unbounded.
    pub fn outputs(&self) -> Option<Vec<String>> {
        match self {
            TranslatorBinding::Sign1D => Some(["n", "f", "l", "r"].map(String::from).to_vec()),
            TranslatorBinding::Direction2D { noop } => {
                let mut out: Vec<String> = Move::ALL.iter().map(|m| m.symbol().to_string()).collect();
                out.extend(noop.iter().cloned());
                Some(out)
            }
            TranslatorBinding::MagnitudeBins { bins, .. } => {
                Some((0..*bins).map(|k| format!("m{k}")).collect())
            }
            TranslatorBinding::ProximityBins { levels } => {
                let mut out: Vec<String> = (0..*levels).map(|k| format!("d{k}")).collect();
                out.push("contact".into());
                Some(out)
            }
            TranslatorBinding::Identity => None,
        }
    }

    /// Maps a transition to a symbol name.
    pub fn translate(&self, t: &Transition) -> Result<String, ConstraintError> {
        Ok(match self.classify(t)? {
            Token::Fixed(s) => s.to_string(),
            Token::Move(m) => m.symbol().to_string(),
            Token::Noop => match self {
                TranslatorBinding::Direction2D { noop: Some(s) } => s.clone(),
                _ => {
                    return Err(ConstraintError::Domain(
                        "no-op action has no token under this direction2d binding".into(),
                    ))
                }
            },
            Token::Magnitude(k) => format!("m{k}"),
            Token::Level(k) => format!("d{k}"),
            Token::Contact => "contact".into(),
            Token::Label(s) => s.to_string(),
        })
    }

    fn classify<'t>(&self, t: &'t Transition) -> Result<Token<'t>, ConstraintError> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(x)
            } else {
                Err(ConstraintError::Domain(format!("non-finite {what}: {x}")))
            }
        };
        Ok(match self {
            TranslatorBinding::Sign1D => {
                let v = finite(t.action.value, "action value")?;
                if t.action.fire {
                    Token::Fixed("f")
                } else if v < 0.0 {
                    Token::Fixed("l")
                } else if v > 0.0 {
                    Token::Fixed("r")
                } else {
                    Token::Fixed("n")
                }
            }
            TranslatorBinding::Direction2D { .. } => match t.action.direction {
                Some(m) => Token::Move(m),
                None => Token::Noop,
            },
            TranslatorBinding::MagnitudeBins { increment, bins } => {
                let v = finite(t.action.value, "action value")?.abs();
                // Nudge so that exact multiples such as 0.6 / 0.2 land in their own bin.
                let k = ((v / increment) + 1e-9).floor() as usize;
                Token::Magnitude(k.min(bins - 1))
            }
            TranslatorBinding::ProximityBins { levels } => {
                if t.next.contact {
                    Token::Contact
                } else {
                    let level = finite(t.next.hazard_level, "hazard level")?.clamp(0.0, 1.0);
                    let k = (level * *levels as f64).floor() as usize;
                    Token::Level(k.min(levels - 1))
                }
            }
            TranslatorBinding::Identity => match &t.label {
                Some(s) => Token::Label(s),
                None => {
                    return Err(ConstraintError::Domain(
                        "identity translator needs a labelled transition".into(),
                    ))
                }
            },
        })
    }

    /// Resolves the translator's outputs against `alphabet`.
    pub fn bind(&self, alphabet: &Alphabet) -> Result<BoundTranslator, ConstraintError> {
        let resolve = |name: &str| {
            alphabet.index_of(name).ok_or_else(|| {
                ConstraintError::Validation(format!(
                    "translator {self} emits {name:?}, which is not in alphabet {alphabet}"
                ))
            })
        };
        let mut table = Vec::new();
        if let Some(outputs) = self.outputs() {
            for name in &outputs {
                table.push(resolve(name)?);
            }
        }
        Ok(BoundTranslator {
            binding: self.clone(),
            alphabet: alphabet.clone(),
            table,
        })
    }
}

impl fmt::Display for TranslatorBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslatorBinding::Sign1D => write!(f, "sign1d"),
            TranslatorBinding::Direction2D { noop: None } => write!(f, "direction2d"),
            TranslatorBinding::Direction2D { noop: Some(s) } => write!(f, "direction2d(noop={s})"),
            TranslatorBinding::MagnitudeBins { increment, bins } => {
                write!(f, "magnitude_bins(increment={increment}, bins={bins})")
            }
            TranslatorBinding::ProximityBins { levels } => write!(f, "proximity_bins(levels={levels})"),
            TranslatorBinding::Identity => write!(f, "identity"),
        }
    }
}

enum Token<'t> {
    Fixed(&'static str),
    Move(Move),
    Noop,
    Magnitude(usize),
    Level(usize),
    Contact,
    Label(&'t str),
}

/// A translator whose outputs have been resolved to alphabet indices, so
/// stepping a recognizer does not allocate.
#[derive(Debug, Clone)]
pub struct BoundTranslator {
    binding: TranslatorBinding,
    alphabet: Alphabet,
    /// Symbol index per entry of `binding.outputs()`.
    table: Vec<usize>,
}

impl BoundTranslator {
    pub fn binding(&self) -> &TranslatorBinding {
        &self.binding
    }

    pub fn symbol_index(&self, t: &Transition) -> Result<usize, ConstraintError> {
        let slot = match self.binding.classify(t)? {
            Token::Fixed(s) => ["n", "f", "l", "r"].iter().position(|&x| x == s).unwrap(),
            Token::Move(m) => Move::ALL.iter().position(|&x| x == m).unwrap(),
            Token::Noop => {
                if self.table.len() > Move::ALL.len() {
                    Move::ALL.len()
                } else {
                    return Err(ConstraintError::Domain(
                        "no-op action has no token under this direction2d binding".into(),
                    ));
                }
            }
            Token::Magnitude(k) | Token::Level(k) => k,
            Token::Contact => self.table.len() - 1,
            Token::Label(s) => return Ok(self.alphabet.require(s)?),
        };
        Ok(self.table[slot])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(h: f64, contact: bool) -> Transition {
        Transition {
            next: EnvState {
                hazard_level: h,
                contact,
                ..EnvState::default()
            },
            ..Transition::default()
        }
    }

    #[test]
    fn sign_translator() {
        let b = TranslatorBinding::Sign1D;
        assert_eq!(b.translate(&Transition::scalar(-0.3)).unwrap(), "l");
        assert_eq!(b.translate(&Transition::scalar(0.7)).unwrap(), "r");
        assert_eq!(b.translate(&Transition::scalar(0.0)).unwrap(), "n");
        assert!(matches!(
            b.translate(&Transition::scalar(f64::NAN)),
            Err(ConstraintError::Domain(_))
        ));
    }

    #[test]
    fn magnitude_bins_floor_and_cap() {
        let b = TranslatorBinding::MagnitudeBins {
            increment: 0.2,
            bins: 8,
        };
        assert_eq!(b.translate(&Transition::scalar(0.37)).unwrap(), "m1");
        assert_eq!(b.translate(&Transition::scalar(-0.37)).unwrap(), "m1");
        assert_eq!(b.translate(&Transition::scalar(0.6)).unwrap(), "m3");
        assert_eq!(b.translate(&Transition::scalar(9.0)).unwrap(), "m7");
        assert!(b.translate(&Transition::scalar(f64::INFINITY)).is_err());
    }

    #[test]
    fn proximity_bins() {
        let b = TranslatorBinding::ProximityBins { levels: 10 };
        assert_eq!(b.translate(&level(0.95, false)).unwrap(), "d9");
        assert_eq!(b.translate(&level(0.0, false)).unwrap(), "d0");
        assert_eq!(b.translate(&level(1.0, false)).unwrap(), "d9");
        assert_eq!(b.translate(&level(0.5, true)).unwrap(), "contact");
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(TranslatorBinding::parse("sign1d").unwrap(), TranslatorBinding::Sign1D);
        assert_eq!(
            TranslatorBinding::parse("magnitude_bins(increment=0.2, bins=8)").unwrap(),
            TranslatorBinding::MagnitudeBins {
                increment: 0.2,
                bins: 8
            }
        );
        assert_eq!(
            TranslatorBinding::parse("direction2d(noop=n)").unwrap(),
            TranslatorBinding::Direction2D {
                noop: Some("n".into())
            }
        );
        assert!(TranslatorBinding::parse("telepathy").is_err());
        assert!(TranslatorBinding::parse("proximity_bins(levels=0)").is_err());
        assert!(TranslatorBinding::parse("sign1d(x=1)").is_err());
    }

    #[test]
    fn bound_indices_match_names() {
        let sigma = Alphabet::new((0..10).map(|k| format!("d{k}")).chain(["contact".to_string()])).unwrap();
        let b = TranslatorBinding::ProximityBins { levels: 10 };
        let bound = b.bind(&sigma).unwrap();
        for (h, c) in [(0.0, false), (0.42, false), (0.99, false), (0.3, true)] {
            let t = level(h, c);
            assert_eq!(
                sigma.symbol(bound.symbol_index(&t).unwrap()).unwrap(),
                b.translate(&t).unwrap()
            );
        }
        let small = Alphabet::new(["d0"]).unwrap();
        assert!(matches!(b.bind(&small), Err(ConstraintError::Validation(_))));
    }
}
