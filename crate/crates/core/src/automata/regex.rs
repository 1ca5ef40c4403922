//! Constraint regex syntax.
//!
//! Tokens are whitespace-separated names from a declared [`Alphabet`], so
//! multi-character symbols such as `ul` or `contact` are ordinary atoms.
//! Juxtaposition is concatenation; `|` alternation; postfix `*`, `+`, `?`
//! and `{n}` (exactly `n` copies, `n >= 1`); `.` matches any single symbol;
//! parentheses group. A symbol name is a maximal run of characters that are
//! neither whitespace nor one of `( ) | * + ? { } .`.
//!
//! ```
//! use flc::automata::{parse_regex, Alphabet};
//!
//! let sigma = Alphabet::new(["n", "f", "l", "r"]).unwrap();
//! let ast = parse_regex(".* ((l r){2} | (r l){2})", &sigma).unwrap();
//! assert_eq!(ast.to_pattern(&sigma), ".* ((l r){2} | (r l){2})");
//! ```

use super::{Alphabet, AutomataError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegexAst {
    /// Matches nothing.
    Empty,
    /// Matches only the empty word.
    Epsilon,
    /// One symbol, by alphabet index.
    Sym(usize),
    /// Any single symbol.
    Dot,
    Concat(Vec<RegexAst>),
    Alt(Vec<RegexAst>),
    Star(Box<RegexAst>),
    Plus(Box<RegexAst>),
    Opt(Box<RegexAst>),
    Repeat(Box<RegexAst>, u32),
}

impl RegexAst {
    /// Renders the tree back into the concrete syntax.
    pub fn to_pattern(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        self.write(alphabet, &mut out, Prec::Alt);
        out
    }

    fn write(&self, sigma: &Alphabet, out: &mut String, ctx: Prec) {
        let own = self.precedence();
        let paren = own < ctx;
        if paren {
            out.push('(');
        }
        match self {
            // No surface syntax for these; `()` never parses, so the
            // rendering is informational only.
            RegexAst::Empty => out.push_str("()"),
            RegexAst::Epsilon => out.push_str("()?"),
            RegexAst::Sym(i) => out.push_str(sigma.symbol(*i).unwrap_or("?")),
            RegexAst::Dot => out.push('.'),
            RegexAst::Concat(parts) => {
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    p.write(sigma, out, Prec::Concat);
                }
            }
            RegexAst::Alt(parts) => {
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" | ");
                    }
                    p.write(sigma, out, Prec::Concat);
                }
            }
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Opt(c) | RegexAst::Repeat(c, _) => {
                c.write(sigma, out, Prec::Atom);
                match self {
                    RegexAst::Star(_) => out.push('*'),
                    RegexAst::Plus(_) => out.push('+'),
                    RegexAst::Opt(_) => out.push('?'),
                    RegexAst::Repeat(_, n) => out.push_str(&format!("{{{n}}}")),
                    _ => unreachable!(),
                }
            }
        }
        if paren {
            out.push(')');
        }
    }

    fn precedence(&self) -> Prec {
        match self {
            RegexAst::Alt(p) if p.len() > 1 => Prec::Alt,
            RegexAst::Concat(p) if p.len() > 1 => Prec::Concat,
            RegexAst::Alt(_) | RegexAst::Concat(_) => Prec::Concat,
            RegexAst::Star(_) | RegexAst::Plus(_) | RegexAst::Opt(_) | RegexAst::Repeat(..) => {
                Prec::Postfix
            }
            _ => Prec::Atom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Alt,
    Concat,
    Postfix,
    Atom,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Pipe,
    Star,
    Plus,
    Question,
    Repeat(u32),
    Dot,
    Sym(String),
}

const RESERVED: &[char] = &['(', ')', '|', '*', '+', '?', '{', '}', '.'];

fn syntax(position: usize, message: impl Into<String>) -> AutomataError {
    AutomataError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, AutomataError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        i += 1;
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '|' => Tok::Pipe,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '?' => Tok::Question,
            '.' => Tok::Dot,
            '}' => return Err(syntax(start, "unexpected '}'")),
            '{' => {
                let digits_at = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_at {
                    return Err(syntax(i, "expected a repetition count after '{'"));
                }
                if i >= chars.len() || chars[i] != '}' {
                    return Err(syntax(i, "expected '}' to close repetition"));
                }
                let digits: String = chars[digits_at..i].iter().collect();
                i += 1;
                let n: u32 = digits
                    .parse()
                    .map_err(|_| syntax(digits_at, "repetition count too large"))?;
                if n == 0 {
                    return Err(syntax(start, "repetition count must be at least 1"));
                }
                Tok::Repeat(n)
            }
            _ => {
                while i < chars.len() && !chars[i].is_whitespace() && !RESERVED.contains(&chars[i]) {
                    i += 1;
                }
                Tok::Sym(chars[start..i].iter().collect())
            }
        };
        toks.push((start, tok));
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    sigma: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn alt(&mut self) -> Result<RegexAst, AutomataError> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.at += 1;
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            RegexAst::Alt(branches)
        })
    }

    fn concat(&mut self) -> Result<RegexAst, AutomataError> {
        let mut parts = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Pipe | Tok::RParen) {
                break;
            }
            parts.push(self.postfix()?);
        }
        match parts.len() {
            0 => Err(syntax(self.pos(), "empty alternation branch")),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(RegexAst::Concat(parts)),
        }
    }

    fn postfix(&mut self) -> Result<RegexAst, AutomataError> {
        let mut node = self.atom()?;
        loop {
            node = match self.peek() {
                Some(Tok::Star) => RegexAst::Star(Box::new(node)),
                Some(Tok::Plus) => RegexAst::Plus(Box::new(node)),
                Some(Tok::Question) => RegexAst::Opt(Box::new(node)),
                Some(Tok::Repeat(n)) => RegexAst::Repeat(Box::new(node), *n),
                _ => return Ok(node),
            };
            self.at += 1;
        }
    }

    fn atom(&mut self) -> Result<RegexAst, AutomataError> {
        let pos = self.pos();
        let tok = self.peek().cloned();
        self.at += 1;
        match tok {
            Some(Tok::Dot) => Ok(RegexAst::Dot),
            Some(Tok::Sym(name)) => match self.sigma.index_of(&name) {
                Some(i) => Ok(RegexAst::Sym(i)),
                None => Err(syntax(
                    pos,
                    format!("unknown symbol {name:?} (alphabet is {})", self.sigma),
                )),
            },
            Some(Tok::LParen) => {
                let inner = self.alt()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.pos(), "unbalanced parenthesis: expected ')'"));
                }
                self.at += 1;
                Ok(inner)
            }
            Some(Tok::Star | Tok::Plus | Tok::Question | Tok::Repeat(_)) => {
                Err(syntax(pos, "postfix operator has nothing to repeat"))
            }
            // `|` and `)` are consumed by `concat`/`alt`, so this is end of input.
            _ => Err(syntax(pos, "unexpected end of pattern")),
        }
    }
}

/// Parses `text` into an AST bound to `alphabet`.
pub fn parse_regex(text: &str, alphabet: &Alphabet) -> Result<RegexAst, AutomataError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        at: 0,
        end: text.chars().count(),
        sigma: alphabet,
    };
    let ast = parser.alt()?;
    if let Some((pos, _)) = parser.toks.get(parser.at) {
        return Err(syntax(*pos, "unbalanced parenthesis: unmatched ')'"));
    }
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nflr() -> Alphabet {
        Alphabet::new(["n", "f", "l", "r"]).unwrap()
    }

    fn err_pos(text: &str, sigma: &Alphabet) -> usize {
        match parse_regex(text, sigma) {
            Err(AutomataError::Syntax { position, .. }) => position,
            other => panic!("expected syntax error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn dithering_alternation_shape() {
        let ast = parse_regex("(l r)(l r)|(r l)(r l)", &nflr()).unwrap();
        let lr = RegexAst::Concat(vec![RegexAst::Sym(2), RegexAst::Sym(3)]);
        let rl = RegexAst::Concat(vec![RegexAst::Sym(3), RegexAst::Sym(2)]);
        assert_eq!(
            ast,
            RegexAst::Alt(vec![
                RegexAst::Concat(vec![lr.clone(), lr]),
                RegexAst::Concat(vec![rl.clone(), rl]),
            ])
        );
    }

    #[test]
    fn single_symbol() {
        let sigma = Alphabet::new(["a"]).unwrap();
        assert_eq!(parse_regex("a", &sigma).unwrap(), RegexAst::Sym(0));
    }

    #[test]
    fn unbalanced_open_paren_reports_end_position() {
        let sigma = Alphabet::new(["a"]).unwrap();
        assert_eq!(err_pos("(a", &sigma), 2);
        assert_eq!(err_pos("a)", &sigma), 1);
    }

    #[test]
    fn other_syntax_errors() {
        let sigma = nflr();
        assert_eq!(err_pos("l | ", &sigma), 4);
        assert_eq!(err_pos("| l", &sigma), 0);
        assert_eq!(err_pos("(l|)", &sigma), 3);
        assert_eq!(err_pos("l x", &sigma), 2);
        assert_eq!(err_pos("l{0}", &sigma), 1);
        assert_eq!(err_pos("*l", &sigma), 0);
        assert_eq!(err_pos("l{3", &sigma), 3);
        assert_eq!(err_pos("", &sigma), 0);
    }

    #[test]
    fn multi_character_tokens_and_adjacent_groups() {
        let sigma = Alphabet::new(["u", "ul", "contact"]).unwrap();
        let ast = parse_regex("(u|ul)(ul)contact+", &sigma).unwrap();
        assert_eq!(
            ast,
            RegexAst::Concat(vec![
                RegexAst::Alt(vec![RegexAst::Sym(0), RegexAst::Sym(1)]),
                RegexAst::Sym(1),
                RegexAst::Plus(Box::new(RegexAst::Sym(2))),
            ])
        );
    }

    #[test]
    fn rendering_reparses_to_same_tree() {
        let sigma = nflr();
        for text in [".* (l{4} | r{4})", "(l r)? n* | f+", "((l | r) n)*"] {
            let ast = parse_regex(text, &sigma).unwrap();
            let again = parse_regex(&ast.to_pattern(&sigma), &sigma).unwrap();
            assert_eq!(ast, again, "{text}");
        }
    }
}
