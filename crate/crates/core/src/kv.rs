//! Line-oriented `key = value` files shared by `.flc` constraint specs and
//! `.cfg` experiment configs.
//!
//! Blank lines and lines starting with `#` are ignored. Values may be
//! wrapped in double quotes. Lists are written `[a b c]`; parameterized
//! values are written `name(key=value, ...)`.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// 1-based line number.
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KvError {
    pub line: usize,
    pub message: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, KvError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| KvError {
            line,
            message: format!("expected `key = value`, got {trimmed:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(KvError {
                line,
                message: format!("invalid key {key:?}"),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(KvError {
                line,
                message: format!("duplicate key {key:?} (first set on line {})", prev.line),
            });
        }
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        } else if value.starts_with('"') {
            return Err(KvError {
                line,
                message: "unterminated quoted value".into(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// `[a b c]` (commas also accepted as separators).
pub fn parse_list(value: &str) -> Result<Vec<String>, String> {
    let v = value.trim();
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("expected a bracketed list like [a b c], got {v:?}"))?;
    Ok(inner
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect())
}

/// `name` or `name(key=value, ...)`.
pub fn parse_call(value: &str) -> Result<(String, BTreeMap<String, String>), String> {
    let text = value.trim();
    let (name, args) = match text.find('(') {
        Some(open) if text.ends_with(')') => (&text[..open], &text[open + 1..text.len() - 1]),
        Some(_) => return Err(format!("unterminated argument list in {text:?}")),
        None => (text, ""),
    };
    let mut params = BTreeMap::new();
    for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        if params.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(format!("parameter {} given twice", k.trim()));
        }
    }
    Ok((name.trim().to_string(), params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_with_line_numbers() {
        let text = "# comment\nname = x\n\npattern = \".* (a | b)\"\n";
        let e = parse(text).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].line, 4);
        assert_eq!(e[1].value, ".* (a | b)");
    }

    #[test]
    fn errors_carry_line() {
        assert_eq!(parse("a = 1\nbogus\n").unwrap_err().line, 2);
        assert_eq!(parse("a = 1\na = 2\n").unwrap_err().line, 2);
        assert_eq!(parse("a = \"open\n").unwrap_err().line, 1);
    }

    #[test]
    fn lists_and_calls() {
        assert_eq!(parse_list("[n f  l r]").unwrap(), vec!["n", "f", "l", "r"]);
        assert_eq!(parse_list("[1, 2]").unwrap(), vec!["1", "2"]);
        assert!(parse_list("n f").is_err());
        let (name, p) = parse_call("corridor1d(length=15, max_steps=200)").unwrap();
        assert_eq!(name, "corridor1d");
        assert_eq!(p["max_steps"], "200");
        assert_eq!(parse_call("sign1d").unwrap().1.len(), 0);
        assert!(parse_call("x(a=1").is_err());
    }
}
