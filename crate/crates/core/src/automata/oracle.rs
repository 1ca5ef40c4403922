//! Brute-force reference semantics used to cross-check compiled automata.
//!
//! Nothing here goes through the NFA/DFA pipeline: regex membership is
//! decided by propagating sets of input positions directly over the AST.

use super::{Dfa, RegexAst};

/// Whether `word` (symbol indices) is in L(ast).
pub fn matches(ast: &RegexAst, word: &[usize]) -> bool {
    let mut start = vec![false; word.len() + 1];
    start[0] = true;
    ends(ast, word, &start)[word.len()]
}

/// Positions `j` such that `word[i..j]` is in L(node) for some `i` in `from`.
fn ends(node: &RegexAst, word: &[usize], from: &[bool]) -> Vec<bool> {
    let n = word.len();
    match node {
        RegexAst::Empty => vec![false; n + 1],
        RegexAst::Epsilon => from.to_vec(),
        RegexAst::Sym(a) => {
            let mut out = vec![false; n + 1];
            for i in 0..n {
                if from[i] && word[i] == *a {
                    out[i + 1] = true;
                }
            }
            out
        }
        RegexAst::Dot => {
            let mut out = vec![false; n + 1];
            for i in 0..n {
                out[i + 1] = from[i];
            }
            out
        }
        RegexAst::Concat(parts) => parts
            .iter()
            .fold(from.to_vec(), |cur, p| ends(p, word, &cur)),
        RegexAst::Alt(parts) => {
            let mut out = vec![false; n + 1];
            for p in parts {
                for (o, e) in out.iter_mut().zip(ends(p, word, from)) {
                    *o |= e;
                }
            }
            out
        }
        RegexAst::Star(child) => closure(child, word, from.to_vec()),
        RegexAst::Plus(child) => closure(child, word, ends(child, word, from)),
        RegexAst::Opt(child) => {
            let mut out = ends(child, word, from);
            for (o, f) in out.iter_mut().zip(from) {
                *o |= *f;
            }
            out
        }
        RegexAst::Repeat(child, k) => {
            (0..*k).fold(from.to_vec(), |cur, _| ends(child, word, &cur))
        }
    }
}

fn closure(child: &RegexAst, word: &[usize], mut reached: Vec<bool>) -> Vec<bool> {
    let mut frontier = reached.clone();
    loop {
        let step = ends(child, word, &frontier);
        let mut grew = false;
        frontier = vec![false; reached.len()];
        for (j, hit) in step.into_iter().enumerate() {
            if hit && !reached[j] {
                reached[j] = true;
                frontier[j] = true;
                grew = true;
            }
        }
        if !grew {
            return reached;
        }
    }
}

/// Every word over `k` symbols of length `0..=max_len`, shortest first.
pub fn all_words(k: usize, max_len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=max_len).flat_map(move |len| {
        let total = k.checked_pow(len as u32).expect("word space too large");
        (0..total).map(move |mut code| {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            w
        })
    })
}

/// Number of words of length `0..=max_len` over `k` symbols, saturating.
pub fn word_count(k: usize, max_len: usize) -> usize {
    (0..=max_len).fold(0usize, |acc, len| {
        acc.saturating_add(k.saturating_pow(len as u32))
    })
}

/// First word (in enumeration order) on which `dfa` and `reference` disagree.
pub fn first_disagreement<I, F>(dfa: &Dfa, words: I, mut reference: F) -> Option<Vec<usize>>
where
    I: IntoIterator<Item = Vec<usize>>,
    F: FnMut(&[usize]) -> bool,
{
    words
        .into_iter()
        .find(|w| dfa.accepts_indices(w) != reference(w))
}

/// DFA whose state is the last `window` symbols read, accepting exactly when
/// `predicate` holds on that suffix. Correct for any language in which
/// membership depends only on the last `window` symbols.
pub fn window_dfa(
    alphabet: &super::Alphabet,
    window: usize,
    mut predicate: impl FnMut(&[usize]) -> bool,
) -> Dfa {
    let k = alphabet.len();
    let histories: Vec<Vec<usize>> = all_words(k, window).collect();
    let index_of = |h: &[usize]| -> usize {
        // Inverse of `all_words` ordering: shorter words first.
        let offset = word_count(k, h.len()) - k.pow(h.len() as u32);
        offset + h.iter().fold(0, |acc, &a| acc * k + a)
    };
    let delta = histories
        .iter()
        .flat_map(|h| {
            (0..k).map(move |a| {
                let mut next = h.clone();
                next.push(a);
                if next.len() > window {
                    next.remove(0);
                }
                index_of(&next)
            })
        })
        .collect();
    let accepting = histories.iter().map(|h| predicate(h)).collect();
    Dfa::from_parts(alphabet.clone(), histories.len(), delta, 0, accepting)
        .expect("window table is complete by construction")
}
