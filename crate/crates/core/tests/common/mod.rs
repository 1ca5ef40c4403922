//! Oracles shared by the integration tests and the acceptance run. None of
//! them go through subset construction or minimization.

#![allow(dead_code)]

use std::sync::Arc;

use flc::actionshape::{filter_action, RankedActions};
use flc::automata::oracle::{all_words, matches};
use flc::automata::{parse_regex, Alphabet, Dfa};
use flc::constraint::{load_spec, ConstraintSpec, RecognizerRuntime, Source};
use flc::envs::EnvSpec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATARI_DITHERING_2D: &str = include_str!("../data/atari_dithering_2d.regex");

/// Atari action codes used in the verbatim 2D regex, and the move each one
/// folds to (letters are the fire variants of the digit moves).
pub const ATARI_CODES: [(&str, &str); 16] = [
    ("2", "u"),
    ("3", "r"),
    ("4", "l"),
    ("5", "d"),
    ("6", "ur"),
    ("7", "ul"),
    ("8", "dr"),
    ("9", "dl"),
    ("A", "u"),
    ("B", "r"),
    ("C", "l"),
    ("D", "d"),
    ("E", "ur"),
    ("F", "ul"),
    ("G", "dr"),
    ("H", "dl"),
];

/// Membership straight from the spec's definition: the regex AST matcher
/// for patterns, the builder's own predicate for generated tables.
pub fn reference(spec: &ConstraintSpec) -> Box<dyn Fn(&[usize]) -> bool> {
    match spec.source() {
        Source::Pattern {
            text,
            reset_heuristic: false,
        } => {
            let ast = parse_regex(text, spec.alphabet()).expect("spec pattern parses");
            Box::new(move |w| matches(&ast, w))
        }
        Source::Pattern { .. } => panic!("reset-heuristic specs have no regex oracle"),
        Source::Builder(b) => {
            let b = b.clone();
            let sigma = spec.alphabet().clone();
            Box::new(move |w| b.holds(&sigma, w))
        }
    }
}

/// Uniform length in `0..=max_len`, then uniform symbols.
pub fn sample_words(k: usize, max_len: usize, n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len).map(|_| rng.gen_range(0..k)).collect()
        })
        .collect()
}

/// Number of words checked, or the first counterexample.
pub fn check_words<I>(dfa: &Dfa, words: I, oracle: &dyn Fn(&[usize]) -> bool) -> Result<usize, Vec<usize>>
where
    I: IntoIterator<Item = Vec<usize>>,
{
    let mut n = 0;
    for w in words {
        if dfa.accepts_indices(&w) != oracle(&w) {
            return Err(w);
        }
        n += 1;
    }
    Ok(n)
}

/// Exhaustive up to length 10 for small alphabets, 10,000 sampled words of
/// length ≤ 6 otherwise.
pub fn check_spec(spec: &ConstraintSpec, seed: u64) -> Result<usize, Vec<usize>> {
    let oracle = reference(spec);
    let k = spec.alphabet().len();
    if k <= 4 {
        check_words(spec.dfa(), all_words(k, 10), &*oracle)
    } else {
        check_words(spec.dfa(), sample_words(k, 6, 10_000, seed), &*oracle)
    }
}

/// The verbatim 2D dithering regex over raw action codes, checked against
/// the built-in DFA after folding each code to its move.
pub fn check_atari_2d(dfa: &Dfa, samples: usize, max_len: usize, seed: u64) -> Result<usize, Vec<usize>> {
    let codes = Alphabet::new(ATARI_CODES.iter().map(|(c, _)| *c)).unwrap();
    let ast = parse_regex(&format!(".* ({})", ATARI_DITHERING_2D.trim()), &codes).expect("verbatim regex parses");
    let fold: Vec<usize> = ATARI_CODES
        .iter()
        .map(|(_, m)| dfa.alphabet().require(m).expect("move symbol"))
        .collect();
    let words = sample_words(codes.len(), max_len, samples, seed);
    let mut n = 0;
    for w in words {
        let folded: Vec<usize> = w.iter().map(|&c| fold[c]).collect();
        if dfa.accepts_indices(&folded) != matches(&ast, &w) {
            return Err(w);
        }
        n += 1;
    }
    Ok(n)
}

/// Myhill–Nerode classes of the language decided by `oracle`, separating
/// prefixes of length ≤ `prefix_len` by all suffixes of length ≤ `suffix_len`.
pub fn nerode_classes(k: usize, prefix_len: usize, suffix_len: usize, oracle: &dyn Fn(&[usize]) -> bool) -> usize {
    let suffixes: Vec<Vec<usize>> = all_words(k, suffix_len).collect();
    let mut rows = std::collections::HashSet::new();
    for p in all_words(k, prefix_len) {
        let row: Vec<bool> = suffixes
            .iter()
            .map(|s| {
                let mut w = p.clone();
                w.extend_from_slice(s);
                oracle(&w)
            })
            .collect();
        rows.insert(row);
    }
    rows.len()
}

/// Uniform random ranking each step, filtered; returns (violations, fallbacks).
pub fn random_filtered(env: &str, specs: &[&str], steps: usize, seed: u64) -> (u64, usize) {
    let mut env = EnvSpec::parse(env).unwrap().build(seed).unwrap();
    let mut rts: Vec<RecognizerRuntime> = specs
        .iter()
        .map(|s| RecognizerRuntime::new(Arc::new(load_spec(s).unwrap())))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fallbacks = 0;
    env.reset();
    for _ in 0..steps {
        if env.is_done() {
            env.reset();
            rts.iter_mut().for_each(|r| r.reset());
        }
        let mut order: Vec<usize> = (0..env.num_actions()).collect();
        order.shuffle(&mut rng);
        let ranked = RankedActions::new(order).unwrap();
        let a = match filter_action(&rts, &ranked, |&a| env.predict(a).unwrap()) {
            Ok((a, _)) => a,
            Err(_) => {
                fallbacks += 1;
                env.noop()
            }
        };
        let out = env.step(a).unwrap();
        for rt in rts.iter_mut() {
            rt.step(&out.transition).unwrap();
        }
    }
    (rts.iter().map(|r| r.total_violations()).sum(), fallbacks)
}

pub const GAMMA: f64 = 0.99;

/// Value iteration on a corridor written out from its rules: actions
/// left, right, no-op, interact; reaching the last cell pays 1 and ends the
/// episode, every other step costs 0.01.
pub fn value_iteration_policy(length: usize) -> Vec<usize> {
    let goal = length - 1;
    let next = |s: usize, a: usize| match a {
        0 => s.saturating_sub(1),
        1 => (s + 1).min(goal),
        _ => s,
    };
    let q = |v: &[f64], s: usize, a: usize| {
        let s2 = next(s, a);
        if s2 == goal {
            1.0
        } else {
            -0.01 + GAMMA * v[s2]
        }
    };
    let mut v = vec![0.0; length];
    for _ in 0..10_000 {
        let mut delta: f64 = 0.0;
        for s in 0..goal {
            let best = (0..4).map(|a| q(&v, s, a)).fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < 1e-12 {
            break;
        }
    }
    (0..goal)
        .map(|s| {
            let values: Vec<f64> = (0..4).map(|a| q(&v, s, a)).collect();
            let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let argmax: Vec<usize> = (0..4).filter(|&a| values[a] == best).collect();
            assert_eq!(argmax.len(), 1, "optimal action must be unique in state {s}");
            argmax[0]
        })
        .collect()
}
