mod common;

use common::{check_atari_2d, check_spec, nerode_classes, reference};
use flc::automata::oracle::matches;
use flc::automata::{compile_pattern, parse_regex, Alphabet, CompileOptions, Dfa};
use flc::builtin;
use flc::constraint::load_spec;

#[test]
fn every_builtin_agrees_with_its_definition() {
    for name in builtin::names() {
        let spec = load_spec(name).unwrap();
        match check_spec(&spec, 11) {
            Ok(n) => assert!(n >= 10_000, "{name}: only {n} words"),
            Err(w) => panic!("{name}: DFA and oracle disagree on {:?}", spec.alphabet().decode(&w)),
        }
    }
}

#[test]
fn verbatim_atari_regex_matches_folded_builtin() {
    let spec = load_spec("dithering-2d.flc").unwrap();
    assert_eq!(check_atari_2d(spec.dfa(), 10_000, 6, 3), Ok(10_000));
    // Short words hit the regex's three- and four-move cases far more
    // often than uniform lengths do.
    assert_eq!(check_atari_2d(spec.dfa(), 10_000, 4, 4), Ok(10_000));
}

fn fig1b_alphabet() -> Alphabet {
    Alphabet::new(["n", "f", "l", "r"]).unwrap()
}

#[test]
fn exact_dithering_dfa_is_minimal() {
    let sigma = fig1b_alphabet();
    let pattern = ".*((l r)(l r)|(r l)(r l))";
    let dfa = compile_pattern(pattern, &sigma, &CompileOptions::default()).unwrap();
    let ast = parse_regex(pattern, &sigma).unwrap();
    let classes = nerode_classes(4, 4, 4, &|w| matches(&ast, w));
    assert_eq!(classes, 9);
    assert_eq!(dfa.num_states(), classes);
}

/// The figure's automaton, transcribed edge by edge: q0..q6 and q_v = 7,
/// every edge not drawn goes back to q0.
fn figure_dfa() -> Dfa {
    let (n, f, l, r) = (0, 1, 2, 3);
    Dfa::from_fn(
        fig1b_alphabet(),
        8,
        0,
        |q, a| match (q, a) {
            (0, x) if x == n || x == f => 0,
            (0, x) if x == l => 1,
            (0, x) if x == r => 4,
            (1, x) if x == r => 2,
            (2, x) if x == l => 3,
            (3, x) if x == r => 7,
            (4, x) if x == l => 5,
            (5, x) if x == r => 6,
            (6, x) if x == l => 7,
            _ => 0,
        },
        |q| q == 7,
    )
    .unwrap()
}

#[test]
fn reset_heuristic_reproduces_the_figure() {
    let sigma = fig1b_alphabet();
    let opts = CompileOptions {
        reset_heuristic: true,
        ..CompileOptions::default()
    };
    let drawn = compile_pattern(".* ((l r){2} | (r l){2})", &sigma, &opts).unwrap();
    let figure = figure_dfa();
    assert_eq!(drawn.num_states(), 8);
    assert!(drawn.equivalent(&figure).unwrap());

    // The two conventions part ways on l r l l r l r.
    let exact = load_spec("dithering-1d.flc").unwrap();
    let w = ["l", "r", "l", "l", "r", "l", "r"];
    assert!(exact.dfa().accepts(&w).unwrap());
    assert!(!figure.accepts(&w).unwrap());
}

#[test]
fn figure_edges_exist_in_exact_dfa() {
    let dfa = load_spec("dithering-1d.flc").unwrap().dfa().clone();
    let q0 = dfa.start();
    assert_eq!(dfa.step(q0, "n").unwrap(), q0);
    assert_eq!(dfa.step(q0, "f").unwrap(), q0);
    let q3 = ["l", "r", "l"].iter().fold(q0, |q, t| dfa.step(q, t).unwrap());
    assert!(dfa.is_accepting(dfa.step(q3, "r").unwrap()));
    assert!(!dfa.is_accepting(dfa.step(q3, "l").unwrap()));
}

#[test]
fn proximity_variants_share_a_language() {
    let minimal = load_spec("proximity.flc").unwrap();
    let levels = load_spec("proximity-levels.flc").unwrap();
    assert_eq!(minimal.num_states(), 2);
    assert_eq!(levels.num_states(), 11);
    assert!(minimal.dfa().equivalent(levels.dfa()).unwrap());
    let oracle = reference(&minimal);
    assert!(oracle(&[3, 10]) && !oracle(&[10, 3]));
}
