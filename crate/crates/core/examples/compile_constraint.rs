//! Compile constraints to minimized DFAs, inspect them, and cross-check
//! them against the brute-force membership oracle.
//!
//!     cargo run --example compile_constraint

use flc::automata::oracle::{all_words, first_disagreement, matches};
use flc::automata::{compile_pattern, parse_regex, Alphabet, CompileOptions, ExportFormat};
use flc::constraint::load_spec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A regex over a four-symbol alphabet: no left/right/left/right dithering.
    let sigma = Alphabet::new(["n", "f", "l", "r"])?;
    let pattern = ".* ((l r){2} | (r l){2})";
    let dfa = compile_pattern(pattern, &sigma, &CompileOptions::default())?;
    println!("{pattern}: {} states, accepting {:?}", dfa.num_states(), dfa.accepting_states());
    println!("l r l r accepted: {}", dfa.accepts(&["l", "r", "l", "r"])?);
    println!("l r n l r accepted: {}", dfa.accepts(&["l", "r", "n", "l", "r"])?);

    // Every word up to length 8 agrees with the regex oracle.
    let ast = parse_regex(pattern, &sigma)?;
    let bad = first_disagreement(&dfa, all_words(sigma.len(), 8), |w| matches(&ast, w));
    println!("oracle disagreement up to length 8: {bad:?}");

    // The drawing convention where unmatched input falls back to the start
    // state gives a smaller, more permissive machine.
    let drawn = compile_pattern(
        pattern,
        &sigma,
        &CompileOptions {
            reset_heuristic: true,
            ..CompileOptions::default()
        },
    )?;
    println!("reset-heuristic variant: {} states", drawn.num_states());

    // Built-in constraints, including ones generated from a definition.
    for name in ["dithering-2d.flc", "successive-identical.flc", "sum-threshold.flc", "proximity.flc"] {
        let spec = load_spec(name)?;
        println!("{name}: |Σ|={} |Q|={}", spec.alphabet().len(), spec.num_states());
    }

    println!("\n{}", load_spec("overactuation-1d.flc")?.dfa().export(ExportFormat::Dot));
    Ok(())
}
