//! Monitor a token stream: per-step cost, violations, and one-step
//! lookahead masking, through the facade used by host-language bindings.
//!
//!     cargo run --example runtime_monitor

use flc::monitor::Monitor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut m = Monitor::open("dithering-1d.flc")?;
    for (i, tok) in ["l", "r", "l"].iter().enumerate() {
        let s = m.step_token(tok)?;
        println!("step {}: {tok} -> q{} cost={} violated={}", i + 1, s.q, s.cost, s.violated);
    }

    // The agent would like to go right, which would complete l r l r.
    let ranked = ["r", "n", "l"];
    let pick = m.mask(&ranked)?;
    println!("ranked {ranked:?}: choose {:?} (index {pick})", ranked[pick]);

    let s = m.step_token("r")?;
    println!("took r anyway: violated={} and the monitor is back at q{}", s.violated, s.q);

    // Raw actuation values go through the constraint's translator.
    m.reset();
    for v in [-0.3, 0.7, -1.0, 0.2] {
        let s = m.step_value(v)?;
        println!("a={v:+.1} -> q{} violated={}", s.q, s.violated);
    }
    println!("lifetime violations: {}", m.runtime().total_violations());
    Ok(())
}
