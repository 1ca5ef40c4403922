//! Q-learning on the corridor under reward shaping r − λc for a range of
//! penalties, reporting evaluation violations of the dithering constraint.
//!
//!     cargo run --release --example reward_shaping_sweep

use flc::agents::{run_experiment, MeanStd, Summary};
use flc::config::{Enforcement, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/shaping-sweep.cfg");
    let base = ExperimentConfig::load(path)?;
    println!("{:>7}  {:>16}  {:>10}  {:>9}", "λ", "eval viol/ep", "return/ep", "cost rate");
    for lambda in [0.0, 0.001, 0.0025, 0.005, 0.01, 0.1] {
        let cfg = base.with_enforcement(Enforcement::Shaping { lambda });
        let runs = run_experiment(&cfg)?;
        let summary = Summary::new(&cfg, &runs);
        let per_seed: Vec<f64> = summary.per_seed.iter().map(|s| s.eval_violations_per_episode).collect();
        let v = MeanStd::of(&per_seed);
        println!(
            "{lambda:>7}  {:>7.3} ± {:<6.3}  {:>10.3}  {:>9.5}",
            v.mean,
            v.sem(per_seed.len()),
            summary.eval.ret.mean,
            summary.cost_rate.mean
        );
    }
    Ok(())
}
