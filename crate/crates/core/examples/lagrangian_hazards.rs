//! Lagrangian enforcement on a re-arranged hazard grid, with and without
//! recognizer-state augmentation, comparing the training cost rate.
//!
//!     cargo run --release --example lagrangian_hazards

use flc::agents::{run_experiment, MeanStd};
use flc::config::{Augmentation, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/hazard-lagrangian-augmented.cfg");
    let base = ExperimentConfig::load(path)?;
    for aug in [Augmentation::None, Augmentation::Product] {
        let cfg = ExperimentConfig { augmentation: aug, ..base.clone() };
        let runs = run_experiment(&cfg)?;
        let rates: Vec<f64> = runs.iter().map(|r| r.cost_rate()).collect();
        let lambdas: Vec<f64> = runs.iter().map(|r| r.final_lambda).collect();
        let m = MeanStd::of(&rates);
        println!(
            "{aug:?}: cost rate {:.4} ± {:.4} (s.e.), final λ {:.3}",
            m.mean,
            m.sem(rates.len()),
            MeanStd::of(&lambdas).mean
        );
    }
    Ok(())
}
