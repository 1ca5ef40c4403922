//! Dense cost from expected time-to-violation: exact hitting times on the
//! recognizer chain induced by a random policy, the sampled estimate the
//! agents use, and the resulting potentials and shaped costs.
//!
//!     cargo run --example cost_shaping

use flc::constraint::load_spec;
use flc::shaping::{
    dense_cost, exact_hitting_times, induced_chain, potential, simulate_chain, TvEstimator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = load_spec("dithering-1d.flc")?;
    let dfa = spec.dfa();
    // Uniform random actions over {n, f, l, r}.
    let chain = induced_chain(dfa, &[0.25; 4])?;
    let targets: Vec<bool> = (0..dfa.num_states()).map(|q| dfa.is_accepting(q)).collect();
    let exact = exact_hitting_times(&chain, &targets)?;

    let mut est = TvEstimator::for_dfa(dfa);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20_000 {
        est.update_from_states(&simulate_chain(&chain, &targets, dfa.start(), 10_000, &mut rng));
    }

    let baseline = 40.0;
    let phi = est.potentials(baseline)?;
    println!("state  exact E[t_v]  estimate   Φ");
    for q in 0..dfa.num_states() {
        println!("q{q:<5} {:>12.3}  {:>8.3}  {:.4}", exact[q], est.estimate(q), phi[q]);
    }
    println!("Φ(0)={} Φ(b)={} Φ(3b)={}", potential(0.0, baseline)?, potential(baseline, baseline)?, potential(3.0 * baseline, baseline)?);

    // Moving one step closer to a violation costs something even before
    // the violation happens.
    let q0 = dfa.start();
    let q1 = dfa.step(q0, "l")?;
    let g = dense_cost(q0, q1, spec.costs(), &phi, 1.0, 0.99);
    println!("G'(q{q0} -l-> q{q1}) = {g:.4}");
    println!("\n{}", serde_json::to_string_pretty(&est.to_json(baseline)?)?);
    Ok(())
}
