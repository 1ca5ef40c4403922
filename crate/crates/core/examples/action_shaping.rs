//! Hard constraints by action filtering: a uniformly random policy on the
//! corridor and the hazard grid, with every step passed through
//! `filter_action`. No violation can occur.
//!
//!     cargo run --example action_shaping

use std::sync::Arc;

use flc::actionshape::{filter_action, RankedActions};
use flc::constraint::{load_spec, RecognizerRuntime};
use flc::envs::{Corridor1D, Environment, HazardGrid2D};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rollout(env: &mut dyn Environment, spec: &str, steps: usize) -> Result<(u64, usize), Box<dyn std::error::Error>> {
    let mut rt = RecognizerRuntime::new(Arc::new(load_spec(spec)?));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut masked = 0;
    env.reset();
    for _ in 0..steps {
        if env.is_done() {
            env.reset();
            rt.reset();
        }
        let mut order: Vec<usize> = (0..env.num_actions()).collect();
        order.shuffle(&mut rng);
        let ranked = RankedActions::new(order)?;
        let action = match filter_action(std::slice::from_ref(&rt), &ranked, |&a| {
            env.predict(a).expect("action in range")
        }) {
            Ok((a, skipped)) => {
                masked += skipped;
                a
            }
            Err(_) => env.noop(),
        };
        let out = env.step(action)?;
        rt.step(&out.transition)?;
    }
    Ok((rt.total_violations(), masked))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut corridor = Corridor1D::new(15, 200)?;
    let (v, m) = rollout(&mut corridor, "dithering-1d.flc", 100_000)?;
    println!("corridor + dithering: {v} violations, {m} actions masked");

    let mut grid = HazardGrid2D::new(8, 8, 8, 200, 3, false)?;
    let (v, m) = rollout(&mut grid, "proximity.flc", 100_000)?;
    println!("hazard grid + proximity: {v} violations, {m} actions masked");
    Ok(())
}
