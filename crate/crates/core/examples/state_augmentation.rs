//! Augmenting MDP states with recognizer states, as a one-hot vector or as
//! an index into the product space used by tabular agents.
//!
//!     cargo run --example state_augmentation

use std::sync::Arc;

use flc::constraint::{augment, embedding_dim, load_spec, product_index, Encoding, RecognizerRuntime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dither = Arc::new(load_spec("dithering-1d.flc")?);
    let over = Arc::new(load_spec("overactuation-1d.flc")?);
    let mut rts = [RecognizerRuntime::new(dither.clone()), RecognizerRuntime::new(over.clone())];
    let sizes = [dither.num_states(), over.num_states()];
    println!("|Q| = {sizes:?}, embedding widths {:?}", [embedding_dim(sizes[0])?, embedding_dim(sizes[1])?]);

    let s = 7; // some MDP state
    for tok in ["l", "l", "r", "l"] {
        for rt in rts.iter_mut() {
            rt.step_token(tok)?;
        }
        let qs = [rts[0].state(), rts[1].state()];
        println!(
            "{tok}: q={qs:?} one-hot={:?} product index={}",
            augment(s, qs[0], Encoding::OneHot, sizes[0])?,
            product_index(s, &qs, &sizes)
        );
    }
    Ok(())
}
