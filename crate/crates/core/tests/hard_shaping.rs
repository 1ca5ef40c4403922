mod common;

use common::random_filtered;
use flc::agents::run_experiment;
use flc::config::ExperimentConfig;

#[test]
fn random_policy_never_violates_corridor() {
    let (v, fb) = random_filtered("corridor1d(length=15, max_steps=200)", &["dithering-1d.flc"], 100_000, 5);
    assert_eq!((v, fb), (0, 0));
}

#[test]
fn random_policy_never_violates_hazard_grid() {
    let (v, fb) = random_filtered(
        "hazardgrid(w=8, h=8, hazards=8, max_steps=200, relayout=true)",
        &["proximity.flc"],
        100_000,
        6,
    );
    assert_eq!((v, fb), (0, 0));
}

#[test]
fn two_constraints_at_once() {
    let (v, _) = random_filtered(
        "corridor1d(length=15, max_steps=200)",
        &["dithering-1d.flc", "overactuation-1d.flc"],
        20_000,
        7,
    );
    assert_eq!(v, 0);
}

#[test]
fn train_only_mode_is_clean_in_training() {
    let cfg = ExperimentConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/hard-train-only.cfg")).unwrap();
    let runs = run_experiment(&cfg).unwrap();
    for r in &runs {
        assert_eq!(r.train.iter().map(|m| m.violations).sum::<u64>(), 0);
        assert_eq!(r.eval.len(), cfg.eval_episodes);
    }
}
