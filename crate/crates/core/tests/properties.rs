use std::sync::Arc;

use flc::constraint::{load_spec, RecognizerRuntime, Transition, ViolationMode};
use flc::envs::EnvSpec;
use flc::monitor::Monitor;
use flc::shaping::{dense_cost, potential};
use proptest::prelude::*;

proptest! {
    // With γ = 1 the potential terms of G′ telescope: summed over a
    // trajectory they equal β(Φ(q_T) − Φ(q_0)).
    #[test]
    fn shaping_telescopes(
        word in prop::collection::vec(0usize..4, 1..400),
        phi in prop::collection::vec(0.0f64..1.0, 9),
        beta in 0.1f64..5.0,
    ) {
        let spec = load_spec("dithering-1d.flc").unwrap();
        let dfa = spec.dfa();
        prop_assume!(phi.len() == dfa.num_states());
        let mut q = dfa.start();
        let mut shaped = 0.0;
        let mut sparse = 0.0;
        for &a in &word {
            let next = dfa.next(q, a);
            shaped += dense_cost(q, next, spec.costs(), &phi, beta, 1.0);
            sparse += spec.cost(next);
            q = next;
        }
        let expected = sparse + beta * (phi[q] - phi[dfa.start()]);
        prop_assert!((shaped - expected).abs() < 1e-9);
    }

    #[test]
    fn potential_is_bounded_and_decreasing(a in 0.0f64..1e4, b in 0.0f64..1e4, base in 0.1f64..1e3) {
        let (pa, pb) = (potential(a, base).unwrap(), potential(b, base).unwrap());
        prop_assert!((0.0..=1.0).contains(&pa));
        if a < b {
            prop_assert!(pa >= pb);
        }
    }

    // Lookahead never moves the recognizer and agrees with stepping.
    #[test]
    fn lookahead_is_pure(prefix in prop::collection::vec(-1.0f64..1.0, 0..30), v in -1.0f64..1.0) {
        let mut rt = RecognizerRuntime::new(Arc::new(load_spec("dithering-1d.flc").unwrap()));
        for x in prefix {
            rt.step(&Transition::scalar(x)).unwrap();
        }
        let before = rt.clone();
        let t = Transition::scalar(v);
        let ahead = rt.lookahead(&t).unwrap();
        let would = rt.would_violate(&t).unwrap();
        prop_assert_eq!(rt.state(), before.state());
        prop_assert_eq!(rt.total_violations(), before.total_violations());
        let out = rt.step(&t).unwrap();
        prop_assert_eq!(out.q_next, ahead);
        prop_assert_eq!(out.violated, would);
    }

    // In reset mode the runtime is back at q0 right after each violation;
    // in absorbing mode it follows δ exactly.
    #[test]
    fn violation_modes(word in prop::collection::vec(0usize..4, 0..200)) {
        let spec = load_spec("dithering-1d.flc").unwrap();
        let start = spec.dfa().start();
        let mut reset = RecognizerRuntime::new(Arc::new(spec.clone()));
        let mut plain = RecognizerRuntime::new(Arc::new(spec.clone().with_mode(ViolationMode::Absorbing)));
        let mut q = start;
        for &a in &word {
            let r = reset.step_symbol(a);
            if r.violated {
                prop_assert_eq!(reset.state(), start);
            }
            plain.step_symbol(a);
            q = spec.dfa().next(q, a);
            prop_assert_eq!(plain.state(), q);
        }
    }

    // Monitor outputs are a pure function of the token stream.
    #[test]
    fn monitor_is_deterministic(word in prop::collection::vec(prop::sample::select(vec!["n", "f", "l", "r"]), 0..100)) {
        let mut a = Monitor::open("dithering-1d.flc").unwrap();
        let mut b = Monitor::open("dithering-1d.flc").unwrap();
        for t in &word {
            prop_assert_eq!(a.step_token(t).unwrap(), b.step_token(t).unwrap());
        }
    }

    // Same seed and actions give the same trajectory.
    #[test]
    fn environments_are_deterministic(seed in 0u64..1000, actions in prop::collection::vec(0usize..9, 1..150)) {
        let spec = EnvSpec::parse("hazardgrid(w=6, h=6, hazards=5, max_steps=100, relayout=true)").unwrap();
        let mut x = spec.build(seed).unwrap();
        let mut y = spec.build(seed).unwrap();
        prop_assert_eq!(x.reset(), y.reset());
        for &a in &actions {
            if x.is_done() {
                prop_assert_eq!(x.reset(), y.reset());
            }
            prop_assert_eq!(x.step(a).unwrap(), y.step(a).unwrap());
        }
    }
}
