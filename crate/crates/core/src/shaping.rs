//! Learned dense cost: expected time-to-violation, the potential Φ built
//! from it, potential-based shaping of the sparse cost, and the reward /
//! Lagrangian combinations used to optimize against it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::automata::{Dfa, StateId};

/// Default dual-ascent step for [`lagrangian_update`].
pub const DEFAULT_ETA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapingError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingConfig {
    /// Scale of the potential term relative to the sparse cost.
    pub beta: f64,
    pub gamma: f64,
    pub baseline: f64,
    /// Reward-shaping coefficient, a positive magnitude (`r - λc`).
    pub lambda: f64,
    pub enabled: bool,
}

impl ShapingConfig {
    pub fn new(beta: f64, gamma: f64, baseline: f64, lambda: f64) -> Result<Self, ShapingError> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(ShapingError::Domain(format!("beta must be >= 0, got {beta}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(ShapingError::Domain(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(ShapingError::Domain(format!("baseline must be > 0, got {baseline}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ShapingError::Domain(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self {
            beta,
            gamma,
            baseline,
            lambda,
            enabled: true,
        })
    }
}

/// Φ = (1/2)^(E[t_v] / baseline). An infinite expectation gives 0.
pub fn potential(expected_tv: f64, baseline: f64) -> Result<f64, ShapingError> {
    if expected_tv.is_nan() || expected_tv < 0.0 {
        return Err(ShapingError::Domain(format!(
            "expected time-to-violation must be >= 0, got {expected_tv}"
        )));
    }
    if !(baseline > 0.0) {
        return Err(ShapingError::Domain(format!("baseline must be > 0, got {baseline}")));
    }
    Ok(0.5f64.powf(expected_tv / baseline))
}

/// G′(q_prev, q_next) = G(q_next) + β(γΦ(q_next) − Φ(q_prev)).
pub fn dense_cost(
    q_prev: StateId,
    q_next: StateId,
    costs: &[f64],
    phi: &[f64],
    beta: f64,
    gamma: f64,
) -> f64 {
    costs[q_next] + beta * (gamma * phi[q_next] - phi[q_prev])
}

/// t_v baseline as episode length over the cost limit `d`.
pub fn baseline_from_episode(length: f64, d: f64) -> Result<f64, ShapingError> {
    if !(length > 0.0) {
        return Err(ShapingError::Domain(format!("episode length must be > 0, got {length}")));
    }
    if !(d > 0.0) {
        return Err(ShapingError::Domain(format!(
            "cost limit must be > 0 to derive a baseline, got {d}"
        )));
    }
    Ok(length / d)
}

pub fn shaped_reward(r: f64, c: f64, lambda: f64) -> f64 {
    r - lambda * c
}

/// Projected dual ascent: max(0, λ + η(J_c − d)).
pub fn lagrangian_update(lambda: f64, cost: f64, d: f64, eta: f64) -> f64 {
    (lambda + eta * (cost - d)).max(0.0)
}

/// Expected steps until first entering a target state, for every state of
/// a Markov chain with row-stochastic `chain`. Targets get 0; states that
/// fail to reach a target with probability one get +∞.
pub fn exact_hitting_times(chain: &DMatrix<f64>, targets: &[bool]) -> Result<Vec<f64>, ShapingError> {
    let n = chain.nrows();
    if chain.ncols() != n || targets.len() != n {
        return Err(ShapingError::Domain(format!(
            "chain is {}x{} but {} target flags were given",
            n,
            chain.ncols(),
            targets.len()
        )));
    }
    for (i, row) in chain.row_iter().enumerate() {
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.sum() - 1.0).abs() > 1e-9 {
            return Err(ShapingError::Domain(format!("row {i} is not a probability distribution")));
        }
    }

    // Backward reachability over positive-probability edges.
    let back_reach = |seed: &dyn Fn(usize) -> bool, allowed: &dyn Fn(usize) -> bool| {
        let mut mark: Vec<bool> = (0..n).map(seed).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&i| mark[i]).collect();
        while let Some(j) = stack.pop() {
            for i in 0..n {
                if !mark[i] && allowed(i) && chain[(i, j)] > 0.0 {
                    mark[i] = true;
                    stack.push(i);
                }
            }
        }
        mark
    };
    let reaches_target = back_reach(&|i| targets[i], &|i| !targets[i]);
    // Any positive-probability path into a state that never reaches a
    // target makes the expectation infinite.
    let stuck = back_reach(&|i| !reaches_target[i], &|i| !targets[i]);

    let solve: Vec<usize> = (0..n).filter(|&i| !targets[i] && !stuck[i]).collect();
    let mut out: Vec<f64> = (0..n)
        .map(|i| if targets[i] { 0.0 } else { f64::INFINITY })
        .collect();
    if solve.is_empty() {
        return Ok(out);
    }
    let m = solve.len();
    // (I − P_SS) E = 1
    let a = DMatrix::from_fn(m, m, |r, c| {
        let p = chain[(solve[r], solve[c])];
        if r == c {
            1.0 - p
        } else {
            -p
        }
    });
    let e = a
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .ok_or_else(|| ShapingError::Domain("hitting-time system is singular".into()))?;
    for (k, &i) in solve.iter().enumerate() {
        out[i] = e[k];
    }
    Ok(out)
}

/// Chain over recognizer states induced by drawing each symbol
/// independently with the given probabilities.
pub fn induced_chain(dfa: &Dfa, symbol_probs: &[f64]) -> Result<DMatrix<f64>, ShapingError> {
    if symbol_probs.len() != dfa.alphabet().len() {
        return Err(ShapingError::Domain(format!(
            "expected {} symbol probabilities, got {}",
            dfa.alphabet().len(),
            symbol_probs.len()
        )));
    }
    let n = dfa.num_states();
    let mut m = DMatrix::zeros(n, n);
    for q in 0..n {
        for (a, &p) in symbol_probs.iter().enumerate() {
            m[(q, dfa.next(q, a))] += p;
        }
    }
    Ok(m)
}

/// Runs the chain from `start` until a target is entered or `max_steps`
/// transitions have been taken. Returns the visited states, `start` first.
pub fn simulate_chain<R: Rng>(
    chain: &DMatrix<f64>,
    targets: &[bool],
    start: StateId,
    max_steps: usize,
    rng: &mut R,
) -> Vec<StateId> {
    let n = chain.nrows();
    let mut path = vec![start];
    let mut q = start;
    for _ in 0..max_steps {
        if targets[q] {
            break;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = n - 1;
        for j in 0..n {
            acc += chain[(q, j)];
            if u < acc {
                next = j;
                break;
            }
        }
        q = next;
        path.push(q);
    }
    path
}

/// Per-state running mean of observed steps-to-next-violation.
///
/// Updated between episodes only; [`TvEstimator::potentials`] produces the
/// frozen table used while rolling out the next episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TvEstimator {
    accepting: Vec<bool>,
    sums: Vec<f64>,
    counts: Vec<u64>,
    censored: Vec<u64>,
}

impl TvEstimator {
    pub fn new(accepting: Vec<bool>) -> Self {
        let n = accepting.len();
        Self {
            accepting,
            sums: vec![0.0; n],
            counts: vec![0; n],
            censored: vec![0; n],
        }
    }

    pub fn for_dfa(dfa: &Dfa) -> Self {
        Self::new((0..dfa.num_states()).map(|q| dfa.is_accepting(q)).collect())
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    /// Folds one finished episode in. `states[t]` is the recognizer state
    /// at time t; `violations` lists the times at which a violation was
    /// recorded. Visits with no later violation are censored and only
    /// counted, not averaged.
    pub fn update(&mut self, states: &[StateId], violations: &[usize]) {
        let mut is_violation = vec![false; states.len()];
        for &t in violations {
            if t < states.len() {
                is_violation[t] = true;
            }
        }
        let mut next_violation: Option<usize> = None;
        for t in (0..states.len()).rev() {
            if is_violation[t] {
                next_violation = Some(t);
            }
            let q = states[t];
            match next_violation {
                Some(v) => {
                    self.sums[q] += (v - t) as f64;
                    self.counts[q] += 1;
                }
                None => self.censored[q] += 1,
            }
        }
    }

    /// Like [`update`](Self::update), taking violation times to be the
    /// visits to accepting states.
    pub fn update_from_states(&mut self, states: &[StateId]) {
        let v: Vec<usize> = (0..states.len())
            .filter(|&t| self.accepting[states[t]])
            .collect();
        self.update(states, &v);
    }

    /// Current E[t_v(q)]: 0 on accepting states, +∞ without samples.
    pub fn estimate(&self, q: StateId) -> f64 {
        if self.accepting[q] {
            0.0
        } else if self.counts[q] == 0 {
            f64::INFINITY
        } else {
            self.sums[q] / self.counts[q] as f64
        }
    }

    pub fn estimates(&self) -> Vec<f64> {
        (0..self.num_states()).map(|q| self.estimate(q)).collect()
    }

    pub fn sample_count(&self, q: StateId) -> u64 {
        self.counts[q]
    }

    pub fn censored_count(&self, q: StateId) -> u64 {
        self.censored[q]
    }

    /// Frozen Φ table for the next rollout.
    pub fn potentials(&self, baseline: f64) -> Result<Vec<f64>, ShapingError> {
        (0..self.num_states())
            .map(|q| potential(self.estimate(q), baseline))
            .collect()
    }

    /// `{"baseline", "states": [{"state", "t_v", "samples", "censored", "phi"}]}`,
    /// with `null` for infinite expectations.
    pub fn to_json(&self, baseline: f64) -> Result<Value, ShapingError> {
        let phi = self.potentials(baseline)?;
        let states: Vec<Value> = (0..self.num_states())
            .map(|q| {
                let tv = self.estimate(q);
                json!({
                    "state": q,
                    "t_v": if tv.is_finite() { json!(tv) } else { Value::Null },
                    "samples": self.counts[q],
                    "censored": self.censored[q],
                    "phi": phi[q],
                })
            })
            .collect();
        Ok(json!({ "baseline": baseline, "states": states }))
    }
}
