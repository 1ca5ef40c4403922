//! Tabular Q-learning under formal-language constraints.
//!
//! A run owns its environment, recognizers, t_v estimators and Q-table and
//! draws all randomness from a single ChaCha8 stream seeded with the run
//! seed, so `train(config, seed)` is bit-reproducible. Seeds run in
//! parallel and results are returned in seed order.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::actionshape::{enforcement_schedule, filter_action, ActionShapeError, HardMode, Phase, RankedActions};
use crate::config::{Augmentation, Enforcement, ExperimentConfig};
use crate::constraint::{product_index, ConstraintError, RecognizerRuntime, TranslatorBinding};
use crate::envs::{EnvError, EnvSpec, Environment};
use crate::shaping::{baseline_from_episode, dense_cost, lagrangian_update, shaped_reward, TvEstimator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    /// The experiment cannot run as configured (e.g. a translator that does
    /// not fit the environment).
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Action values over a finite state index space.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
}

impl QTable {
    pub fn new(states: usize, actions: usize, alpha: f64, gamma: f64) -> Self {
        Self {
            states,
            actions,
            values: vec![0.0; states * actions],
            alpha,
            gamma,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_actions(&self) -> usize {
        self.actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-valued action; ties go to the lowest index.
    pub fn greedy(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for a in 1..row.len() {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    /// All actions, best first; ties by index.
    pub fn ranked(&self, s: usize) -> Vec<usize> {
        let row = self.row(s);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        order
    }
}

/// Q(s,a) ← Q(s,a) + α[r + γ·max Q(s′,·)·(1 − done) − Q(s,a)].
pub fn q_update(table: &mut QTable, s: usize, a: usize, r: f64, s_next: usize, done: bool) {
    let bootstrap = if done { 0.0 } else { table.gamma * table.max_value(s_next) };
    let q = table.get(s, a);
    table.set(s, a, q + table.alpha * (r + bootstrap - q));
}

/// One row of the metrics stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub seed: u64,
    pub episode: usize,
    /// Undiscounted environment return (no penalties).
    #[serde(rename = "return")]
    pub ret: f64,
    /// Sparse cost summed over constraints.
    pub cost: f64,
    pub violations: u64,
    pub steps: usize,
    /// Penalty coefficient in force during the episode.
    pub lambda: f64,
    /// Sparse cost accumulated since the start of the phase.
    pub cumulative_cost: f64,
    /// Actions skipped by action shaping.
    pub masked: u64,
    /// Steps where every action was masked and the no-op fallback was used.
    pub fallbacks: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub train: Vec<EpisodeMetrics>,
    pub eval: Vec<EpisodeMetrics>,
    pub table: QTable,
    pub final_lambda: f64,
}

impl RunResult {
    /// Training cost per training step.
    pub fn cost_rate(&self) -> f64 {
        cost_rate(&self.train)
    }
}

/// Total sparse cost divided by total steps; 0 for an empty stream.
pub fn cost_rate(metrics: &[EpisodeMetrics]) -> f64 {
    let steps: usize = metrics.iter().map(|m| m.steps).sum();
    if steps == 0 {
        return 0.0;
    }
    metrics.iter().map(|m| m.cost).sum::<f64>() / steps as f64
}

/// Runs every seed of `cfg` (in parallel) and returns results in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunResult>, AgentError> {
    check_compatibility(cfg)?;
    cfg.seeds.par_iter().map(|&seed| train(cfg, seed)).collect()
}

/// Rejects translator/environment pairs that cannot produce meaningful
/// tokens, then probes every action from the initial state.
pub fn check_compatibility(cfg: &ExperimentConfig) -> Result<(), AgentError> {
    let corridor = matches!(cfg.env, EnvSpec::Corridor1D { .. });
    for spec in &cfg.constraints {
        let ok = match spec.translator().binding() {
            TranslatorBinding::Sign1D | TranslatorBinding::MagnitudeBins { .. } => corridor,
            TranslatorBinding::ProximityBins { .. } => !corridor,
            TranslatorBinding::Direction2D { .. } => true,
            TranslatorBinding::Identity => false,
        };
        if !ok {
            return Err(AgentError::Config(format!(
                "constraint {} uses translator {} which does not fit environment {}",
                spec.name(),
                spec.translator().binding(),
                cfg.env
            )));
        }
    }
    let env = cfg
        .env
        .build(cfg.seeds.first().copied().unwrap_or(0))
        .map_err(|e| AgentError::Config(e.to_string()))?;
    for a in 0..env.num_actions() {
        let t = env.predict(a)?;
        for spec in &cfg.constraints {
            spec.translator().symbol_index(&t).map_err(|e| {
                AgentError::Config(format!(
                    "constraint {} cannot translate action {}: {e}",
                    spec.name(),
                    env.action_name(a)
                ))
            })?;
        }
    }
    Ok(())
}

/// t_v baseline used for the dense cost.
pub fn dense_baseline(cfg: &ExperimentConfig) -> Result<f64, AgentError> {
    if let Some(b) = cfg.baseline {
        return Ok(b);
    }
    let d = match cfg.enforcement {
        Enforcement::Lagrangian { d, .. } => d,
        _ => cfg.constraints.iter().map(|c| c.limit()).fold(f64::INFINITY, f64::min),
    };
    baseline_from_episode(cfg.env.max_steps() as f64, d).map_err(|e| {
        AgentError::Config(format!("cannot derive a t_v baseline ({e}); set `baseline`"))
    })
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    env: Box<dyn Environment + Send>,
    runtimes: Vec<RecognizerRuntime>,
    sizes: Vec<usize>,
    table: QTable,
    estimators: Vec<TvEstimator>,
    baseline: f64,
    rng: ChaCha8Rng,
    lambda: f64,
}

struct Episode {
    ret: f64,
    cost: f64,
    violations: u64,
    steps: usize,
    masked: u64,
    fallbacks: u64,
}

impl<'a> Runner<'a> {
    fn augmented(&self, s: usize) -> usize {
        match self.cfg.augmentation {
            Augmentation::None => s,
            Augmentation::Product => {
                let qs: Vec<usize> = self.runtimes.iter().map(|r| r.state()).collect();
                product_index(s, &qs, &self.sizes)
            }
        }
    }

    fn hard(&self, phase: Phase) -> Option<HardMode> {
        match self.cfg.enforcement {
            Enforcement::Hard(mode) if enforcement_schedule(mode, phase) => Some(mode),
            _ => None,
        }
    }

    fn episode(&mut self, phase: Phase, epsilon: f64) -> Result<Episode, AgentError> {
        let learn = phase == Phase::Train;
        let hard = self.hard(phase).is_some();
        let dense = self.cfg.dense && learn;
        let phis: Vec<Vec<f64>> = if dense {
            self.estimators
                .iter()
                .map(|e| e.potentials(self.baseline))
                .collect::<Result<_, _>>()
                .map_err(|e| AgentError::Config(e.to_string()))?
        } else {
            Vec::new()
        };
        let mut traces: Vec<(Vec<usize>, Vec<usize>)> = self
            .runtimes
            .iter()
            .map(|r| (vec![r.state()], Vec::new()))
            .collect();

        let mut s = self.env.reset();
        for rt in &mut self.runtimes {
            rt.reset();
        }
        let mut ep = Episode {
            ret: 0.0,
            cost: 0.0,
            violations: 0,
            steps: 0,
            masked: 0,
            fallbacks: 0,
        };
        let n_actions = self.env.num_actions();
        while !self.env.is_done() {
            let x = self.augmented(s);
            let explore = epsilon > 0.0 && self.rng.gen::<f64>() < epsilon;
            let explore_action = if explore {
                Some(self.rng.gen_range(0..n_actions))
            } else {
                None
            };
            let action = if hard {
                let mut order = self.table.ranked(x);
                if let Some(a) = explore_action {
                    order.retain(|&b| b != a);
                    order.insert(0, a);
                }
                let ranked = RankedActions::new(order).expect("ranking is a permutation");
                let env = &self.env;
                match filter_action(&self.runtimes, &ranked, |&a| {
                    env.predict(a).expect("ranked actions are in range")
                }) {
                    Ok((a, masked)) => {
                        ep.masked += masked as u64;
                        a
                    }
                    Err(ActionShapeError::EmptyActionSet { .. }) => {
                        ep.fallbacks += 1;
                        self.env.noop()
                    }
                    Err(ActionShapeError::Constraint(e)) => return Err(e.into()),
                    Err(ActionShapeError::InvalidRanking) => unreachable!("ranking is a permutation"),
                }
            } else {
                explore_action.unwrap_or_else(|| self.table.greedy(x))
            };

            let out = self.env.step(action)?;
            let mut sparse = 0.0;
            let mut signal = 0.0;
            for (i, rt) in self.runtimes.iter_mut().enumerate() {
                let q_prev = rt.state();
                let o = rt.step(&out.transition)?;
                sparse += o.cost;
                signal += if dense {
                    dense_cost(q_prev, o.q_next, rt.spec().costs(), &phis[i], self.cfg.beta, self.cfg.gamma)
                } else {
                    o.cost
                };
                if o.violated {
                    ep.violations += 1;
                }
                // The visit that starts the next step is recorded as the
                // state δ led to; under reset semantics this is the
                // accepting state itself, which carries the violation time.
                let (states, viols) = &mut traces[i];
                states.push(o.q_next);
                if o.violated {
                    viols.push(states.len() - 1);
                }
            }
            ep.ret += out.reward;
            ep.cost += sparse;
            ep.steps += 1;
            if learn {
                let x_next = self.augmented(out.state);
                let r = shaped_reward(out.reward, signal, self.lambda);
                q_update(&mut self.table, x, action, r, x_next, out.terminal);
            }
            s = out.state;
        }
        if learn {
            for (est, (states, viols)) in self.estimators.iter_mut().zip(&traces) {
                est.update(states, viols);
            }
        }
        Ok(ep)
    }
}

/// Trains one seed and evaluates the greedy policy.
pub fn train(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult, AgentError> {
    cfg.validate().map_err(|e| AgentError::Config(e.to_string()))?;
    let env = cfg.env.build(seed).map_err(|e| AgentError::Config(e.to_string()))?;
    let runtimes: Vec<RecognizerRuntime> = cfg
        .constraints
        .iter()
        .map(|c| RecognizerRuntime::new(c.clone()))
        .collect();
    let sizes: Vec<usize> = cfg.constraints.iter().map(|c| c.num_states()).collect();
    let n_states = match cfg.augmentation {
        Augmentation::None => env.num_states(),
        Augmentation::Product => sizes
            .iter()
            .try_fold(env.num_states(), |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| AgentError::Config("product state space too large".into()))?,
    };
    let table = QTable::new(n_states, env.num_actions(), cfg.alpha, cfg.gamma);
    let baseline = if cfg.dense { dense_baseline(cfg)? } else { 1.0 };
    let lambda = match cfg.enforcement {
        Enforcement::Shaping { lambda } => lambda,
        _ => 0.0,
    };
    let mut runner = Runner {
        cfg,
        env,
        estimators: cfg.constraints.iter().map(|c| TvEstimator::for_dfa(c.dfa())).collect(),
        runtimes,
        sizes,
        table,
        baseline,
        rng: ChaCha8Rng::seed_from_u64(seed),
        lambda,
    };

    let mut train = Vec::with_capacity(cfg.episodes);
    let mut cumulative = 0.0;
    for episode in 0..cfg.episodes {
        let lambda = runner.lambda;
        let ep = runner.episode(Phase::Train, cfg.epsilon(episode))?;
        cumulative += ep.cost;
        if let Enforcement::Lagrangian { d, eta } = cfg.enforcement {
            runner.lambda = lagrangian_update(runner.lambda, ep.cost, d, eta);
        }
        train.push(metrics(seed, episode, &ep, lambda, cumulative));
    }

    let mut eval = Vec::with_capacity(cfg.eval_episodes);
    let mut cumulative = 0.0;
    for episode in 0..cfg.eval_episodes {
        let ep = runner.episode(Phase::Eval, 0.0)?;
        cumulative += ep.cost;
        eval.push(metrics(seed, episode, &ep, runner.lambda, cumulative));
    }

    Ok(RunResult {
        seed,
        train,
        eval,
        final_lambda: runner.lambda,
        table: runner.table,
    })
}

fn metrics(seed: u64, episode: usize, ep: &Episode, lambda: f64, cumulative_cost: f64) -> EpisodeMetrics {
    EpisodeMetrics {
        seed,
        episode,
        ret: ep.ret,
        cost: ep.cost,
        violations: ep.violations,
        steps: ep.steps,
        lambda,
        cumulative_cost,
        masked: ep.masked,
        fallbacks: ep.fallbacks,
    }
}

pub const CSV_HEADER: &str = "seed,episode,return,cost,violations,steps,lambda,cumulative_cost";

/// One row per episode, in the order given.
pub fn metrics_csv<'m>(rows: impl IntoIterator<Item = &'m EpisodeMetrics>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for m in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            m.seed, m.episode, m.ret, m.cost, m.violations, m.steps, m.lambda, m.cumulative_cost
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample mean and (n − 1) standard deviation; std is 0 for n < 2.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }

    /// Standard error of the mean.
    pub fn sem(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.std / (n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub episodes: usize,
    #[serde(rename = "return")]
    pub ret: MeanStd,
    pub cost: MeanStd,
    pub violations: MeanStd,
    pub steps: MeanStd,
    /// Return divided by steps, pooled over all episodes.
    pub mean_step_reward: f64,
    pub violations_per_100_steps: f64,
    pub cost_rate: f64,
}

impl PhaseSummary {
    pub fn of(rows: &[&EpisodeMetrics]) -> Self {
        let col = |f: &dyn Fn(&EpisodeMetrics) -> f64| -> Vec<f64> { rows.iter().map(|m| f(m)).collect() };
        let steps: f64 = rows.iter().map(|m| m.steps as f64).sum();
        let per_step = |total: f64| if steps > 0.0 { total / steps } else { 0.0 };
        Self {
            episodes: rows.len(),
            ret: MeanStd::of(&col(&|m| m.ret)),
            cost: MeanStd::of(&col(&|m| m.cost)),
            violations: MeanStd::of(&col(&|m| m.violations as f64)),
            steps: MeanStd::of(&col(&|m| m.steps as f64)),
            mean_step_reward: per_step(rows.iter().map(|m| m.ret).sum()),
            violations_per_100_steps: 100.0 * per_step(rows.iter().map(|m| m.violations as f64).sum()),
            cost_rate: per_step(rows.iter().map(|m| m.cost).sum()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub cost_rate: f64,
    pub train_violations: u64,
    pub eval_violations_per_episode: f64,
    pub eval_return_per_episode: f64,
    pub final_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub env: String,
    pub constraints: Vec<String>,
    pub enforcement: String,
    pub augmentation: String,
    pub dense: bool,
    pub seeds: Vec<u64>,
    pub train: PhaseSummary,
    pub eval: PhaseSummary,
    /// Per-seed training cost rates.
    pub cost_rate: MeanStd,
    pub per_seed: Vec<SeedSummary>,
}

impl Summary {
    pub fn new(cfg: &ExperimentConfig, runs: &[RunResult]) -> Self {
        let train: Vec<&EpisodeMetrics> = runs.iter().flat_map(|r| &r.train).collect();
        let eval: Vec<&EpisodeMetrics> = runs.iter().flat_map(|r| &r.eval).collect();
        let per_seed: Vec<SeedSummary> = runs
            .iter()
            .map(|r| {
                let n = r.eval.len().max(1) as f64;
                SeedSummary {
                    seed: r.seed,
                    cost_rate: r.cost_rate(),
                    train_violations: r.train.iter().map(|m| m.violations).sum(),
                    eval_violations_per_episode: r.eval.iter().map(|m| m.violations as f64).sum::<f64>() / n,
                    eval_return_per_episode: r.eval.iter().map(|m| m.ret).sum::<f64>() / n,
                    final_lambda: r.final_lambda,
                }
            })
            .collect();
        let rates: Vec<f64> = per_seed.iter().map(|s| s.cost_rate).collect();
        Self {
            env: cfg.env.to_string(),
            constraints: cfg.constraint_paths.clone(),
            enforcement: cfg.enforcement.to_string(),
            augmentation: match cfg.augmentation {
                Augmentation::None => "none".into(),
                Augmentation::Product => "product".into(),
            },
            dense: cfg.dense,
            seeds: runs.iter().map(|r| r.seed).collect(),
            train: PhaseSummary::of(&train),
            eval: PhaseSummary::of(&eval),
            cost_rate: MeanStd::of(&rates),
            per_seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Writes `<prefix>.csv` (training), `<prefix>_eval.csv` and `<prefix>.json`.
pub fn write_outputs(prefix: &Path, runs: &[RunResult], summary: &Summary) -> io::Result<()> {
    if let Some(dir) = prefix.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let with_suffix = |suffix: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(suffix);
        std::path::PathBuf::from(name)
    };
    std::fs::write(with_suffix(".csv"), metrics_csv(runs.iter().flat_map(|r| &r.train)))?;
    std::fs::write(with_suffix("_eval.csv"), metrics_csv(runs.iter().flat_map(|r| &r.eval)))?;
    std::fs::write(with_suffix(".json"), summary.to_json() + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_update_examples() {
        let mut t = QTable::new(2, 2, 1.0, 0.99);
        q_update(&mut t, 0, 1, 1.0, 1, true);
        assert_eq!(t.get(0, 1), 1.0);
        let mut frozen = QTable::new(2, 2, 0.0, 0.99);
        frozen.set(0, 0, 0.3);
        q_update(&mut frozen, 0, 0, 5.0, 1, false);
        assert_eq!(frozen.get(0, 0), 0.3);
    }

    #[test]
    fn ranking_and_ties() {
        let mut t = QTable::new(1, 4, 0.1, 0.9);
        t.set(0, 2, 1.0);
        t.set(0, 3, 1.0);
        t.set(0, 0, -1.0);
        assert_eq!(t.greedy(0), 2);
        assert_eq!(t.ranked(0), vec![2, 3, 1, 0]);
    }

    #[test]
    fn cost_rate_examples() {
        let row = |cost: f64, steps| EpisodeMetrics {
            seed: 0,
            episode: 0,
            ret: 0.0,
            cost,
            violations: cost as u64,
            steps,
            lambda: 0.0,
            cumulative_cost: 0.0,
            masked: 0,
            fallbacks: 0,
        };
        assert_eq!(cost_rate(&[row(0.0, 100)]), 0.0);
        assert_eq!(cost_rate(&[row(4.0, 400), row(6.0, 600)]), 0.01);
    }

    #[test]
    fn mean_std() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std, 1.0);
        assert_eq!(MeanStd::of(&[4.0]).std, 0.0);
    }
}
