//! Command-line front end. [`run_cli`] takes the full argv and returns the
//! process exit code: 0 on success, 1 for bad input (flags, specs,
//! configs), 2 for failures inside an otherwise valid run.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actionshape::HardMode;
use crate::agents::{run_experiment, write_outputs, AgentError, MeanStd, Summary};
use crate::automata::oracle::{all_words, first_disagreement, matches, word_count};
use crate::automata::{parse_regex, ExportFormat};
use crate::config::{ConfigError, Enforcement, ExperimentConfig};
use crate::constraint::{load_spec, ConstraintError, ConstraintSpec, Source};
use crate::kv;
use crate::shaping::{exact_hitting_times, induced_chain, simulate_chain, TvEstimator};

#[derive(Debug, Parser)]
#[command(
    name = "flc",
    version,
    about = "Compile, check and experiment with formal-language constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a constraint spec and print its DFA.
    Compile {
        /// Spec file, or the name of a built-in (e.g. dithering-1d.flc).
        spec: PathBuf,
        /// Graphviz output.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        /// JSON transition table.
        #[arg(long)]
        json: bool,
    },
    /// Feed tokens through a constraint and report where it is violated.
    Check {
        spec: PathBuf,
        #[arg(required = true, allow_hyphen_values = true)]
        tokens: Vec<String>,
    },
    /// Compare the compiled DFA with a brute-force reference.
    Equiv {
        spec: PathBuf,
        /// Use the brute-force membership oracle (the only reference available).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Switch to random sampling when exhaustive enumeration would need
        /// more words than this.
        #[arg(long, default_value_t = 5_000_000)]
        exhaustive_limit: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train and evaluate as configured, writing CSV and JSON metrics.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: RunArgs,
    },
    /// Repeat a run over reward-shaping coefficients.
    Sweep {
        config: PathBuf,
        /// Penalty magnitudes λ (comma separated or repeated).
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        lambda: Vec<f64>,
        #[command(flatten)]
        common: RunArgs,
    },
    /// Expected steps to violation: exact linear solve vs simulation.
    Hitting {
        spec: PathBuf,
        /// Either a row-stochastic matrix over recognizer states (one row
        /// per line) or `symbol = probability` lines.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        episodes: usize,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Enforce hard constraints during training, evaluation or both.
    #[arg(long, value_parser = clap::value_parser!(HardMode))]
    hard_mode: Option<HardMode>,
    /// Override the seed list (`0..10` or `[1, 2, 3]`).
    #[arg(long)]
    seeds: Option<String>,
    /// Override the output prefix.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl clap::ValueEnum for HardMode {
    fn value_variants<'a>() -> &'a [Self] {
        &[HardMode::TrainAndEval, HardMode::TrainOnly, HardMode::EvalOnly]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            HardMode::TrainAndEval => "both",
            HardMode::TrainOnly => "train",
            HardMode::EvalOnly => "eval",
        }))
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl From<ConstraintError> for CliError {
    fn from(e: ConstraintError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Config(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand, and returns the
/// exit code. Output goes to stdout, diagnostics to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut out = String::new();
    let result = dispatch(cli.command, &mut out);
    print!("{out}");
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut String) -> Result<i32, CliError> {
    match command {
        Command::Compile { spec, dot, json } => {
            let spec = load_spec(&spec)?;
            let format = if dot {
                ExportFormat::Dot
            } else if json {
                ExportFormat::Json
            } else {
                return compile_summary(&spec, out).map(|_| 0);
            };
            out.push_str(&spec.dfa().export(format));
            if !out.ends_with('\n') {
                out.push('\n');
            }
            Ok(0)
        }
        Command::Check { spec, tokens } => check(&load_spec(&spec)?, &tokens, out),
        Command::Equiv {
            spec,
            oracle: _,
            max_len,
            exhaustive_limit,
            samples,
            seed,
        } => equiv(&load_spec(&spec)?, max_len, exhaustive_limit, samples, seed, out),
        Command::Run { config, common } => {
            let cfg = prepare(&config, &common)?;
            run_one(&cfg, out)?;
            Ok(0)
        }
        Command::Sweep {
            config,
            lambda,
            common,
        } => sweep(&prepare(&config, &common)?, &lambda, out),
        Command::Hitting {
            spec,
            chain,
            episodes,
            max_steps,
            seed,
        } => hitting(&load_spec(&spec)?, &chain, episodes, max_steps, seed, out),
    }
}

fn compile_summary(spec: &ConstraintSpec, out: &mut String) -> Result<(), CliError> {
    let dfa = spec.dfa();
    let _ = writeln!(out, "constraint: {}", spec.name());
    let _ = writeln!(out, "alphabet: {}", dfa.alphabet().symbols().join(" "));
    let _ = writeln!(out, "states: {}", dfa.num_states());
    let _ = writeln!(out, "start: q{}", dfa.start());
    let acc: Vec<String> = dfa.accepting_states().iter().map(|q| format!("q{q}")).collect();
    let _ = writeln!(out, "accepting: {}", acc.join(" "));
    let _ = writeln!(out, "mode: {}", spec.mode());
    Ok(())
}

fn check(spec: &ConstraintSpec, tokens: &[String], out: &mut String) -> Result<i32, CliError> {
    let dfa = spec.dfa();
    let mut rt = crate::constraint::RecognizerRuntime::new(std::sync::Arc::new(spec.clone()));
    let mut last = dfa.start();
    for (i, tok) in tokens.iter().enumerate() {
        let step = rt.step_token(tok)?;
        last = step.q_next;
        let _ = writeln!(out, "step {}: {tok} -> q{}", i + 1, step.q_next);
        if step.violated {
            let _ = writeln!(out, "violation at step {}", i + 1);
        }
    }
    let _ = writeln!(
        out,
        "final state: q{last} ({})",
        if dfa.is_accepting(last) { "accepting" } else { "not accepting" }
    );
    let _ = writeln!(out, "violations: {}", rt.violation_count());
    Ok(0)
}

fn equiv(
    spec: &ConstraintSpec,
    max_len: usize,
    exhaustive_limit: usize,
    samples: usize,
    seed: u64,
    out: &mut String,
) -> Result<i32, CliError> {
    let alphabet = spec.alphabet();
    let reference: Box<dyn Fn(&[usize]) -> bool> = match spec.source() {
        Source::Pattern {
            reset_heuristic: true,
            ..
        } => {
            return Err(CliError::Input(
                "reset-heuristic recognizers do not recognize their pattern's language; \
                 there is no regex oracle to compare against"
                    .into(),
            ))
        }
        Source::Pattern { text, .. } => {
            let ast = parse_regex(text, alphabet).map_err(ConstraintError::from)?;
            Box::new(move |w| matches(&ast, w))
        }
        Source::Builder(b) => {
            let b = b.clone();
            let sigma = alphabet.clone();
            Box::new(move |w| b.holds(&sigma, w))
        }
    };
    let k = alphabet.len();
    let total = word_count(k, max_len);
    let (label, bad) = if total <= exhaustive_limit {
        (
            format!("exhaustive, {total} words up to length {max_len}"),
            first_disagreement(spec.dfa(), all_words(k, max_len), &reference),
        )
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<Vec<usize>> = (0..samples)
            .map(|_| {
                let len = rng.gen_range(0..=max_len);
                (0..len).map(|_| rng.gen_range(0..k)).collect()
            })
            .collect();
        (
            format!("sampled, {samples} words up to length {max_len}, seed {seed}"),
            first_disagreement(spec.dfa(), words, &reference),
        )
    };
    match bad {
        None => {
            let kind = if total <= exhaustive_limit { "exhaustive" } else { "sampled" };
            let _ = writeln!(out, "EQUIVALENT ({kind})");
            let _ = writeln!(out, "checked: {label}");
            Ok(0)
        }
        Some(w) => {
            let word: Vec<&str> = w.iter().map(|&a| alphabet.symbol(a).unwrap_or("?")).collect();
            let _ = writeln!(out, "DIFFERENT ({label})");
            let _ = writeln!(
                out,
                "counterexample: [{}] dfa={} oracle={}",
                word.join(" "),
                spec.dfa().accepts_indices(&w),
                reference(&w)
            );
            Ok(3)
        }
    }
}

fn prepare(path: &Path, common: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(mode) = common.hard_mode {
        cfg.enforcement = Enforcement::Hard(mode);
        cfg.dense = false;
    }
    if let Some(seeds) = &common.seeds {
        cfg.seeds = crate::config::parse_seeds(seeds).map_err(CliError::Input)?;
    }
    if let Some(output) = &common.output {
        cfg.output = Some(output.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_one(cfg: &ExperimentConfig, out: &mut String) -> Result<Summary, CliError> {
    let runs = run_experiment(cfg)?;
    let summary = Summary::new(cfg, &runs);
    let _ = writeln!(out, "env: {}", summary.env);
    let _ = writeln!(out, "constraints: {}", summary.constraints.join(", "));
    let _ = writeln!(out, "enforcement: {}", summary.enforcement);
    let _ = writeln!(out, "augmentation: {}  dense: {}", summary.augmentation, summary.dense);
    let _ = writeln!(out, "seed  cost_rate  train_viol  eval_viol/ep  eval_return/ep  lambda");
    for s in &summary.per_seed {
        let _ = writeln!(
            out,
            "{:>4}  {:>9.5}  {:>10}  {:>12.4}  {:>14.4}  {:>6.4}",
            s.seed,
            s.cost_rate,
            s.train_violations,
            s.eval_violations_per_episode,
            s.eval_return_per_episode,
            s.final_lambda
        );
    }
    let n = summary.per_seed.len();
    let evals: Vec<f64> = summary.per_seed.iter().map(|s| s.eval_violations_per_episode).collect();
    let ev = MeanStd::of(&evals);
    let _ = writeln!(
        out,
        "eval violations/episode: {:.4} ± {:.4} (s.e.)",
        ev.mean,
        ev.sem(n)
    );
    let _ = writeln!(
        out,
        "cost rate: {:.5} ± {:.5} (s.e.)",
        summary.cost_rate.mean,
        summary.cost_rate.sem(n)
    );
    let _ = writeln!(out, "eval return/episode: {:.4}", summary.eval.ret.mean);
    if let Some(prefix) = &cfg.output {
        write_outputs(prefix, &runs, &summary)
            .map_err(|e| CliError::Internal(format!("writing {}: {e}", prefix.display())))?;
        let _ = writeln!(out, "wrote {}.csv, {}_eval.csv, {}.json", prefix.display(), prefix.display(), prefix.display());
    }
    Ok(summary)
}

fn sweep(cfg: &ExperimentConfig, lambdas: &[f64], out: &mut String) -> Result<i32, CliError> {
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(CliError::Input("λ values must be finite and non-negative".into()));
    }
    let mut table = String::from("lambda,eval_violations_mean,eval_violations_sem,eval_return_mean,cost_rate_mean\n");
    for &lambda in lambdas {
        let mut c = cfg.with_enforcement(Enforcement::Shaping { lambda });
        c.output = cfg
            .output
            .as_ref()
            .map(|p| PathBuf::from(format!("{}_lambda{lambda}", p.display())));
        let _ = writeln!(out, "== lambda {lambda}");
        let summary = run_one(&c, out)?;
        let n = summary.per_seed.len();
        let evals: Vec<f64> = summary.per_seed.iter().map(|s| s.eval_violations_per_episode).collect();
        let ev = MeanStd::of(&evals);
        let _ = writeln!(
            table,
            "{lambda},{},{},{},{}",
            ev.mean,
            ev.sem(n),
            summary.eval.ret.mean,
            summary.cost_rate.mean
        );
    }
    let _ = writeln!(out, "== sweep");
    out.push_str(&table);
    if let Some(prefix) = &cfg.output {
        let path = PathBuf::from(format!("{}_sweep.csv", prefix.display()));
        std::fs::write(&path, &table)
            .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))?;
    }
    Ok(0)
}

/// Reads either a state-transition matrix or per-symbol probabilities.
fn read_chain(spec: &ConstraintSpec, path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    if text.lines().any(|l| l.contains('=')) {
        let entries = kv::parse(&text).map_err(|e| bad(format!("line {}: {}", e.line, e.message)))?;
        let alphabet = spec.alphabet();
        let mut probs = vec![0.0; alphabet.len()];
        for e in entries {
            let a = alphabet
                .index_of(&e.key)
                .ok_or_else(|| bad(format!("line {}: unknown symbol {:?}", e.line, e.key)))?;
            probs[a] = e
                .value
                .parse()
                .map_err(|_| bad(format!("line {}: not a probability: {:?}", e.line, e.value)))?;
        }
        return induced_chain(spec.dfa(), &probs).map_err(|e| bad(e.to_string()));
    }
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = spec.num_states();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(bad(format!("expected a {n}x{n} matrix over recognizer states")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn hitting(
    spec: &ConstraintSpec,
    chain_path: &Path,
    episodes: usize,
    max_steps: usize,
    seed: u64,
    out: &mut String,
) -> Result<i32, CliError> {
    let chain = read_chain(spec, chain_path)?;
    let dfa = spec.dfa();
    let targets: Vec<bool> = (0..dfa.num_states()).map(|q| dfa.is_accepting(q)).collect();
    let exact = exact_hitting_times(&chain, &targets).map_err(|e| CliError::Input(e.to_string()))?;
    let mut est = TvEstimator::new(targets.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..episodes {
        let path = simulate_chain(&chain, &targets, dfa.start(), max_steps, &mut rng);
        est.update_from_states(&path);
    }
    let fmt = |x: f64| if x.is_finite() { format!("{x:.4}") } else { "inf".into() };
    let _ = writeln!(out, "state  exact      empirical  samples  rel_err");
    for q in 0..dfa.num_states() {
        let e = est.estimate(q);
        let rel = if exact[q].is_finite() && exact[q] > 0.0 && e.is_finite() {
            format!("{:.4}", (e - exact[q]).abs() / exact[q])
        } else {
            "-".into()
        };
        let _ = writeln!(
            out,
            "q{q:<4}  {:<9}  {:<9}  {:<7}  {rel}",
            fmt(exact[q]),
            fmt(e),
            est.sample_count(q)
        );
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        run_cli(std::iter::once("flc").chain(args.iter().copied()))
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["compile", "dithering-1d.flc"]), 0);
        assert_eq!(run(&["compile", "dithering-1d.flc", "--bogus"]), 1);
        assert_eq!(run(&["nope"]), 1);
        assert_eq!(run(&["compile", "/no/such/spec.flc"]), 1);
        assert_eq!(run(&["check", "dithering-1d.flc", "l", "x"]), 1);
        assert_eq!(run(&["check", "--help"]), 0);
    }

    #[test]
    fn check_reports_violation_step() {
        let spec = load_spec("dithering-1d.flc").unwrap();
        let mut out = String::new();
        let toks: Vec<String> = ["l", "r", "l", "r"].iter().map(|s| s.to_string()).collect();
        check(&spec, &toks, &mut out).unwrap();
        assert!(out.contains("violation at step 4"), "{out}");
        assert!(out.contains("(accepting)"));
    }

    #[test]
    fn equiv_small() {
        let spec = load_spec("dithering-1d.flc").unwrap();
        let mut out = String::new();
        assert_eq!(equiv(&spec, 6, 1_000_000, 0, 0, &mut out).unwrap(), 0);
        assert!(out.starts_with("EQUIVALENT (exhaustive)"));
    }
}
