use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ltlx_core::bench::{run_suite, write_results, BenchOptions, SUITES};
use ltlx_core::explain::{compare, eval, explain, ExplainConfig, Outcome, RunHooks};
use ltlx_core::verifier::BatchMode;

#[derive(Parser)]
#[command(name = "ltlx", version, about = "Minimal LTL explanations of black-box sequence classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a PAC explanation of the acceptor inside the query.
    Explain(RunArgs),
    /// Run the formula learner and L* side by side on one evaluation suite.
    Compare(RunArgs),
    /// Score a given formula on a fresh suite.
    Eval(EvalArgs),
    /// Run a benchmark suite and write results.csv / results.json.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// dfa:<path>, ltl:<formula>, counter:balanced-parens, builtin:<name>, lstm:<path> or proc:<command>
    #[arg(long)]
    acceptor: String,
    /// LTL query delimiting the region to explain
    #[arg(long, default_value = "true")]
    query: String,
    /// Comma-separated symbols; defaults to the acceptor's own (a,b,c for ltl: and proc:)
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// uniform:maxlen=N or geometric:p=F, optionally ,weights=w1;w2;...
    #[arg(long, default_value = "uniform:maxlen=30")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 400.0)]
    timeout_secs: f64,
    #[arg(long, default_value_t = 30)]
    max_iterations: usize,
    /// full, core, or a list such as not,and,or,X,F,G,U
    #[arg(long, default_value = "full")]
    ops: String,
    /// first-failure or collect-all
    #[arg(long, default_value = "collect-all")]
    batch: BatchMode,
    /// Largest formula size the learner tries
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    /// Words in the evaluation suite
    #[arg(long, default_value_t = 2000)]
    eval_size: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append counterexamples to this JSONL file
    #[arg(long)]
    ce_log: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = 2000)]
    test_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// synthetic, parens, email or altbit
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace every row's acceptor, e.g. with lstm:<weights>
    #[arg(long)]
    acceptor: Option<String>,
    /// Also run L* on each repetition
    #[arg(long)]
    with_dfa: bool,
    /// Only these row indices (comma-separated)
    #[arg(long, value_delimiter = ',')]
    rows: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value = "uniform:maxlen=30")]
    dist: String,
    #[arg(long, default_value_t = 400.0)]
    timeout_secs: f64,
    #[arg(long, default_value_t = 30)]
    max_iterations: usize,
    #[arg(long, default_value = "full")]
    ops: String,
}

impl RunArgs {
    fn config(&self) -> ExplainConfig {
        ExplainConfig {
            acceptor: self.common.acceptor.clone(),
            query: self.common.query.clone(),
            alphabet: self.common.alphabet.clone(),
            epsilon: self.common.epsilon,
            delta: self.common.delta,
            dist: self.common.dist.clone(),
            seed: self.common.seed,
            timeout_secs: self.timeout_secs,
            max_iterations: self.max_iterations,
            ops: self.ops.clone(),
            batch: self.batch,
            max_size: self.max_size,
            eval_size: self.eval_size,
        }
    }

    fn hooks(&self) -> RunHooks {
        RunHooks { counterexample_log: self.ce_log.clone() }
    }
}

fn emit(out: Option<&PathBuf>, json: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, json).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn outcome_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::PacPass { .. } => 0,
        Outcome::EarlyStop { .. } => 2,
        Outcome::Failed { .. } => 1,
    }
}

fn summary(outcome: &Outcome, accuracy: Option<f64>) -> String {
    let acc = accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
    match outcome {
        Outcome::PacPass { formula, size, .. } => format!("PacPass {formula} (size {size}, accuracy {acc})"),
        Outcome::EarlyStop { formula, size, reason, delta_prime, epsilon_prime, .. } => format!(
            "EarlyStop ({reason}) {formula} (size {size}, accuracy {acc}, delta' {delta_prime}, epsilon' {epsilon_prime})"
        ),
        Outcome::Failed { error } => format!("Failed: {error}"),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Explain(args) => {
            let report = explain(&args.config(), &args.hooks())?;
            emit(args.out.as_ref(), &report.to_json())?;
            if args.out.is_some() {
                eprintln!("{}", summary(&report.outcome, report.accuracy));
            }
            Ok(outcome_code(&report.outcome))
        }
        Command::Compare(args) => {
            let report = compare(&args.config(), &args.hooks())?;
            emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)?;
            if args.out.is_some() {
                eprintln!("LTL: {}", summary(&report.ltl.outcome, report.ltl.accuracy));
                match &report.dfa.error {
                    Some(e) => eprintln!("DFA: failed: {e}"),
                    None => eprintln!(
                        "DFA: {} states, accuracy {}",
                        report.dfa.states.unwrap_or(0),
                        report.dfa.accuracy.map_or("-".into(), |a| format!("{a:.4}"))
                    ),
                }
            }
            Ok(outcome_code(&report.ltl.outcome))
        }
        Command::Eval(args) => {
            let cfg = ExplainConfig {
                acceptor: args.common.acceptor.clone(),
                query: args.common.query.clone(),
                alphabet: args.common.alphabet.clone(),
                epsilon: args.common.epsilon,
                delta: args.common.delta,
                dist: args.common.dist.clone(),
                seed: args.common.seed,
                eval_size: args.test_size,
                ..ExplainConfig::default()
            };
            let report = eval(&args.formula, &cfg)?;
            emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)?;
            if args.out.is_some() {
                eprintln!("accuracy {:.4} ({} mismatches)", report.accuracy, report.mismatches.len());
            }
            Ok(0)
        }
        Command::Bench(args) => {
            if !SUITES.contains(&args.suite.as_str()) {
                bail!("unknown suite `{}` (synthetic, parens, email, altbit)", args.suite);
            }
            let opts = BenchOptions {
                reps: args.reps,
                seed: args.seed,
                base: ExplainConfig {
                    epsilon: args.epsilon,
                    delta: args.delta,
                    dist: args.dist.clone(),
                    timeout_secs: args.timeout_secs,
                    max_iterations: args.max_iterations,
                    ops: args.ops.clone(),
                    ..ExplainConfig::default()
                },
                acceptor_override: args.acceptor.clone(),
                with_dfa: args.with_dfa,
                rows: args.rows.clone(),
                ..BenchOptions::default()
            };
            let rows = run_suite(&args.suite, &opts).expect("suite name checked");
            write_results(&args.out, &args.suite, &rows).with_context(|| format!("writing {}", args.out.display()))?;
            for r in &rows {
                eprintln!(
                    "{:>2} {:<28} {:<40} size {:>5} acc {:>6} pac {:.2}",
                    r.index,
                    r.acceptor,
                    r.query,
                    r.mean_size.map_or("-".into(), |s| format!("{s:.1}")),
                    r.mean_accuracy.map_or("-".into(), |a| format!("{:.1}", a * 100.0)),
                    r.pac_rate
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
