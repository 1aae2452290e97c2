//! Benchmark suites: fixed (acceptor, query) rows run with repetitions and
//! aggregated to CSV and JSON.

use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::explain::{compare_prepared, explain_prepared, ExplainConfig, Outcome, Prepared, RunHooks};
use crate::ltl::{parse_ltl, satisfies};

pub const SUITES: &[&str] = &["synthetic", "parens", "email", "altbit"];

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub acceptor: &'static str,
    pub query: &'static str,
    /// Explanation expected from a perfect acceptor, when known.
    pub reference: Option<&'static str>,
}

const fn row(acceptor: &'static str, query: &'static str, reference: Option<&'static str>) -> BenchRow {
    BenchRow { acceptor, query, reference }
}

const SYNTHETIC: &[BenchRow] = &[
    row("ltl:F(a)", "F(a & X(b))", Some("F(a & X b)")),
    row("ltl:F(a)", "F(a U b)", Some("F(a) & F(b)")),
    row("ltl:F(a)", "F(b)", Some("F(a) & F(b)")),
    row("ltl:F(a)", "F(b U a)", Some("F(a)")),
    row("ltl:F(a)", "F(c)", Some("F(a) & F(c)")),
    row("ltl:F(a)", "F(!a)", Some("F(a) & (a U !a)")),
    row("ltl:F(a)", "F(!b)", Some("F(a)")),
    row("ltl:F(a)", "G(a)", Some("G(a) & F(a)")),
    row("ltl:F(a)", "G(c)", Some("false")),
    row("ltl:F(a)", "false", Some("false")),
    row("ltl:F(a)", "true", Some("F(a)")),
    row("ltl:F(a & X(b))", "F(a)", Some("F(a & X b)")),
    row("ltl:F(a & X(b))", "F(a U b)", Some("F(a & X b)")),
    row("ltl:F(a & X(b))", "F(b)", Some("F(a & X b)")),
    row("ltl:F(a & X(b))", "F(c)", Some("F(c) & F(a & X b)")),
    row("ltl:F(a & X(b))", "G(a)", Some("false")),
    row("ltl:F(a & X(b))", "false", Some("false")),
    row("ltl:F(a & X(b))", "true", Some("F(a & X b)")),
    row("ltl:G(a -> X(b))", "F(a)", Some("G(a -> X b) & F(a)")),
    row("ltl:G(a -> X(b))", "G(a)", Some("false")),
    row("ltl:G(a -> X(b))", "G(b)", Some("G(b)")),
    row("ltl:G(a -> X(b))", "X(b)", Some("X(b) & G(a -> X b)")),
    row("ltl:G(a -> X(b))", "b", Some("b & G(a -> X b)")),
    row("ltl:G(a -> X(b))", "false", Some("false")),
    row("ltl:G(a -> X(b))", "true", Some("G(a -> X b)")),
];

const PARENS: &[BenchRow] = &[
    row("counter:balanced-parens", "F(l & X(G(!r)))", Some("false")),
    row("counter:balanced-parens", "F(l) & F(r) & F((l | a) U r)", None),
    row("counter:balanced-parens", "F(l) & F(r) & !F((l | a) U r)", Some("false")),
    row("counter:balanced-parens", "G(a)", Some("G(a)")),
    row("counter:balanced-parens", "G(l -> F(r))", None),
    row("counter:balanced-parens", "G(l -> !F(a | r))", Some("G(!(l | r))")),
    row("counter:balanced-parens", "G(l)", Some("false")),
    row("counter:balanced-parens", "a U r", Some("false")),
    row("counter:balanced-parens", "false", Some("false")),
    row("counter:balanced-parens", "r", Some("false")),
    row("counter:balanced-parens", "true", None),
    row("counter:balanced-parens", "!F(l | r)", Some("G(!(l | r))")),
];

const EMAIL: &[BenchRow] = &[
    row("builtin:email", "m", Some("false")),
    row("builtin:email", "!F(m) & F(p U @) & F(@ & X(p U ∘)) & F(∘ & X(G(p)))", None),
    row("builtin:email", "F((p | m) U @) & F(@ & X((p | m) U ∘)) & F(∘ & X(G(p)))", None),
    row("builtin:email", "F(@ & X(F(@)))", Some("false")),
    row("builtin:email", "F(@ & X(G(!∘)))", Some("false")),
    row("builtin:email", "F(@ & X(∘))", Some("false")),
    row("builtin:email", "F(∘ & X(F(∘)))", Some("false")),
    row("builtin:email", "F(∘ & X(F(m)))", Some("false")),
    row("builtin:email", "F(∘ & X(G(p)))", None),
    row("builtin:email", "G(m)", Some("false")),
    row("builtin:email", "@", Some("false")),
    row("builtin:email", "∘", Some("false")),
    row("builtin:email", "false", Some("false")),
    row("builtin:email", "true", None),
    row("builtin:email", "!F(@)", Some("false")),
    row("builtin:email", "!F(∘)", Some("false")),
    row("builtin:email", "!F(m)", None),
    row("builtin:email", "!F(p)", Some("false")),
    row("builtin:email", "!p", Some("false")),
];

const ALTBIT: &[BenchRow] = &[
    row("builtin:alternating-bit", "F(msg0 U ack0) & F(ack0 U msg1) & F(msg1 U ack1)", None),
    row("builtin:alternating-bit", "G((msg0 -> F(ack0)) & (ack0 -> F(msg1)) & (msg1 -> F(ack1)))", None),
    row("builtin:alternating-bit", "G(ack1)", Some("G(ack1)")),
    row("builtin:alternating-bit", "false", Some("false")),
    row("builtin:alternating-bit", "true", None),
    row("builtin:alternating-bit", "!(F(msg0 U ack0) & F(ack0 U msg1) & F(msg1 U ack1))", None),
    row("builtin:alternating-bit", "!F(msg0)", Some("G(ack1)")),
    row("builtin:alternating-bit", "!F(msg1)", None),
    row("builtin:alternating-bit", "!F(ack0)", None),
    row("builtin:alternating-bit", "!F(ack1)", None),
];

pub fn suite_rows(name: &str) -> Option<&'static [BenchRow]> {
    match name {
        "synthetic" => Some(SYNTHETIC),
        "parens" => Some(PARENS),
        "email" => Some(EMAIL),
        "altbit" => Some(ALTBIT),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub reps: usize,
    pub seed: u64,
    /// Template for every run; acceptor, query and seed are overwritten per row.
    pub base: ExplainConfig,
    /// Replaces each row's acceptor, e.g. to point at trained weights.
    pub acceptor_override: Option<String>,
    /// Also run L* on every repetition.
    pub with_dfa: bool,
    /// Only rows whose index is listed; all rows when empty.
    pub rows: Vec<usize>,
    /// Words up to this length decide `matches_reference`.
    pub reference_depth: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            reps: 1,
            seed: 0,
            base: ExplainConfig::default(),
            acceptor_override: None,
            with_dfa: false,
            rows: Vec::new(),
            reference_depth: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RepResult {
    pub seed: u64,
    pub outcome: String,
    pub formula: Option<String>,
    pub size: Option<usize>,
    pub accuracy: Option<f64>,
    pub secs: f64,
    pub iterations: usize,
    pub matches_reference: Option<bool>,
    pub dfa_states: Option<usize>,
    pub dfa_accuracy: Option<f64>,
    pub dfa_secs: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowResult {
    pub index: usize,
    pub acceptor: String,
    pub query: String,
    pub reference: Option<String>,
    pub reps: Vec<RepResult>,
    pub mean_size: Option<f64>,
    pub mean_accuracy: Option<f64>,
    pub mean_secs: f64,
    pub pac_rate: f64,
    pub mean_dfa_states: Option<f64>,
    pub mean_dfa_accuracy: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Seed for repetition `rep` of row `row`, derived from the master seed.
pub fn row_seed(master: u64, row: usize, rep: usize) -> u64 {
    crate::sampling::stream_rng(master, 16 + row as u64).gen::<u64>().wrapping_add(rep as u64)
}

fn run_rep(opts: &BenchOptions, row: &BenchRow, acceptor: &str, seed: u64) -> RepResult {
    let cfg = ExplainConfig {
        acceptor: acceptor.to_string(),
        query: row.query.to_string(),
        seed,
        ..opts.base.clone()
    };
    let failed = |e: String| RepResult {
        seed,
        outcome: "Failed".into(),
        formula: None,
        size: None,
        accuracy: None,
        secs: 0.0,
        iterations: 0,
        matches_reference: None,
        dfa_states: None,
        dfa_accuracy: None,
        dfa_secs: None,
        error: Some(e),
    };
    let prepared = match Prepared::new(&cfg) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let hooks = RunHooks::default();
    let (outcome, accuracy, secs, iterations, dfa): (Outcome, Option<f64>, f64, usize, Option<(Option<usize>, Option<f64>, f64)>) =
        if opts.with_dfa {
            let r = compare_prepared(&cfg, &prepared, &hooks);
            let dfa = Some((r.dfa.states, r.dfa.accuracy, r.dfa.secs));
            (r.ltl.outcome, r.ltl.accuracy, r.ltl.secs, r.ltl.iterations, dfa)
        } else {
            let r = explain_prepared(&cfg, &prepared, &hooks);
            (r.outcome, r.accuracy, r.timings.total_secs, r.iterations.len(), None)
        };
    let alphabet = prepared.alphabet();
    let matches_reference = match (row.reference, outcome.formula()) {
        (Some(reference), Some(found)) => {
            let reference = parse_ltl(reference, alphabet).ok();
            let found = parse_ltl(found, alphabet).ok();
            reference.zip(found).map(|(r, f)| {
                alphabet.words_up_to(opts.reference_depth).all(|w| satisfies(&r, &w) == satisfies(&f, &w))
            })
        }
        _ => None,
    };
    let error = match &outcome {
        Outcome::Failed { error } => Some(error.clone()),
        _ => None,
    };
    RepResult {
        seed,
        outcome: outcome.kind().into(),
        formula: outcome.formula().map(str::to_string),
        size: outcome.size(),
        accuracy,
        secs,
        iterations,
        matches_reference,
        dfa_states: dfa.and_then(|d| d.0),
        dfa_accuracy: dfa.and_then(|d| d.1),
        dfa_secs: dfa.map(|d| d.2),
        error,
    }
}

/// Runs a suite. Rows that fail are recorded and the run continues.
pub fn run_suite(name: &str, opts: &BenchOptions) -> Option<Vec<RowResult>> {
    let rows = suite_rows(name)?;
    let mut results = Vec::new();
    for (index, row) in rows.iter().enumerate() {
        if !opts.rows.is_empty() && !opts.rows.contains(&index) {
            continue;
        }
        let acceptor = opts.acceptor_override.as_deref().unwrap_or(row.acceptor);
        let reps: Vec<RepResult> =
            (0..opts.reps).map(|rep| run_rep(opts, row, acceptor, row_seed(opts.seed, index, rep))).collect();
        let n = reps.len().max(1) as f64;
        results.push(RowResult {
            index,
            acceptor: acceptor.to_string(),
            query: row.query.to_string(),
            reference: row.reference.map(str::to_string),
            mean_size: mean(reps.iter().filter_map(|r| r.size.map(|s| s as f64))),
            mean_accuracy: mean(reps.iter().filter_map(|r| r.accuracy)),
            mean_secs: reps.iter().map(|r| r.secs).sum::<f64>() / n,
            pac_rate: reps.iter().filter(|r| r.outcome == "PacPass").count() as f64 / n,
            mean_dfa_states: mean(reps.iter().filter_map(|r| r.dfa_states.map(|s| s as f64))),
            mean_dfa_accuracy: mean(reps.iter().filter_map(|r| r.dfa_accuracy)),
            reps,
        });
    }
    Some(results)
}

#[derive(Serialize)]
struct CsvLine<'a> {
    row: usize,
    rep: usize,
    seed: u64,
    acceptor: &'a str,
    query: &'a str,
    outcome: &'a str,
    formula: &'a str,
    size: Option<usize>,
    accuracy: Option<f64>,
    secs: f64,
    iterations: usize,
    matches_reference: Option<bool>,
    dfa_states: Option<usize>,
    dfa_accuracy: Option<f64>,
    dfa_secs: Option<f64>,
    error: &'a str,
}

/// Writes `results.csv` (one line per repetition) and `results.json` (per row, with means).
pub fn write_results(dir: &Path, suite: &str, rows: &[RowResult]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = csv::Writer::from_path(dir.join("results.csv"))?;
    for r in rows {
        for (rep, x) in r.reps.iter().enumerate() {
            csv.serialize(CsvLine {
                row: r.index,
                rep,
                seed: x.seed,
                acceptor: &r.acceptor,
                query: &r.query,
                outcome: &x.outcome,
                formula: x.formula.as_deref().unwrap_or(""),
                size: x.size,
                accuracy: x.accuracy,
                secs: x.secs,
                iterations: x.iterations,
                matches_reference: x.matches_reference,
                dfa_states: x.dfa_states,
                dfa_accuracy: x.dfa_accuracy,
                dfa_secs: x.dfa_secs,
                error: x.error.as_deref().unwrap_or(""),
            })?;
        }
    }
    csv.flush()?;
    let json = serde_json::json!({ "suite": suite, "rows": rows });
    std::fs::write(dir.join("results.json"), serde_json::to_string_pretty(&json).expect("results serialize"))
}
