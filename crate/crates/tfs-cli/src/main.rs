//! Command-line front end: grammar checking, chart parsing, chart
//! dumps, and derivation search.
//!
//! Exit codes: 0 accepted/derivable, 1 rejected, 2 step budget
//! exhausted, 3 unknown word, 4 any other error (bad grammar, cyclic
//! structure guard, I/O).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfs_core::grammar::{tokenize, Grammar};
use tfs_core::parser::{self, Config, Provenance, RunError, Verdict};
use tfs_core::{avm, oracle};

#[derive(Parser)]
#[command(name = "tfs", about = "Typed-feature-structure grammar tools", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParseOpts {
    /// Grammar file.
    grammar: String,
    /// Sentence (whitespace-separated words).
    sentence: String,
    /// Cap on fixpoint iterations.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Keep iterating after the first success witness.
    #[arg(long)]
    full_fixpoint: bool,
    /// Disable the cyclic-structure guard.
    #[arg(long)]
    no_guard_acyclic: bool,
    /// Warn when a chart cell holds more pairwise-incomparable items.
    #[arg(long, default_value_t = 8)]
    sentinel_threshold: usize,
}

impl ParseOpts {
    fn config(&self, filter: bool) -> Config {
        Config {
            filter,
            max_iterations: self.max_iterations,
            guard_acyclic: !self.no_guard_acyclic,
            sentinel_threshold: self.sentinel_threshold,
            full_fixpoint: self.full_fixpoint,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a grammar and report basic statistics and lints.
    Check {
        /// Grammar file.
        grammar: String,
        /// Echo the elaborated grammar back in surface syntax.
        #[arg(long)]
        render: bool,
    },
    /// Decide whether a sentence is in the grammar's language.
    Parse {
        #[command(flatten)]
        opts: ParseOpts,
        /// Disable the subsumption filter.
        #[arg(long)]
        no_filter: bool,
        /// Print the accepting structure.
        #[arg(long)]
        witness: bool,
        /// Print per-run statistics.
        #[arg(long)]
        verbose: bool,
    },
    /// Dump the full chart (runs to the fixpoint, filter off by default).
    Chart {
        #[command(flatten)]
        opts: ParseOpts,
        /// Enable the subsumption filter.
        #[arg(long)]
        filter: bool,
        /// Numbered plain-text items instead of JSON.
        #[arg(long)]
        golden: bool,
    },
    /// Search for a top-down derivation of the sentence.
    Derive {
        /// Grammar file.
        grammar: String,
        /// Sentence (whitespace-separated words).
        sentence: String,
        /// Step budget for the backtracking search.
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
    },
}

fn load(path: &str) -> Result<Grammar, ExitCode> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {path}: {e}");
        ExitCode::from(4)
    })?;
    Grammar::load(&src).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(4)
    })
}

fn verdict_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Accepted => ExitCode::SUCCESS,
        Verdict::Rejected => ExitCode::from(1),
        Verdict::BudgetExhausted => ExitCode::from(2),
    }
}

fn run_error_code(e: &RunError) -> ExitCode {
    match e {
        RunError::UnknownWord(_) => ExitCode::from(3),
        RunError::CyclicItem { .. } => ExitCode::from(4),
    }
}

fn provenance_json(p: &Provenance) -> serde_json::Value {
    use serde_json::json;
    let id = |r: usize| {
        if r == usize::MAX {
            serde_json::Value::Null
        } else {
            json!(r)
        }
    };
    match p {
        Provenance::Prediction => json!({ "kind": "prediction" }),
        Provenance::Scan { word, pos } => json!({ "kind": "scan", "word": word, "pos": pos }),
        Provenance::Epsilon { rule } => json!({ "kind": "epsilon", "rule": rule }),
        Provenance::DotMove { rule, act, comp } => {
            json!({ "kind": "dot-move", "rule": rule, "act": id(*act), "comp": id(*comp) })
        }
        Provenance::Complete { rule, act } => {
            json!({ "kind": "complete", "rule": rule, "act": id(*act) })
        }
    }
}

fn cmd_check(path: &str, render: bool) -> ExitCode {
    let g = match load(path) {
        Ok(g) => g,
        Err(code) => return code,
    };
    println!(
        "{} rules, {} lexical entries, signature OK",
        g.rules().len(),
        g.lexicon().len()
    );
    for lint in g.lints() {
        println!("warning: {lint}");
    }
    if render {
        print!("{}", g.render());
    }
    ExitCode::SUCCESS
}

fn cmd_parse(opts: &ParseOpts, no_filter: bool, witness: bool, verbose: bool) -> ExitCode {
    let g = match load(&opts.grammar) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let w = tokenize(&opts.sentence);
    let r = match parser::run(&g, &w, &opts.config(!no_filter)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return run_error_code(&e);
        }
    };
    for warning in &r.warnings {
        eprintln!("warning: {warning}");
    }
    println!("{}", r.verdict.as_str());
    if verbose {
        println!("iterations: {}", r.iterations);
        println!("items: {}", r.items.len());
    }
    if witness {
        if let Some(ix) = r.witness {
            println!("{}", avm::text(&r.items[ix].amrs, g.signature()));
        }
    }
    verdict_code(r.verdict)
}

fn cmd_chart(opts: &ParseOpts, filter: bool, golden: bool) -> ExitCode {
    let g = match load(&opts.grammar) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let mut cfg = opts.config(filter);
    cfg.full_fixpoint = true;
    let w = tokenize(&opts.sentence);
    let r = match parser::run(&g, &w, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return run_error_code(&e);
        }
    };
    for warning in &r.warnings {
        eprintln!("warning: {warning}");
    }
    if golden {
        for (id, item) in r.items.iter().enumerate() {
            println!(
                "{}. [{}, {}, {}, {}]",
                id + 1,
                item.i,
                avm::text(&item.amrs, g.signature()),
                item.j,
                item.status.as_str()
            );
        }
        println!("{}", r.verdict.as_str());
    } else {
        let items: Vec<serde_json::Value> = r
            .items
            .iter()
            .enumerate()
            .map(|(id, item)| {
                serde_json::json!({
                    "id": id,
                    "i": item.i,
                    "j": item.j,
                    "status": item.status.as_str(),
                    "iteration": item.iteration,
                    "avm": avm::to_json(&item.amrs, g.signature()),
                    "provenance": provenance_json(&item.provenance),
                })
            })
            .collect();
        let doc = serde_json::json!({
            "sentence": w,
            "iterations": r.iterations,
            "verdict": r.verdict.as_str(),
            "items": items,
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    }
    verdict_code(r.verdict)
}

fn cmd_derive(path: &str, sentence: &str, max_steps: usize) -> ExitCode {
    let g = match load(path) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let w = tokenize(sentence);
    match oracle::derive_tree(&g, &w, max_steps) {
        Ok(Some(d)) => {
            println!("{}-step derivation:", d.steps.len());
            println!("start: {}", avm::text(g.start().as_amrs(), g.signature()));
            for step in &d.steps {
                println!(
                    "{} at {}: {}",
                    step.rule,
                    step.index,
                    avm::text(&step.result, g.signature())
                );
            }
            ExitCode::SUCCESS
        }
        Ok(None) => {
            println!("none found");
            ExitCode::from(1)
        }
        Err(oracle::OracleError::UnknownWord(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(oracle::OracleError::BudgetExhausted) => {
            println!("budget-exhausted");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check { grammar, render } => cmd_check(grammar, *render),
        Command::Parse { opts, no_filter, witness, verbose } => {
            cmd_parse(opts, *no_filter, *witness, *verbose)
        }
        Command::Chart { opts, filter, golden } => cmd_chart(opts, *filter, *golden),
        Command::Derive { grammar, sentence, max_steps } => {
            cmd_derive(grammar, sentence, *max_steps)
        }
    }
}
