use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use linrank::prover::{prove, render_human, render_machine, OutputFormat, ProverConfig};
use linrank::solver::default_solver_cmd;
use linrank::template::{parse_pool, DEFAULT_POOL};

#[derive(Parser)]
#[command(name = "linrank", version, about = "Termination prover for linear loop programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for a ranking function of FILE.
    ///
    /// Exit status: 0 terminating, 1 unknown, 2 input error, 3 solver error.
    /// "Unknown" means no template in the pool fits; it never claims nontermination.
    Prove {
        file: PathBuf,
        /// Comma-separated template specifiers: pr, phase:K, piece:K, lex:K, phaselex:KxL, or ranges like phase:2..4
        #[arg(long, default_value = DEFAULT_POOL)]
        templates: String,
        /// Solver command; `{file}` is replaced by the query file, otherwise the query is piped to stdin.
        /// Defaults to $LINRANK_SOLVER or `z3 -smt2 {file}`.
        #[arg(long)]
        solver_cmd: Option<String>,
        #[arg(long, default_value_t = 60_000)]
        timeout_ms: u64,
        /// Half-width of the integer grid used to certify results; 0 disables certification.
        #[arg(long, default_value_t = 10)]
        grid_bound: u32,
        /// Write every solver query to DIR/<program>_<template>_<n>.smt2
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        /// Run all templates concurrently; the earliest successful pool entry wins.
        #[arg(long)]
        parallel: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Cmd::Prove { file, templates, solver_cmd, timeout_ms, grid_bound, emit_smt, format, parallel } =
        cli.command;
    let templates = match parse_pool(&templates) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if timeout_ms == 0 {
        eprintln!("error: --timeout-ms must be positive");
        return ExitCode::from(2);
    }
    let cfg = ProverConfig {
        templates,
        solver_cmd: solver_cmd.unwrap_or_else(default_solver_cmd),
        timeout_ms,
        grid_bound,
        emit_dir: emit_smt,
        format: match format {
            Format::Human => OutputFormat::Human,
            Format::Machine => OutputFormat::Machine,
        },
        parallel,
    };
    let outcome = prove(&file, &cfg);
    match cfg.format {
        OutputFormat::Human => print!("{}", render_human(&outcome)),
        OutputFormat::Machine => {
            println!("{}", serde_json::to_string_pretty(&render_machine(&outcome, cfg.grid_bound)).unwrap())
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}
