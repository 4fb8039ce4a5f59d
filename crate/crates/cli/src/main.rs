//! `synkc`: compile QDIMACS specifications to SynNNF, check forms, verify
//! refinements and extract Skolem functions.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{RunReport, Verdict};

#[derive(Parser)]
#[command(
    name = "synkc",
    version,
    about = "Knowledge compiler for Boolean functional synthesis"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Debug)]
pub struct GlobalOpts {
    /// How variables missing from the quantifier prefix are treated.
    #[arg(long, global = true, value_enum, default_value_t = FreeVars::Universal)]
    pub free_vars: FreeVars,
    /// Write every SAT query as a DIMACS file into this directory.
    #[arg(long, global = true, env = "SYNKC_SOLVER_DUMP")]
    pub dump_cnf: Option<PathBuf>,
    /// Wall-clock limit for solver work, in seconds.
    #[arg(long, global = true, default_value_t = 3600)]
    pub timeout: u64,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FreeVars {
    Universal,
    Reject,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a QDIMACS specification into a SynNNF refinement.
    Compile(commands::CompileArgs),
    /// Decide membership of an .nnf file in a target form.
    Check(commands::CheckArgs),
    /// Compile and extract Skolem functions, checked against the input.
    Synthesize(commands::SynthesizeArgs),
    /// Check that a compiled formula is syntactically SynNNF and refines a
    /// specification.
    Verify(commands::PairArgs),
    /// Check only the refinement conditions between two formulas.
    RefineCheck(commands::PairArgs),
    /// Generate benchmark instances.
    Gen(commands::GenArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Compile(_) => "compile",
            Command::Check(_) => "check",
            Command::Synthesize(_) => "synthesize",
            Command::Verify(_) => "verify",
            Command::RefineCheck(_) => "refine-check",
            Command::Gen(_) => "gen",
        }
    }
}

fn emit(report: &RunReport, dest: Option<&PathBuf>) {
    let text = report.to_json();
    match dest {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text + "\n") {
                eprintln!("synkc: cannot write report to {}: {e}", p.display());
            }
        }
        None => println!("{text}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let mut rep = RunReport::new("usage");
            rep.error = Some(e.kind().to_string());
            rep.finish(Verdict::Error);
            emit(&rep, None);
            return ExitCode::from(Verdict::Error.exit_code());
        }
    };
    let mut rep = RunReport::new(cli.cmd.name());
    let mut ctx = commands::Ctx::new(&cli.global, &mut rep);
    let verdict = match &cli.cmd {
        Command::Compile(a) => commands::compile(&mut ctx, a),
        Command::Check(a) => commands::check(&mut ctx, a),
        Command::Synthesize(a) => commands::synthesize(&mut ctx, a),
        Command::Verify(a) => commands::verify(&mut ctx, a),
        Command::RefineCheck(a) => commands::refine_check(&mut ctx, a),
        Command::Gen(a) => commands::gen(&mut ctx, a),
    };
    let verdict = ctx.conclude(verdict);
    emit(&rep, cli.global.report.as_ref());
    ExitCode::from(verdict.exit_code())
}
