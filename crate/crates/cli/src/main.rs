use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use revm_core::automata::{Automaton, RunOutcome, DEFAULT_FUEL};
use revm_core::algebra::{oracle_compare, Verdict};
use revm_core::compiler::{compile_with_report, CompileError, Mode, Program, ProgramError};
use revm_core::readout::{read_bool, read_numeral, BoolReadout, NumeralReadout};
use revm_core::terms::{ground_terms, Term};

/// Exit statuses.
mod status {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const OPEN_TERM: u8 = 3;
    pub const STUCK: u8 = 4;
    pub const OUT_OF_FUEL: u8 = 5;
    pub const NONTERMINATING: u8 = 6;
    pub const MALFORMED: u8 = 7;
    pub const EXCEEDS_BOUND: u8 = 8;
    pub const IO: u8 = 9;
}

#[derive(Parser)]
#[command(name = "revm", version, about = "Compile combinator programs to reversible automata and run them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a program into an automaton file
    Compile {
        program: PathBuf,
        /// Output file [default: the program path with extension `.aut`]
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Read programs using only K I B C W as standard terms
        #[arg(long)]
        standard: bool,
    },
    /// Run an automaton on a ground term
    Run {
        automaton: PathBuf,
        term: String,
        /// Run the dual automaton, computing backwards
        #[arg(long)]
        reverse: bool,
        #[arg(long, env = "REVM_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write the computation to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check well-formedness and biorthogonality of an automaton file
    Check { automaton: PathBuf },
    /// Compile a program and read its value as a boolean or a numeral
    Readout {
        program: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, env = "REVM_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Give up after this many successor answers
        #[arg(long, default_value_t = 1000)]
        max_n: usize,
        #[arg(long)]
        standard: bool,
    },
    /// Compare linear application and replication of two programs with their relational semantics
    Oracle {
        program_a: PathBuf,
        program_b: PathBuf,
        /// Probe all ground terms up to this depth
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, env = "REVM_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write one line per sample to this file
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        standard: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bool,
    Nat,
}

struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn new(status: u8, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(status::IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(status::IO, format!("{}: {e}", path.display())))
}

fn load_program(path: &Path, standard: bool) -> Result<Program, Failure> {
    let text = read(path)?;
    let mode = if standard { Mode::Standard } else { Mode::Linear };
    Program::parse(&text, mode).map_err(|e| {
        let (status, sep) = match e {
            ProgramError::Compile(CompileError::OpenTerm(_)) => (status::OPEN_TERM, " "),
            ProgramError::Parse { .. } => (status::PARSE, ""),
            _ => (status::PARSE, " "),
        };
        Failure::new(status, format!("{}:{sep}{e}", path.display()))
    })
}

fn compile_program(path: &Path, standard: bool) -> Result<Automaton, Failure> {
    Ok(compile_with_report(&load_program(path, standard)?.to_linear()).automaton)
}

fn load_automaton(path: &Path) -> Result<Automaton, Failure> {
    read(path)?
        .parse()
        .map_err(|e| Failure::new(status::PARSE, format!("{}: {e}", path.display())))
}

fn cmd_compile(program: &Path, output: Option<PathBuf>, standard: bool) -> Outcome {
    let compiled = compile_with_report(&load_program(program, standard)?.to_linear());
    let output = output.unwrap_or_else(|| program.with_extension("aut"));
    write(&output, &compiled.automaton.to_string())?;
    println!("{}", compiled.report);
    Ok(status::OK)
}

fn cmd_run(automaton: &Path, term: &str, reverse: bool, fuel: u64, trace: Option<PathBuf>) -> Outcome {
    let a = load_automaton(automaton)?;
    let input: Term = term
        .parse()
        .map_err(|e| Failure::new(status::PARSE, format!("term: {e}")))?;
    if !input.is_ground() {
        return Err(Failure::new(status::PARSE, "term: input must be ground"));
    }
    let runner = if reverse { revm_core::dual(&a) } else { a };
    let outcome = runner
        .run(&input, fuel)
        .map_err(|e| Failure::new(status::CHECK_FAILED, format!("not orthogonal: {e}")))?;
    if let Some(path) = trace {
        write(&path, &outcome.trace().emit(&runner))?;
    }
    match outcome {
        RunOutcome::Success { output, .. } => {
            println!("{output}");
            Ok(status::OK)
        }
        RunOutcome::Stuck { at, .. } => Err(Failure::new(
            status::STUCK,
            format!("stuck in state {} at {}", runner.label(at.state), at.term),
        )),
        RunOutcome::OutOfFuel { .. } => Err(Failure::new(status::OUT_OF_FUEL, format!("out of fuel after {fuel} steps"))),
    }
}

fn cmd_check(automaton: &Path) -> Outcome {
    let a = load_automaton(automaton)?;
    let mut problems: Vec<String> = a.validate().iter().map(|v| v.to_string()).collect();
    let report = a.biorthogonality();
    for (i, j) in &report.forward.overlaps {
        problems.push(format!("rules {i} and {j}: overlapping left-hand sides"));
    }
    for i in &report.forward.nonlinear {
        problems.push(format!("rule {i}: left-hand side is not linear"));
    }
    for (i, j) in &report.backward.overlaps {
        problems.push(format!("rules {i} and {j}: overlapping right-hand sides"));
    }
    for i in &report.backward.nonlinear {
        problems.push(format!("rule {i}: right-hand side is not linear"));
    }
    if problems.is_empty() {
        println!(
            "biorthogonal: {} states, {} rules",
            a.state_count(),
            a.rule_count()
        );
        Ok(status::OK)
    } else {
        for p in &problems {
            println!("{p}");
        }
        Ok(status::CHECK_FAILED)
    }
}

fn cmd_readout(program: &Path, kind: Kind, fuel: u64, max_n: usize, standard: bool) -> Outcome {
    let a = compile_program(program, standard)?;
    match kind {
        Kind::Bool => match read_bool(&a, fuel) {
            BoolReadout::Value(b) => {
                println!("{b}");
                Ok(status::OK)
            }
            BoolReadout::Nonterminating(_) => Err(Failure::new(status::NONTERMINATING, "nonterminating")),
            BoolReadout::Malformed(m) => Err(Failure::new(status::MALFORMED, format!("malformed: {m}"))),
        },
        Kind::Nat => match read_numeral(&a, fuel, max_n) {
            NumeralReadout::Value(n) => {
                println!("{n}");
                Ok(status::OK)
            }
            NumeralReadout::Nonterminating { probes, .. } => Err(Failure::new(
                status::NONTERMINATING,
                format!("nonterminating at probe {probes}"),
            )),
            NumeralReadout::Malformed(m) => Err(Failure::new(status::MALFORMED, format!("malformed: {m}"))),
            NumeralReadout::ExceedsBound(n) => Err(Failure::new(status::EXCEEDS_BOUND, format!("more than {n}"))),
        },
    }
}

fn cmd_oracle(a: &Path, b: &Path, depth: usize, fuel: u64, report: Option<PathBuf>, standard: bool) -> Outcome {
    if depth > 4 {
        return Err(Failure::new(status::PARSE, "depth above 4 is not supported"));
    }
    let (fa, fb) = (compile_program(a, standard)?, compile_program(b, standard)?);
    let samples = ground_terms(depth);
    let result = oracle_compare(&fa, &fb, &samples, fuel);
    if let Some(path) = report {
        write(&path, &result.to_string())?;
    }
    for e in result.disagreements() {
        eprintln!("{}: {} gives {}, relational {}", e.construction, e.term, e.automaton, e.oracle);
    }
    let t = result.tally;
    println!("agree={} disagree={} inconclusive={}", t.agree, t.disagree, t.inconclusive);
    Ok(if result.entries.iter().any(|e| e.verdict == Verdict::Disagree) {
        status::CHECK_FAILED
    } else {
        status::OK
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compile {
            program,
            output,
            standard,
        } => cmd_compile(&program, output, standard),
        Command::Run {
            automaton,
            term,
            reverse,
            fuel,
            trace,
        } => cmd_run(&automaton, &term, reverse, fuel, trace),
        Command::Check { automaton } => cmd_check(&automaton),
        Command::Readout {
            program,
            kind,
            fuel,
            max_n,
            standard,
        } => cmd_readout(&program, kind, fuel, max_n, standard),
        Command::Oracle {
            program_a,
            program_b,
            depth,
            fuel,
            report,
            standard,
        } => cmd_oracle(&program_a, &program_b, depth, fuel, report, standard),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("revm: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}
