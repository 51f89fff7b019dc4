//! `rigidlab`: reproducible desk-scale experiments with structured reports.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rigidlab::Caps;
use serde::Serialize;
use serde_json::Value;

use report::{Envelope, Output, Record};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rigidlab::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(rigidlab::Error::CapExceeded { .. }) => 3,
            CliError::Core(rigidlab::Error::Invariant(_)) => 4,
            CliError::Core(rigidlab::Error::Io(_)) | CliError::Io(_) => 1,
            CliError::Csv(_) | CliError::Json(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rigidlab",
    version,
    about = "Exact rigidity and data-structure experiments over F_2"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct GlobalArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Most subspaces a rigidity scan may visit.
    #[arg(long, global = true)]
    cap_subspaces: Option<u128>,
    /// Largest n for which all 2^n inputs may be enumerated.
    #[arg(long, global = true)]
    cap_input_space: Option<usize>,
    /// Largest subspace dimension whose cosets may be walked.
    #[arg(long, global = true)]
    cap_coset_dim: Option<usize>,
    /// Largest root² for which all matrices may be enumerated.
    #[arg(long, global = true)]
    cap_matrix_entries: Option<usize>,
    /// Write elapsed_ms as 0 so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

impl GlobalArgs {
    fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps {
            subspaces: self.cap_subspaces.unwrap_or(d.subspaces),
            coset_dim: self.cap_coset_dim.unwrap_or(d.coset_dim),
            input_bits: self.cap_input_space.unwrap_or(d.input_bits),
            matrix_entries: self.cap_matrix_entries.unwrap_or(d.matrix_entries),
            tuples: d.tuples,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact RIG(Q, r) with a witness subspace.
    Rigidity(commands::RigidityArgs),
    /// RIG(Q, r) against brute-force optimal probe count, plus the built plan.
    EquivalenceCheck(commands::EquivalenceArgs),
    /// Folds S ⊆ F_2^n to length 2r and compares rigidities.
    Fold(commands::FoldArgs),
    /// Rank-one matrix far from a subspace V ⊆ F_2^{root×root}.
    FarRankOne(commands::FarRankOneArgs),
    /// Exact average-distance rigidity.
    StrongRigidity(commands::RigidityArgs),
    /// Writes a built-in query set in the text format.
    GenQueryset(commands::GenArgs),
    /// Cell sampling and the one-way protocol on a toy machine.
    ProtocolSim(commands::ProtocolArgs),
    /// Rank moments, low-rank counts and rectangle discrepancies.
    Discrepancy(commands::DiscrepancyArgs),
    /// Exhaustive finite identities on rank-one queries and bias.
    IdentityChecks(commands::IdentityArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rigidity(_) => "rigidity",
            Command::EquivalenceCheck(_) => "equivalence-check",
            Command::Fold(_) => "fold",
            Command::FarRankOne(_) => "far-rank-one",
            Command::StrongRigidity(_) => "strong-rigidity",
            Command::GenQueryset(_) => "gen-queryset",
            Command::ProtocolSim(_) => "protocol-sim",
            Command::Discrepancy(_) => "discrepancy",
            Command::IdentityChecks(_) => "identity-checks",
        }
    }

    fn flags(&self) -> Result<Value, CliError> {
        Ok(match self {
            Command::Rigidity(a) | Command::StrongRigidity(a) => serde_json::to_value(a)?,
            Command::EquivalenceCheck(a) => serde_json::to_value(a)?,
            Command::Fold(a) => serde_json::to_value(a)?,
            Command::FarRankOne(a) => serde_json::to_value(a)?,
            Command::GenQueryset(a) => serde_json::to_value(a)?,
            Command::ProtocolSim(a) => serde_json::to_value(a)?,
            Command::Discrepancy(a) => serde_json::to_value(a)?,
            Command::IdentityChecks(a) => serde_json::to_value(a)?,
        })
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let g = &cli.global;
    let caps = g.caps();
    let start = Instant::now();

    if let Command::GenQueryset(args) = &cli.command {
        if g.out.is_none() {
            print!("{}", commands::gen_queryset_text(args, &caps)?);
            return Ok(Vec::new());
        }
    }

    let out: Output = match &cli.command {
        Command::Rigidity(a) => commands::rigidity(a, &caps)?,
        Command::EquivalenceCheck(a) => commands::equivalence_check(a, &caps)?,
        Command::Fold(a) => commands::fold(a, &caps)?,
        Command::FarRankOne(a) => commands::far_rank_one(a, g.seed, &caps)?,
        Command::StrongRigidity(a) => commands::strong_rigidity(a, &caps)?,
        Command::GenQueryset(a) => commands::gen_queryset(a, g.out.as_deref().expect("checked above"), &caps)?,
        Command::ProtocolSim(a) => commands::protocol_sim(a, g.seed, &caps)?,
        Command::Discrepancy(a) => commands::discrepancy(a, g.seed, &caps)?,
        Command::IdentityChecks(a) => commands::identity_checks(a, &caps)?,
    };

    let mut flags = Record::new();
    if let Value::Object(m) = serde_json::to_value(g)? {
        flags.extend(m);
    }
    if let Value::Object(m) = cli.command.flags()? {
        flags.extend(m);
    }
    let env = Envelope {
        command: cli.command.name().to_string(),
        flags,
        seed: g.seed,
        elapsed_ms: if g.no_timing {
            0
        } else {
            start.elapsed().as_millis() as u64
        },
    };
    let text = match g.format {
        Format::Json => env.to_json(&out)?,
        Format::Csv => env.to_csv(&out)?,
    };
    match (&cli.command, &g.out) {
        // the query set itself went to --out
        (Command::GenQueryset(_), _) | (_, None) => print!("{text}"),
        (_, Some(path)) => std::fs::write(path, text)?,
    }
    Ok(out.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(violations) if violations.is_empty() => ExitCode::SUCCESS,
        Ok(violations) => {
            for v in violations {
                eprintln!("invariant violated: {v}");
            }
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(rigidlab::Error::CapExceeded { what, .. }) = &e {
                if *what != "tuples" {
                    eprintln!("raise it with --cap-{}", what.replace('_', "-"));
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
