//! `symstat`: command-line front end for scenario files.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or the
//! computation cannot proceed, 2 for usage and parse errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symstat_core::pipeline::PipelineError;
use symstat_core::{parse_scenario, run_pipeline, Command, PipelineOptions, RepMode, ToleranceProfile};

#[derive(Parser)]
#[command(name = "symstat", version, about = "Symmetry-based construction of statistical and quantum models")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the assumptions behind the construction.
    Validate(Common),
    /// Build the representation and state spaces and report residuals.
    Build(Common),
    /// Transition probabilities between the eigenbases of two experiments.
    Born {
        #[command(flatten)]
        common: Common,
        /// Experiment of the prepared state.
        a: String,
        /// Experiment being measured.
        b: String,
    },
    /// Round trip between questions and states.
    States(Common),
    /// Simulate repeated experiments and update a posterior.
    Simulate(Common),
    /// Orbit closure, sign patterns and randomization strata.
    Reduce(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    file: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of trials.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    experiment: Option<String>,
    /// Base experiment; defaults to the scenario's own choice.
    #[arg(long)]
    base: Option<String>,
    /// Directory for CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    tolerance_profile: ToleranceProfile,
    /// Trials per apparatus lifetime.
    #[arg(long)]
    lifetime: Option<usize>,
    /// Fix the hypothesis instead of drawing it.
    #[arg(long)]
    hypothesis: Option<String>,
    /// Coefficient count for the sign-pattern census.
    #[arg(long)]
    zero_pattern: Option<usize>,
    /// Representation source: auto, derived or explicit.
    #[arg(long, default_value = "auto")]
    rep: RepMode,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Validate(c) => (Command::Validate, c),
        Sub::Build(c) => (Command::Build, c),
        Sub::Born { common, a, b } => (Command::Born { a, b }, common),
        Sub::States(c) => (Command::States, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Reduce(c) => (Command::Reduce, c),
    };
    match run(&command, &common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err((code, message)) => {
            for line in message.lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(code)
        }
    }
}

fn run(command: &Command, common: &Common) -> Result<bool, (u8, String)> {
    let text = std::fs::read_to_string(&common.file)
        .map_err(|e| (2, format!("cannot read {}: {e}", common.file.display())))?;
    let spec = parse_scenario(&text).map_err(|e| {
        let lines: Vec<String> = e
            .diagnostics()
            .iter()
            .map(|d| match d.line {
                Some(l) => format!("{}:{l}: {}", common.file.display(), d.message),
                None => format!("{}: {}", common.file.display(), d.message),
            })
            .collect();
        (2, lines.join("\n"))
    })?;
    let options = PipelineOptions {
        seed: common.seed,
        n: common.n,
        experiment: common.experiment.clone(),
        base: common.base.clone(),
        profile: common.tolerance_profile,
        lifetime: common.lifetime,
        hypothesis: common.hypothesis.clone(),
        zero_pattern: common.zero_pattern,
        mode: common.rep,
    };
    let outcome = run_pipeline(command, &spec, &options).map_err(|e| match e {
        PipelineError::Usage(m) => (2, m),
        other => (1, other.to_string()),
    })?;
    print!("{}", outcome.report);
    if let Some(dir) = &common.out {
        write_files(dir, &outcome.files).map_err(|e| (1, e))?;
    }
    Ok(outcome.passed)
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}
