use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eoq_cli::{run, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "eoq", version, about = "Exchange-only qubit array simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List triple-dot devices and qubit assignments.
    Enumerate(Common),
    /// Pack disjoint qubits onto the (possibly defective) array.
    Place(Common),
    /// Singlet-return maps over barrier and detuning voltages.
    Fingerprint(Common),
    /// Exchange oscillation quality factor per axis.
    Nosc(Common),
    /// Randomized benchmarking of one qubit.
    Rb(Common),
    /// Swap route from the SPAM pair to a qubit or axis.
    Route(Common),
    /// Built-in RB self-test against an injected depolarizing channel.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Enumerate(c) => (Experiment::Enumerate, c),
        Command::Place(c) => (Experiment::Place, c),
        Command::Fingerprint(c) => (Experiment::Fingerprint, c),
        Command::Nosc(c) => (Experiment::Nosc, c),
        Command::Rb(c) => (Experiment::Rb, c),
        Command::Route(c) => (Experiment::Route, c),
        Command::Validate(c) => (Experiment::Validate, c),
    };
    match execute(experiment, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eoq {}: {e}", experiment.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(experiment: Experiment, common: Common) -> Result<(), CliError> {
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = common.out {
        cfg.output_dir = out;
    }
    let summary = run(experiment, &cfg, &cfg.output_dir.clone())?;
    // A closed stdout (e.g. piped into `head`) is not an error; the files are written.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", summary.message);
    for f in &summary.files {
        let _ = writeln!(out, "wrote {}", f.display());
    }
    Ok(())
}
