use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsdc_cli::{
    run_experiment, worked_example, write_outputs, CliError, ExperimentSpec, RunOptions,
};
use qsdc_core::codes::BoundReport;

#[derive(Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Three-stage QSDC simulator with Steane-coded blocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed from the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; the report goes to stdout when neither this
        /// nor `output` in the file is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave oracle-only fields out of transcripts.
        #[arg(long)]
        no_oracle: bool,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print rate and Gilbert-Varshamov bounds for a CSS pair as JSON.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
    },
    /// Print the five-bit worked example and check it.
    Example {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            no_oracle,
            jobs,
        } => {
            let spec = ExperimentSpec::load(&config)?;
            let opts = RunOptions {
                seed,
                no_oracle,
                jobs,
            };
            let report = run_experiment(&spec, &opts)?;
            for g in &report.groups {
                eprintln!(
                    "{}: {} sessions, abort rate {:.4}, key agreement {:.4}",
                    g.label, g.summary.sessions, g.summary.abort_rate, g.summary.key_agreement_rate
                );
            }
            match out.or(spec.output) {
                Some(dir) => {
                    for path in write_outputs(&report, &dir)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => emit(&report.to_json()?)?,
            }
            if let Some(example) = &report.example {
                example.check()?;
            }
            Ok(())
        }
        Command::Bounds { n, d1, d2 } => {
            emit(&to_json(&BoundReport::compute(n, d1, d2)?)?)?;
            Ok(())
        }
        Command::Example { seed } => {
            let defaults = qsdc_core::SessionConfig::default();
            let trace = worked_example(defaults.theta, defaults.phi, seed)?;
            emit(&to_json(&trace)?)?;
            trace.check()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
