use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use topowave_cli::config::{CoeffFamily, ExperimentConfig};
use topowave_cli::{coeffs_table, execute, CliError, OUTPUT_ROOT_ENV};

/// Runs topography-aware shallow-water model studies.
///
/// Exit codes: 0 all checks passed, 1 a tolerance check failed, 2 usage or
/// configuration error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "topowave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a TOML config.
    Run {
        config: PathBuf,
        /// Directory against which `output_dir` is resolved.
        #[arg(long, env = OUTPUT_ROOT_ENV)]
        output_root: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Print the coefficient table of one family member.
    Coeffs {
        #[arg(long, value_enum)]
        family: Family,
        /// Free parameter as a rational, e.g. -1/12.
        #[arg(long, allow_hyphen_values = true)]
        value: String,
        /// Sampled wave speeds for the variable-depth coefficients.
        #[arg(long = "c", value_delimiter = ',', default_value = "1")]
        c: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    P,
    Q,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run { config, output_root } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = execute(&cfg, output_root.as_deref())?;
            for c in &outcome.summary.checks {
                println!(
                    "{} {}: {:.6e} in [{:e}, {:e}]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.lo,
                    c.hi
                );
            }
            for n in &outcome.summary.notes {
                println!("note {n}");
            }
            println!("output {}", outcome.dir.display());
            Ok(if outcome.summary.passed { 0 } else { 1 })
        }
        Command::Validate { config } => {
            ExperimentConfig::load(&config)?.validate()?;
            println!("{} is valid", config.display());
            Ok(0)
        }
        Command::Coeffs { family, value, c } => {
            let family = match family {
                Family::P => CoeffFamily::P,
                Family::Q => CoeffFamily::Q,
            };
            print!("{}", coeffs_table(family, &value, &c)?);
            Ok(0)
        }
    }
}
