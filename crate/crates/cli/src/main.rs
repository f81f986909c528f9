use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subradiance::couplings::couplings_from_field;
use subradiance::dynamics::Engine;
use subradiance::experiment::{
    run_entanglement, run_evolve, run_predict, run_random_study, run_scan, run_spectrum, ExperimentConfig,
    Table,
};
use subradiance::io::{couplings_to_json, density_matrix_to_json, load_couplings, load_field_samples};
use subradiance::oracles::validation_suite;
use subradiance::{Error, Result};

const VALIDATION_FAILURE: u8 = 4;

/// Collective dissipative dynamics of two-level emitters in the
/// single-excitation sector.
#[derive(Debug, Parser)]
#[command(name = "subradiance", version)]
struct Cli {
    /// Experiment configuration (JSON); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for random sampling; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Propagation engine; overrides the config.
    #[arg(long, global = true, value_name = "expm|ode|reduced")]
    engine: Option<Engine>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate and write observables per time point.
    Evolve,
    /// Predicted density matrix at the final grid time.
    Predict,
    /// Entanglement measures along the trajectory.
    Entanglement,
    /// Eigenvalues of the generator.
    Spectrum,
    /// Fidelity against the quasi prediction over the configured alphas.
    Scan,
    /// Final-state statistics of random single-excitation states.
    RandomStudy,
    /// Convert field samples to couplings, or check a couplings file.
    Ingest(IngestArgs),
    /// Run the oracle suite.
    Validate,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct IngestArgs {
    /// Field-sample JSON to convert using the configured omega0.
    #[arg(long, value_name = "PATH")]
    field: Option<PathBuf>,
    /// Couplings JSON to check and re-emit.
    #[arg(long, value_name = "PATH")]
    couplings: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(engine) = cli.engine {
        cfg.engine = engine;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn emit_table(cli: &Cli, table: Result<Table>) -> Result<ExitCode> {
    let table = table?;
    warn(&table.warnings);
    emit(cli.out.as_deref(), &table.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Evolve => emit_table(&cli, run_evolve(&config(&cli)?)),
        Command::Entanglement => emit_table(&cli, run_entanglement(&config(&cli)?)),
        Command::Spectrum => emit_table(&cli, run_spectrum(&config(&cli)?)),
        Command::Scan => emit_table(&cli, run_scan(&config(&cli)?)),
        Command::RandomStudy => emit_table(&cli, run_random_study(&config(&cli)?)),
        Command::Predict => {
            let report = run_predict(&config(&cli)?)?;
            warn(&report.warnings);
            let mut json = density_matrix_to_json(&report.state);
            json.push('\n');
            emit(cli.out.as_deref(), &json)?;
            println!("{}", report.summary());
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest(args) => {
            let c = match (&args.field, &args.couplings) {
                (Some(path), _) => couplings_from_field(&load_field_samples(path)?, config(&cli)?.omega0)?,
                (None, Some(path)) => load_couplings(path)?,
                (None, None) => {
                    return Err(Error::InvalidArgument("ingest needs --field or --couplings".into()))
                }
            };
            let mut json = couplings_to_json(&c);
            json.push('\n');
            emit(cli.out.as_deref(), &json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate => {
            let checks = validation_suite()?;
            let text: String = checks.iter().map(|c| c.line() + "\n").collect();
            emit(cli.out.as_deref(), &text)?;
            if checks.iter().all(|c| c.pass) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(VALIDATION_FAILURE))
            }
        }
    }
}
