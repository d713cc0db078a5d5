use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iucorr_cli::config::{ExperimentConfig, MusicMapConfig};
use iucorr_cli::experiment::{music_for_location, run_experiment, spectrum_table};
use iucorr_cli::table::{emit_csv, Provenance, ResultTable};
use iucorr_cli::verify::{verify_suite, VerifyOptions};
use iucorr_cli::{CliError, CliResult, GenSyntheticConfig};
use iucorr_core::dataset::DatasetReader;
use iucorr_core::synthetic::write_synthetic_dataset;

#[derive(Parser)]
#[command(name = "iucorr", version, about = "Inter-user channel correlation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its CSV table.
    Run {
        config: PathBuf,
        /// Overrides the config's `output`; `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every acceptance check and print one line per check.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Imported measured dataset for the informative check.
        #[arg(long)]
        measured: Option<PathBuf>,
    },
    /// Open a dataset and check every blob against the manifest.
    DatasetValidate { path: PathBuf },
    /// MUSIC spectrum of one location, as CSV.
    Music {
        dataset: PathBuf,
        location: String,
        #[arg(long, default_value_t = 1.0)]
        step_deg: f64,
        /// Signal subspace size; picked from the eigenvalues when omitted.
        #[arg(long)]
        sources: Option<usize>,
        #[arg(long)]
        no_forward_backward: bool,
        /// Sub-array shrink per axis, `x,y`.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 1])]
        smoothing: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic clustered dataset.
    GenSynthetic {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn write_table(table: &ResultTable, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(p) if p.as_os_str() != "-" => emit_csv(table, p),
        _ => {
            let s = table.to_csv_string();
            std::io::stdout()
                .lock()
                .write_all(s.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, output, seed } => {
            let (mut cfg, text) = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = run_experiment(&cfg, &text)?;
            write_table(&table, output.as_ref().or(cfg.output.as_ref()))
        }
        Command::Verify { seed, measured } => {
            let report = verify_suite(&VerifyOptions {
                seed,
                measured,
                scratch: None,
            });
            for r in &report {
                println!("{}", r.line());
            }
            let failed = report.iter().filter(|r| r.is_failure()).count();
            if failed > 0 {
                Err(CliError::ChecksFailed(failed))
            } else {
                Ok(())
            }
        }
        Command::DatasetValidate { path } => {
            let reader = DatasetReader::open(&path)?;
            let n = reader.validate_all()?;
            let m = reader.manifest();
            println!(
                "ok: {n} locations, {} clusters, {} subcarriers, {}x{} array, {} bytes checked",
                m.clusters.len(),
                m.n_subcarriers,
                m.m_x,
                m.m_y,
                reader.bytes_read()
            );
            Ok(())
        }
        Command::Music {
            dataset,
            location,
            step_deg,
            sources,
            no_forward_backward,
            smoothing,
            frame,
            output,
        } => {
            let [sx, sy] = smoothing[..] else {
                return Err(CliError::invalid(format!(
                    "--smoothing takes two values, got {}",
                    smoothing.len()
                )));
            };
            let m = MusicMapConfig {
                location,
                step_deg,
                n_sources: sources,
                forward_backward: !no_forward_backward,
                smoothing: [sx, sy],
                frame,
            };
            if !(m.step_deg > 0.0 && m.step_deg <= 90.0) {
                return Err(CliError::invalid(format!("step {} outside (0, 90]", m.step_deg)));
            }
            let map = music_for_location(&dataset, &m)?;
            let desc = format!("{m:?}");
            let mut prov = Provenance::new(&desc, 0);
            prov.note("location", &m.location);
            write_table(&spectrum_table(&map, prov)?, output.as_ref())
        }
        Command::GenSynthetic { config, output } => {
            let cfg = GenSyntheticConfig::load(&config)?;
            let dir = output
                .or(cfg.output)
                .ok_or_else(|| CliError::invalid("no output directory (config `output` or --output)"))?;
            let m = write_synthetic_dataset(&cfg.dataset, &dir)?;
            println!("wrote {} locations to {}", m.locations.len(), dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iucorr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
