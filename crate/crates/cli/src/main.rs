use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use satfl::experiment::{
    compare_sweep, run_simulation, write_cells_csv, write_metrics_csv, write_summary_csv, write_windows_csv,
    RunConfig, Schedule, SweepArm, Workload,
};
use satfl::learn::gen_blobs;
use satfl::strategies::StrategyKind;
use satfl::{Data, Error};

#[derive(Parser)]
#[command(name = "satfl", version, about = "Asynchronous federated learning over a LEO constellation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Export contact windows as CSV.
    Windows(Common),
    /// Write the configured dataset as CSV (label,f0,f1,...).
    GenData {
        #[command(flatten)]
        common: Common,
        /// Write only the training split, only the test split, or everything.
        #[arg(long, default_value = "all", value_parser = ["all", "train", "test"])]
        split: String,
    },
    /// Run one simulation and emit the metrics CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare strategies over several seeds and emit a summary CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated strategies.
        #[arg(long, value_delimiter = ',', default_value = "fedgsm,fedbuff,fedsat,fedasync,fedavg")]
        strategies: Vec<String>,
        /// Comma-separated master seeds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        /// Comma-separated local epoch counts; each strategy is run with each.
        #[arg(long, value_delimiter = ',')]
        epochs: Vec<usize>,
        /// Accuracy level for the time-to-target column.
        #[arg(long, default_value_t = 0.8)]
        target: f64,
        /// Also write per-run results to this file.
        #[arg(long)]
        cells: Option<PathBuf>,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Windows(common) => {
            let cfg = load_config(common.config.as_deref())?;
            let schedule = Schedule::from_config(&cfg)?;
            let mut out = open_out(common.out.as_deref())?;
            write_windows_csv(&schedule.windows, &mut out)?;
            out.flush()?;
        }
        Command::GenData { common, split } => {
            let cfg = load_config(common.config.as_deref())?;
            let mut out = open_out(common.out.as_deref())?;
            if split == "all" {
                let d = &cfg.data;
                let seed = satfl::experiment::seeding::stream_seed(cfg.seed, satfl::experiment::seeding::Stream::Data);
                let ds: Data = gen_blobs(d.n_samples, d.classes, d.dim, d.spread, seed)?;
                ds.write_csv(&mut out)?;
            } else {
                let w = Workload::from_config(&cfg, cfg.satellites())?;
                let ds = if split == "train" { &w.train } else { &w.test };
                ds.write_csv(&mut out)?;
            }
            out.flush()?;
        }
        Command::Simulate { common, seed } => {
            let mut cfg = load_config(common.config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let output = run_simulation(&cfg)?;
            if output.truncated {
                eprintln!("notice\ttruncated\tfinal synchronous round incomplete at end of horizon");
            }
            let mut out = open_out(common.out.as_deref())?;
            write_metrics_csv(&output.rows, &mut out)?;
            out.flush()?;
        }
        Command::Sweep {
            common,
            strategies,
            seeds,
            epochs,
            target,
            cells,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let kinds = strategies
                .iter()
                .map(|s| s.trim().parse::<StrategyKind>())
                .collect::<Result<Vec<_>, _>>()?;
            let arms: Vec<SweepArm> = if epochs.is_empty() {
                kinds.into_iter().map(SweepArm::new).collect()
            } else {
                kinds
                    .into_iter()
                    .flat_map(|k| epochs.iter().map(move |&e| SweepArm::with_epochs(k, e)))
                    .collect()
            };
            let report = compare_sweep(&cfg, &arms, &seeds, target)?;
            let mut out = open_out(common.out.as_deref())?;
            write_summary_csv(&report, &mut out)?;
            out.flush()?;
            if let Some(path) = cells {
                let mut f = BufWriter::new(File::create(path)?);
                write_cells_csv(&report, &mut f)?;
                f.flush()?;
            }
        }
        Command::DefaultConfig => {
            print!("{}", RunConfig::default().to_toml_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // One tab-separated line: `error`, stable code, message.
            eprintln!("error\t{}\t{}", e.code(), e.to_string().replace(['\n', '\t'], " "));
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                Error::Diverged { .. } | Error::NonFinite(_) => 3,
                _ => 1,
            })
        }
    }
}
