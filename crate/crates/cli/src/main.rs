use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use risnoise::noise::BOLTZMANN_ROUNDED;
use risnoise::sweep::{self, Experiment, SweepGrid};
use risnoise::validate::{self, Level, ValidateOptions};
use risnoise::Execution;

#[derive(Parser, Debug)]
#[command(name = "risnoise", version, about = "Outage and throughput of RIS links with surface thermal noise")]
struct Cli {
    /// Worker threads for sweeps and Monte Carlo runs (0 = one per core).
    #[arg(long, global = true, env = "RISNOISE_THREADS", default_value_t = 0)]
    threads: usize,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the surface noise power table (dBW) as CSV.
    Table2 {
        /// Optional table2 document overriding the Boltzmann constant.
        #[arg(long)]
        config: Option<String>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep from a configuration file or bundled preset name.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the Monte Carlo trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Comma-separated modes replacing those in the configuration.
        #[arg(long)]
        modes: Option<String>,
        /// Also write a gnuplot script plotting the CSV.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Run the self-check suite; exits non-zero on any failure.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Draws per Monte Carlo check (full level).
        #[arg(long)]
        trials: Option<u64>,
        /// Boltzmann constant for the noise-table check.
        #[arg(long)]
        boltzmann: Option<f64>,
    },
    /// List the bundled presets, or print one.
    Presets {
        name: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Reads a configuration from a file, falling back to a preset of that name.
fn load_experiment(name_or_path: &str) -> Result<Experiment> {
    let path = Path::new(name_or_path);
    if path.exists() {
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read {name_or_path}"))?;
        return risnoise::sweep::parse_experiment(&src).with_context(|| format!("in {name_or_path}"));
    }
    match sweep::preset(name_or_path) {
        Ok(p) => Ok(p.experiment()?),
        Err(_) => bail!("{name_or_path} is neither a readable file nor a preset name (see `risnoise presets`)"),
    }
}

fn run_sweep(
    exec: Execution,
    config: &str,
    out: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
    modes: Option<&str>,
    gnuplot: Option<&Path>,
) -> Result<()> {
    let mut grid: SweepGrid = match load_experiment(config)? {
        Experiment::Sweep(g) => g,
        Experiment::Table2 { boltzmann } => {
            risnoise::sweep::write_table2_csv(boltzmann, output(out)?)?;
            return Ok(());
        }
    };
    if let Some(s) = seed {
        grid.monte_carlo.seed = s;
    }
    if let Some(t) = trials {
        grid.monte_carlo.trials = t;
    }
    if let Some(list) = modes {
        grid = grid.with_modes(sweep::parse_mode_list(list)?);
    }
    let rows = sweep::evaluate_sweep(&grid, exec)?;
    sweep::write_sweep_csv(&rows, output(out)?)?;
    if let Some(script) = gnuplot {
        let csv_name = out.map(|p| p.display().to_string()).unwrap_or_else(|| "sweep.csv".into());
        std::fs::write(script, sweep::gnuplot_script(&grid, &csv_name))
            .with_context(|| format!("cannot write {}", script.display()))?;
    }
    log::info!("{} rows written for {}", rows.len(), if grid.name.is_empty() { config } else { &grid.name });
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.threads > 0 && !risnoise::exec::configure_workers(cli.threads) {
        log::warn!("worker count {} not applied", cli.threads);
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Table2 { config, out } => {
            let boltzmann = match config.as_deref().map(load_experiment).transpose()? {
                None => BOLTZMANN_ROUNDED,
                Some(Experiment::Table2 { boltzmann }) => boltzmann,
                Some(Experiment::Sweep(_)) => bail!("table2 expects a document with kind = \"table2\""),
            };
            sweep::write_table2_csv(boltzmann, output(out.as_deref())?)?;
        }
        Command::Sweep { config, out, seed, trials, modes, gnuplot } => {
            run_sweep(exec, &config, out.as_deref(), seed, trials, modes.as_deref(), gnuplot.as_deref())?;
        }
        Command::Validate { level, seed, trials, boltzmann } => {
            let defaults = ValidateOptions::default();
            let opts = ValidateOptions {
                boltzmann: boltzmann.unwrap_or(defaults.boltzmann),
                trials: trials.unwrap_or(defaults.trials),
                seed: seed.unwrap_or(defaults.seed),
            };
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = validate::run(level, &opts);
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Presets { name: None } => {
            for p in &sweep::PRESETS {
                println!("{:<16} {}", p.name, p.description());
            }
        }
        Command::Presets { name: Some(name) } => {
            print!("{}", sweep::preset(&name)?.source);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
