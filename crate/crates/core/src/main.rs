use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chemostat::analysis::report;
use chemostat::config::RunConfig;
use chemostat::experiment::{run_preset, ExperimentPreset, Figure};
use chemostat::integrator::{integrate, SimConfig};
use chemostat::noise::{sample_ou_path, NoiseConfig, NoisePath};
use chemostat::{Error, Result};

/// Random chemostat simulation and analysis.
#[derive(Debug, Parser)]
#[command(name = "chemostat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        input: ConfigInput,
        /// Noise seed (defaults to the first configured seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form conditions and print the report.
    Analyze {
        #[command(flatten)]
        input: ConfigInput,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the deterministic reference plus seeded noisy runs.
    Ensemble {
        #[command(flatten)]
        input: ConfigInput,
        /// Comma-separated seeds, replacing the configured list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun one of the four reference experiments.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ConfigInput {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// `key=value` override, e.g. `kinetics.k=1.4`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the effective configuration (after overrides) to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl ConfigInput {
    fn load(&self) -> Result<RunConfig> {
        let cfg = RunConfig::load(&self.config, &self.overrides)?;
        if let Some(path) = &self.save_config {
            cfg.save(path)?;
        }
        Ok(cfg)
    }

    fn name(&self) -> String {
        self.config.file_stem().map_or_else(|| "custom".into(), |s| s.to_string_lossy().into_owned())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { input, seed, out } => simulate(&input.load()?, seed, out.as_deref()),
        Command::Analyze { input, json } => {
            let cfg = input.load()?;
            let r = report(&cfg.params, &cfg.run.analysis)?;
            let mut stdout = io::stdout().lock();
            if json {
                serde_json::to_writer_pretty(&mut stdout, &r)?;
                writeln!(stdout)?;
            } else {
                write!(stdout, "{r}")?;
            }
            Ok(())
        }
        Command::Ensemble { input, seeds, out } => {
            let mut preset = input.load()?.to_preset(&input.name())?;
            if let Some(seeds) = seeds {
                preset.seeds = seeds;
            }
            ensemble(&preset, &out)
        }
        Command::Reproduce { figure, seeds, out } => {
            let mut preset = ExperimentPreset::figure(Figure::from_number(figure)?);
            if let Some(seeds) = seeds {
                preset.seeds = seeds;
            }
            ensemble(&preset, &out)
        }
    }
}

fn simulate(cfg: &RunConfig, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let r = &cfg.run;
    let noise = if cfg.params.noise_amplitude == 0.0 {
        NoisePath::zeros(r.t_end, r.dt)?
    } else {
        let seed = seed
            .or_else(|| r.seeds.first().copied())
            .ok_or_else(|| Error::Config("a seed is required for a noisy simulation".into()))?;
        sample_ou_path(&NoiseConfig::new(seed, r.t_end, r.dt).with_burn_in(r.burn_in))?
    };
    let sim = SimConfig::new(cfg.initial()?, r.t_end).with_dt(r.dt).with_record_every(r.record_every);
    let traj = integrate(&cfg.params, &noise, &sim).map_err(|e| e.with_seed(noise.seed()))?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            traj.write_csv(BufWriter::new(File::create(path)?))?;
        }
        None => traj.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn ensemble(preset: &ExperimentPreset, out: &Path) -> Result<()> {
    let summary = run_preset(preset, Some(out))?;
    println!(
        "{}: classification {} ({} seeded runs, outputs in {})",
        summary.name,
        summary.classification,
        summary.runs.len(),
        out.display()
    );
    Ok(())
}
