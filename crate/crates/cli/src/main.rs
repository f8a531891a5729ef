use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rootsep::experiment::{list_presets, preset, run_experiment, validate_config, ExperimentConfig};

/// Root barriers for Skorokhod embeddings: compute, simulate, verify.
#[derive(Parser)]
#[command(name = "rootsep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (default: out/<name>).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the simulation seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the Monte Carlo loop (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// List the built-in experiment presets.
    Presets {
        /// Print the preset's config as TOML instead of the table.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> rootsep::Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => validate_config(path),
            (_, Some(name)) => preset(name),
            _ => unreachable!("clap enforces one source"),
        }
    }
}

fn fail(e: rootsep::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Presets { show: Some(name) } => match preset(&name).and_then(|c| c.to_toml()) {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Presets { show: None } => {
            for p in list_presets() {
                println!("{:<16} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { source } => match source.load().and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                println!("ok: {}", c.name);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Run { source, out_dir, seed, threads } => {
            let mut cfg = match source.load() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = seed {
                cfg.simulation.seed = s;
            }
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir());
            let report = run_experiment(&cfg, Some(&dir));
            match &report.error {
                None => {
                    log::info!("{} finished in {:.1}s; artifacts in {}", report.name, report.elapsed_secs, dir.display());
                    if let Some(s) = &report.summary {
                        println!("{}", serde_json::to_string_pretty(s).unwrap_or_default());
                    }
                }
                Some(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(report.exit_code as u8)
        }
    }
}
