use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scb_harness::config::GENERATORS;
use scb_harness::{run, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "scb", version, about = "Sleeping competing bandits experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ensemble described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed; overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: one per core).
        #[arg(long, env = "SCB_THREADS")]
        threads: Option<usize>,
    },
    /// Check a config file and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available instance generators.
    ListGenerators,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if threads == Some(0) {
                return Err(HarnessError::Config(vec!["threads must be >= 1".into()]));
            }
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let started = std::time::Instant::now();
            let report = run(&cfg, &out, threads)?;
            for s in &report.summary.algorithms {
                println!(
                    "{:<18} final mean optimal {:>10.3} (sd {:.3})  pessimal {:>10.3} (sd {:.3})",
                    s.algorithm, s.final_mean_optimal, s.final_std_optimal, s.final_mean_pessimal, s.final_std_pessimal
                );
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            log::info!("finished in {:.1?}", started.elapsed());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = RunConfig::from_path(&config)?;
            println!(
                "ok: {} × {} trial(s) of {} for {}",
                cfg.instances,
                cfg.trials,
                cfg.generator.name(),
                cfg.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
            );
            Ok(())
        }
        Command::ListGenerators => {
            for (name, about) in GENERATORS {
                println!("{name:<8} {about}");
            }
            Ok(())
        }
    }
}
