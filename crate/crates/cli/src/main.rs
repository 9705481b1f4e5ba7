mod build;
mod commands;
mod config;
mod gen;
mod selftest;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use commands::{EXIT_ERROR, EXIT_OK};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "hetoda", version, about = "Diagonal Hermitian-Einstein metrics on split Higgs bundles over the torus")]
struct Cli {
    /// Print the parsed config in canonical form and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact test of the degree cone condition (exit 0 feasible, 2 infeasible).
    CheckCone { config: PathBuf },
    /// Solve for the potential (exit 0 converged, 3 divergence, 4 iteration limit).
    Solve { config: PathBuf },
    /// Scan the energy along the configured directions.
    Probe { config: PathBuf },
    /// Full matrix residual of a solution (exit 0 full critical point, 5 diagonal only).
    Verify {
        config: PathBuf,
        /// HEF1 solution; defaults to OUTPUT_DIR/xi.hef1.
        solution: Option<PathBuf>,
    },
    /// Write a cyclic config.
    GenCyclic {
        #[arg(long, default_value_t = 3)]
        rank: usize,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Higgs entry expressions in cyclic order (all or none).
        #[arg(long)]
        phi: Vec<String>,
        /// Rank-3 problem with a known smooth solution, written next to the config.
        #[arg(long)]
        manufactured: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Seeded invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        cases: usize,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HETODA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().with_context(|| format!("HETODA_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        bail!("HETODA_THREADS must be a positive integer");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    configure_threads()?;
    let config_path = match &cli.command {
        Command::CheckCone { config } | Command::Solve { config } | Command::Probe { config } | Command::Verify { config, .. } => {
            Some(config)
        }
        _ => None,
    };
    let cfg = match config_path {
        Some(path) => Some(RunConfig::load(path)?),
        None => None,
    };
    if cli.dump_config {
        let Some(cfg) = cfg else {
            bail!("--dump-config needs a subcommand that reads a config");
        };
        write!(out, "{}", cfg.dump())?;
        return Ok(EXIT_OK);
    }
    match (cli.command, cfg) {
        (Command::CheckCone { .. }, Some(cfg)) => commands::check_cone(&cfg, out),
        (Command::Solve { .. }, Some(cfg)) => commands::solve_cmd(&cfg, out),
        (Command::Probe { .. }, Some(cfg)) => commands::probe_cmd(&cfg, out),
        (Command::Verify { solution, .. }, Some(cfg)) => commands::verify_cmd(&cfg, solution.as_deref(), out),
        (Command::GenCyclic { rank, n, phi, manufactured, output }, _) => {
            gen::gen_cyclic(rank, n, &phi, manufactured, &output)?;
            writeln!(out, "wrote {}", output.display())?;
            Ok(EXIT_OK)
        }
        (Command::Selftest { seed, cases }, _) => Ok(if selftest::run(seed, cases, out)? { EXIT_OK } else { EXIT_ERROR }),
        _ => unreachable!("config loaded for every config command"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
