use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clipflow::commands::exit_code_of;
use clipflow::error::EXIT_ERROR;
use clipflow::{cmd_converge, cmd_simulate, cmd_verify, init_threads, parse_config, Suite};

/// Clipped Lenia simulator and verifier.
#[derive(Parser)]
#[command(name = "clipflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured model, writing frames and a metrics CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification suite and print one CHECK line per check.
    Verify {
        /// clip, e1, e2, speed, support, monotone, gol_equiv or all
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Config to verify against; each suite has a built-in default
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sampling seed; defaults to the config's `seed`
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Euler-curve refinement and tangency study up to n = 2^levels.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Finest curve uses 2^levels steps (2..=20)
        #[arg(long)]
        levels: u32,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| format!("unknown suite `{s}`"))
}

fn run(cli: Cli) -> i32 {
    if let Err(e) = init_threads(std::env::var("CLIPFLOW_THREADS").ok().as_deref()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match cli.command {
        Command::Simulate { config } => {
            let result = parse_config(&config)
                .map_err(Into::into)
                .and_then(|cfg| cmd_simulate(&cfg));
            if let Ok(o) = &result {
                if let Some(k) = o.extinct_at {
                    eprintln!("extinct at step {k}");
                }
            }
            exit_code_of(&result, |o| o.exit_code())
        }
        Command::Verify { suite, config, seed } => {
            let cfg = match config.map(parse_config).transpose() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: config error: {e}");
                    return EXIT_ERROR;
                }
            };
            let result = cmd_verify(suite, cfg.as_ref(), seed, &mut std::io::stdout().lock());
            exit_code_of(&result, |o| o.exit_code())
        }
        Command::Converge { config, levels } => {
            let result = parse_config(&config)
                .map_err(Into::into)
                .and_then(|cfg| cmd_converge(&cfg, levels));
            if let Ok(o) = &result {
                println!("{}", o.check.line());
            }
            exit_code_of(&result, |o| o.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(code as u8)
}
