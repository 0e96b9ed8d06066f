use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use coringlab::render::{self, Format};
use coringlab::{prime_from_env, verify, Instance, Options, Suite, VerificationReport};
use coringlab_core::instances::{Generator, DEFAULT_BUDGET};
use coringlab_core::par::Exec;

#[derive(Parser)]
#[command(name = "coringlab", version, about = "Comatrix corings of split direct systems over F_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Suites to run; all of them when omitted.
    #[arg(long = "suite", value_name = "S")]
    suites: Vec<Suite>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation level for lazy-corner instances.
    #[arg(long, value_name = "n")]
    level: Option<usize>,
    /// Run identities one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

impl RunArgs {
    fn options(&self) -> Options {
        Options {
            suites: if self.suites.is_empty() { Suite::ALL.to_vec() } else { self.suites.clone() },
            seed: self.seed,
            level: self.level,
            exec: if self.sequential { Exec::Sequential } else { Exec::default() },
            budget: self.budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Materialize a built-in instance: sweedler, block, corner k, lazy-corner n, kgt-directsum parts..., degenerate.
    Generate {
        name: String,
        params: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Run verification suites; exits non-zero when an identity fails.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also save the full report as JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a saved report, or verify an instance file and render the result.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print(r: &VerificationReport, format: Format) {
    match format {
        Format::Text => print!("{}", render::text(r)),
        Format::Machine => print!("{}", render::machine(r)),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate { name, params, output, budget } => {
            let g = Generator::parse(&name, &params)?;
            let sys = g.build(prime_from_env()?, budget)?;
            let text = Instance::from_system(&sys, Some(&g)).serialize()?;
            match output {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Verify { file, run, format, output } => {
            let r = verify(&read_instance(&file)?, &run.options());
            if let Some(path) = output {
                std::fs::write(&path, serde_json::to_string_pretty(&r)?).with_context(|| format!("writing {}", path.display()))?;
            }
            print(&r, format);
            Ok(r.all_passed())
        }
        Command::Report { file, format, run } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let r = match serde_json::from_str::<VerificationReport>(&text) {
                Ok(r) => r,
                Err(_) => verify(&Instance::parse(&text)?, &run.options()),
            };
            print(&r, format);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
