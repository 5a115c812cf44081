use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use glab::cli::{mixing_report, parse_model, run_suite, RunConfig, Suite, SuiteParams};
use glab::exact::enumerate_gibbs;
use glab::glauber::{run_chain, ChainSource};
use glab::GlabError;

#[derive(Parser)]
#[command(name = "glab", version, about = "Exact checks for Glauber dynamics on small Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named check suite and write `<suite>.json` to the output directory.
    Run {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        capacity: Option<usize>,
    },
    /// Simulate Glauber dynamics and print the trace as CSV.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        thin: u64,
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Exact mixing time and the optimistic MLS bound, as JSON.
    Mix {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
}

fn execute(cli: Cli) -> glab::Result<bool> {
    match cli.command {
        Command::Run { suite, model, seed, theta, delta, eps, batch, out, capacity } => {
            let suite: Suite = suite.parse()?;
            let config =
                RunConfig { theta, delta, epsilon: eps, batch, out, capacity, ..RunConfig::new(suite, model, seed) };
            let result = run_suite(&config)?;
            for r in result.failures() {
                eprintln!("FAIL {} [{}]: lhs={} rhs={}", r.name, r.instance, r.lhs, r.rhs);
            }
            println!(
                "{}: {} reports, {}",
                result.suite,
                result.reports.len(),
                if result.pass { "pass" } else { "FAIL" }
            );
            Ok(result.pass)
        }
        Command::Sample { model, steps, seed, thin, start } => {
            let model = parse_model(&model)?;
            let trace = run_chain(ChainSource::Model(&model), steps, seed, start, thin)?;
            print!("{}", trace.to_csv());
            Ok(true)
        }
        Command::Mix { model, eps, seed, delta } => {
            let model = parse_model(&model)?;
            let dist = enumerate_gibbs(&model)?;
            let params = SuiteParams { seed, epsilon: eps, delta, ..SuiteParams::default() };
            let (report, _) = mixing_report(&model, &dist, &params)?;
            println!("{}", report.to_json()?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ GlabError::Usage(_)) => {
            eprintln!("glab: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("glab: {e}");
            ExitCode::from(3)
        }
    }
}
