use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use semibandit::algorithms::PolicyKind;
use semibandit::harness::{
    format_table, run_experiment, selftest, table_command, ExperimentSpec, HarnessError, HeuristicSet,
};

#[derive(Parser)]
#[command(name = "semibandit", version, about = "Corrupted combinatorial semi-bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment on the benchmark m-set instance.
    Run(RunArgs),
    /// Reproduce one of the preset result tables.
    Table {
        #[arg(value_parser = ["table1", "table2", "table3", "table4"])]
        preset: String,
        #[arg(long, default_value_t = 8)]
        repeats: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file with the same field names; flags given here win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "K")]
    arms: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Instance gap.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<u64>,
    /// Corruption budget.
    #[arg(long = "C")]
    budget: Option<f64>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_heuristic)]
    heuristic: Option<HeuristicSet>,
    #[arg(long)]
    repeats: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: semibandit::algorithms::PolicyError| e.to_string())
}

fn parse_heuristic(s: &str) -> Result<HeuristicSet, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

impl RunArgs {
    fn into_spec(self) -> anyhow::Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_path(path)?,
            None => ExperimentSpec::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { spec.$field = v; })*
            };
        }
        apply!(arms, d, delta, horizon, budget, policy, alpha, heuristic, repeats, seed);
        if self.lambda.is_some() {
            spec.lambda = self.lambda;
        }
        if self.out.is_some() {
            spec.out = self.out;
        }
        if self.workers.is_some() {
            spec.workers = self.workers;
        }
        Ok(spec)
    }
}

fn fail(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    let invariant = err
        .downcast_ref::<HarnessError>()
        .is_some_and(HarnessError::is_invariant);
    ExitCode::from(if invariant { 3 } else { 2 })
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let spec = args.into_spec()?;
    let result = run_experiment(&spec)?;
    let title = format!(
        "K={} d={} delta={} T={} repeats={}",
        spec.arms, spec.d, spec.delta, spec.horizon, spec.repeats
    );
    print!("{}", format_table(&title, &[result.report]));
    if let Some(out) = &spec.out {
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Table {
            preset,
            repeats,
            seed,
            workers,
        } => table_command(&preset, repeats, seed, workers)
            .map(|reports| print!("{}", format_table(&preset, &reports)))
            .with_context(|| format!("running {preset}")),
        Command::Selftest => {
            let report = selftest();
            for (name, ok, detail) in &report.checks {
                println!("{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
            }
            if report.passed() {
                Ok(())
            } else {
                return ExitCode::from(3);
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => fail(err),
    }
}
