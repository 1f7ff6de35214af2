use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pivp::commands::{self, BenchArgs, CliResult, Input, Output, ParamsArgs, SolveArgs, SweepParam};
use pivp_core::BigRational;

#[derive(Parser)]
#[command(name = "pivp", version, about = "Solve polynomial initial value problems to a guaranteed precision")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute y(t0 + T) within e^-mu.
    Solve(RunArgs),
    /// Print the step schedule a solve would use.
    Params(RunArgs),
    /// Time solves over a sweep of T, mu or Y and print CSV.
    Bench(BenchCliArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// System file in the .pivp format.
    #[arg(short = 'f', long = "file")]
    file: Option<PathBuf>,
    /// Built-in problem: exp, decay, harmonic, riccati or logistic.
    #[arg(long)]
    problem: Option<String>,
}

impl InputArgs {
    fn input(&self) -> Input {
        match (&self.file, &self.problem) {
            (Some(f), _) => Input::File(f.clone()),
            (None, Some(p)) => Input::Problem(p.clone()),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Time horizon; negative values integrate backwards.
    #[arg(short = 'T', value_parser = commands::parse_rational_arg, allow_hyphen_values = true)]
    t: BigRational,
    /// Precision exponent: the error is at most e^-mu.
    #[arg(long, default_value_t = 10)]
    mu: u64,
    /// Bound on |y(t)| over the horizon; defaults to the built-in problem's bound.
    #[arg(short = 'Y', value_parser = commands::parse_rational_arg)]
    y: Option<BigRational>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    #[value(name = "T")]
    T,
    #[value(name = "mu")]
    Mu,
    #[value(name = "Y")]
    Y,
}

#[derive(Args)]
struct BenchCliArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    sweep: Sweep,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[arg(short = 'T', value_parser = commands::parse_rational_arg, default_value = "1", allow_hyphen_values = true)]
    t: BigRational,
    #[arg(long, default_value_t = 10)]
    mu: u64,
    #[arg(short = 'Y', value_parser = commands::parse_rational_arg)]
    y: Option<BigRational>,
}

fn run(cli: Cli) -> CliResult<Output> {
    match cli.command {
        Command::Solve(a) => {
            commands::solve(&SolveArgs { input: a.input.input(), t: a.t, mu: a.mu, y: a.y, json: a.json })
        }
        Command::Params(a) => {
            commands::params(&ParamsArgs { input: a.input.input(), t: a.t, mu: a.mu, y: a.y, json: a.json })
        }
        Command::Bench(a) => commands::bench(&BenchArgs {
            input: a.input.input(),
            sweep: match a.sweep {
                Sweep::T => SweepParam::T,
                Sweep::Mu => SweepParam::Mu,
                Sweep::Y => SweepParam::Y,
            },
            values: a.values,
            t: a.t,
            mu: a.mu,
            y: a.y,
            threads: commands::bench_threads(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            eprint!("{}", out.stderr);
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
