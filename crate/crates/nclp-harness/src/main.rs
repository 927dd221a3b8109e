use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use nclp_harness::config::{Overrides, Span};
use nclp_harness::{run, Algebra, Experiment, ExperimentConfig, Format, KernelChoice, Report};

/// Numerical experiments on noncommutative martingales and Calderón–Zygmund operators.
#[derive(Parser, Debug)]
#[command(name = "nclp", version)]
struct Cli {
    experiment: Experiment,
    /// tensor:N, grid:n,K,d or corner:n
    #[arg(long)]
    algebra: Option<Algebra>,
    /// Replaces the depth (or size) of the algebra.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Range of threshold exponents, a..b.
    #[arg(long, allow_hyphen_values = true)]
    lambda_exp: Option<Span>,
    /// Range of scale shifts, a..b.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<Span>,
    #[arg(long)]
    kernel: Option<KernelChoice>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn write(out: Option<&Path>, ext: &str, body: &str, both: bool) -> nclp_harness::Result<()> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(p) => {
            let path = if both { p.with_extension(ext) } else { p.to_path_buf() };
            Ok(std::fs::write(path, body)?)
        }
    }
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> nclp_harness::Result<()> {
    let both = format == Format::Both;
    if matches!(format, Format::Json | Format::Both) {
        write(out, "json", &report.to_json()?, both)?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        write(out, "csv", &report.to_csv()?, both)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides {
        algebra: cli.algebra,
        trials: cli.trials,
        seed: cli.seed,
        lambda_exp: cli.lambda_exp,
        s: cli.s,
        kernel: cli.kernel,
        gamma: cli.gamma,
        depth: cli.depth,
    };
    let outcome = ExperimentConfig::resolve(cli.experiment, &overrides)
        .and_then(|cfg| run(&cfg))
        .and_then(|r| emit(&r, cli.format, cli.out.as_deref()).map(|_| r));
    match outcome {
        Ok(r) if r.passed() => ExitCode::SUCCESS,
        Ok(r) => {
            for a in r.assertions.iter().filter(|a| !a.pass) {
                eprintln!("assertion failed: {} measured {:e} > {:e}", a.name, a.measured, a.threshold);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("nclp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

