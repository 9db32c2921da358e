use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dirac_lfv::{run, seed_from_env, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "dirac-lfv", version, about = "Spectra of Dirac systems with a local Fermi velocity")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Refined eigenvalues and eigenfunctions.
    Spectrum(RunArgs),
    /// Numeric vs closed-form levels, coordinate equivalence and partner pairing.
    Compare(RunArgs),
    /// Sampled partner potentials, their extrema and a gnuplot script.
    PotentialScan(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file; repeat for a batch, which runs concurrently.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Output directory. With several configs each run writes to <out>/<config stem>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of eigenvalues.
    #[arg(long)]
    k: Option<usize>,
    /// Target Richardson error estimate.
    #[arg(long)]
    tol: Option<f64>,
}

fn prepare(path: &Path, args: &RunArgs, batch: bool) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &args.out {
        cfg.out_dir = if batch {
            let stem = path.file_stem().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("run"));
            out.join(stem)
        } else {
            out.clone()
        };
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Compare(a) => (Command::Compare, a),
        Sub::PotentialScan(a) => (Command::PotentialScan, a),
    };
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let batch = args.config.len() > 1;
    let results: Vec<(PathBuf, Result<_, CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .config
            .iter()
            .map(|path| {
                scope.spawn(move || {
                    let outcome = prepare(path, args, batch).and_then(|cfg| run(command, &cfg, seed));
                    (path.clone(), outcome)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let mut code = 0u8;
    for (path, outcome) in results {
        match outcome {
            Ok(report) => {
                println!("{}: {} ok", path.display(), command.label());
                for line in &report.summary {
                    println!("  {line}");
                }
                for f in &report.files {
                    println!("  wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("{}: error: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code)
}
