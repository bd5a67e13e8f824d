use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use pfslack::benchmarks::{build_with, Benchmark};
use pfslack::fem::Formulation;
use pfslack::io::{execute, mesh_vtk, parse_config, LD_FILE};
use pfslack::mesh::save_mesh;
use pfslack::solver::Outcome;
use pfslack::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Phase-field fracture with slack-variable irreversibility.
#[derive(Parser, Debug)]
#[command(name = "pfslack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        formulation: Option<Formulation>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Print the benchmark names.
    ListBenchmarks,
    /// Run the built-in oracle and invariant checks.
    Check,
    /// Write a benchmark mesh (`.vtk` extension for VTK, the native text format otherwise).
    Mesh {
        benchmark: Benchmark,
        #[arg(long)]
        out: PathBuf,
        /// Length scale; the band element size follows it.
        #[arg(long)]
        length_scale: Option<f64>,
    },
}

fn code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::NonConvergence { .. } | Error::DualInfeasible { .. } | Error::LinearSolve(_) | Error::ElementNaN { .. } => {
            EXIT_NONCONVERGENCE
        }
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run {
            config,
            formulation,
            eta,
            tol,
            out,
            snapshot_every,
            max_steps,
            resume,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(f) = formulation {
                cfg.solver.formulation = f;
            }
            if let Some(v) = eta {
                cfg.solver.eta = v;
            }
            if let Some(v) = tol {
                cfg.solver.tol = v;
            }
            if let Some(v) = out {
                cfg.run.output_dir = v;
            }
            if let Some(v) = snapshot_every {
                cfg.run.snapshot_every = v;
            }
            if max_steps.is_some() {
                cfg.solver.max_steps = max_steps;
            }
            let summary = execute(&cfg, resume)?;
            eprintln!(
                "{} steps, peak load {:.6e} kN, results in {}",
                summary.records.len(),
                summary.peak_load(),
                summary.output_dir.join(LD_FILE).display()
            );
            match summary.outcome {
                Outcome::Completed => Ok(0),
                Outcome::Stopped(why) => {
                    eprintln!("stopped: {why}");
                    Ok(0)
                }
                Outcome::Failed(e) => {
                    error!("{e}");
                    Ok(EXIT_NONCONVERGENCE)
                }
            }
        }
        Command::ListBenchmarks => {
            for b in Benchmark::ALL {
                println!("{:<14}{}", b.name(), b.description());
            }
            Ok(0)
        }
        Command::Check => {
            let mut failed = 0;
            for r in pfslack::selfcheck::run_all() {
                println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            Ok(if failed == 0 { 0 } else { EXIT_NONCONVERGENCE })
        }
        Command::Mesh {
            benchmark,
            out,
            length_scale,
        } => {
            let mut cfg = pfslack::io::RunConfig::for_benchmark(benchmark);
            cfg.material.length_scale = length_scale;
            let mesh = build_with(benchmark, cfg.params()?)?.mesh;
            if out.extension().is_some_and(|e| e == "vtk") {
                std::fs::write(&out, mesh_vtk(&mesh)).map_err(|e| Error::Io {
                    path: out.clone(),
                    source: e,
                })?;
            } else {
                save_mesh(&mesh, &out)?;
            }
            eprintln!(
                "{} nodes, {} cells written to {}",
                mesh.node_count(),
                mesh.cell_count(),
                out.display()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    // step progress is only of interest while running
    let level = if matches!(cli.command, Command::Run { .. }) {
        "info"
    } else {
        "warn"
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            error!("{e}");
            ExitCode::from(code(&e))
        }
    }
}
