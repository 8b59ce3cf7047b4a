use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graddiv::cli::{
    run, FormulationChoice, ModeChoice, ProblemChoice, RunConfig, SolverChoice,
};

#[derive(Parser)]
#[command(
    name = "graddiv",
    about = "Minimum-residual solvers for the fourth-order grad-div problem",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write CSV/VTK artifacts.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Benchmark problem.
    #[arg(long, value_enum)]
    problem: ProblemChoice,
    /// Variational formulation.
    #[arg(long, value_enum)]
    formulation: FormulationChoice,
    /// Field polynomial degree (first-order scheme only).
    #[arg(long, default_value_t = 0)]
    p: usize,
    /// Refinement strategy.
    #[arg(long, value_enum, default_value_t = ModeChoice::Uniform)]
    mode: ModeChoice,
    /// Bulk marking parameter for adaptive runs.
    #[arg(long, default_value_t = 0.75)]
    theta: f64,
    /// Number of refinement levels to record.
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Stop when the trial space reaches this many unknowns.
    #[arg(long, default_value_t = 150_000)]
    max_dof: usize,
    /// Initial n x n subdivision of the unit square.
    #[arg(long, default_value_t = 2)]
    initial_n: usize,
    /// Output directory (default: $GRADDIV_OUTDIR or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Export a VTK file per level.
    #[arg(long)]
    vtk: bool,
    /// Linear solver for the global SPD system.
    #[arg(long, value_enum, default_value_t = SolverChoice::Direct)]
    solver: SolverChoice,
    /// Worker threads for element loops (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Exit nonzero unless the fitted rate matches the expected one.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = RunConfig {
                problem: args.problem,
                formulation: args.formulation,
                p: args.p,
                mode: args.mode,
                theta: args.theta,
                levels: args.levels,
                max_dof: args.max_dof,
                initial_n: args.initial_n,
                out_dir: args.out,
                vtk: args.vtk,
                solver: args.solver,
                threads: args.threads,
                check: args.check,
            };
            match run(&config) {
                Ok(summary) => {
                    println!("level  nelems      dim        e_total        eta       eoc");
                    for r in &summary.records {
                        println!(
                            "{:5} {:7} {:8}  {:.6e}  {:.6e}  {}",
                            r.level,
                            r.n_elements,
                            r.dim,
                            r.error_total,
                            r.eta,
                            r.eoc_error
                                .map_or("    -".to_string(), |e| format!("{e:6.3}")),
                        );
                    }
                    println!(
                        "error slope {:.4}, eta slope {:.4} (expected {:.4} +/- {:.2})",
                        summary.error_slope,
                        summary.eta_slope,
                        summary.expected_slope,
                        summary.tolerance
                    );
                    println!("table written to {}", summary.csv_path.display());
                    match summary.passed {
                        Some(false) => {
                            eprintln!("rate check failed");
                            ExitCode::FAILURE
                        }
                        _ => ExitCode::SUCCESS,
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
