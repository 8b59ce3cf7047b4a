//! Configuration and driver behind the `graddiv run` command.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use thiserror::Error;

use crate::adaptivity::{
    adaptive_loop, fit_slope, AdaptiveConfig, AdaptivityError, ConvergenceRecord, RefinementMode,
};
use crate::dpg::SolveOptions;
use crate::form::{ExactField, FirstOrder, Formulation, SecondOrder};
use crate::io::{solution_cell_data, trace_point_data, write_convergence_csv, write_vtk};
use crate::problems::{lshape_problem, smooth_problem, ProblemSpec};
use crate::solver::SolveMethod;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "GRADDIV_OUTDIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemChoice {
    Smooth,
    Lshape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormulationChoice {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Uniform,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    /// Sparse Cholesky with fill-reducing ordering.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Cg,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    pub formulation: FormulationChoice,
    /// Field degree, first-order scheme only (the second is lowest order).
    pub p: usize,
    pub mode: ModeChoice,
    pub theta: f64,
    /// Number of recorded refinement levels.
    pub levels: usize,
    pub max_dof: usize,
    /// Subdivision of the initial unit-square mesh (ignored for the L-shape).
    pub initial_n: usize,
    pub out_dir: Option<PathBuf>,
    pub vtk: bool,
    pub solver: SolverChoice,
    pub threads: Option<usize>,
    /// Verify the fitted slopes against the expected rates.
    pub check: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemChoice::Smooth,
            formulation: FormulationChoice::First,
            p: 0,
            mode: ModeChoice::Uniform,
            theta: 0.75,
            levels: 6,
            max_dof: 150_000,
            initial_n: 2,
            out_dir: None,
            vtk: false,
            solver: SolverChoice::Direct,
            threads: None,
            check: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] AdaptivityError),
}

/// Fitted slopes and the outcome of the optional rate check.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<ConvergenceRecord>,
    /// Least-squares slope of the total field error over the last 3 levels.
    pub error_slope: f64,
    pub eta_slope: f64,
    pub expected_slope: f64,
    pub tolerance: f64,
    /// `Some` only when the config asked for a check.
    pub passed: Option<bool>,
    pub csv_path: PathBuf,
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.formulation == FormulationChoice::Second && self.p != 0 {
            return Err(CliError::Config(
                "the second-order scheme is lowest order; drop --p or set it to 0".into(),
            ));
        }
        if self.p > 1 {
            return Err(CliError::Config(format!(
                "field degree {} not validated; use 0 or 1",
                self.p
            )));
        }
        if self.mode == ModeChoice::Adaptive && !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(CliError::Config(format!(
                "theta = {} outside (0, 1]",
                self.theta
            )));
        }
        if self.levels == 0 {
            return Err(CliError::Config("need at least one level".into()));
        }
        if self.initial_n == 0 {
            return Err(CliError::Config("initial subdivision must be >= 1".into()));
        }
        Ok(())
    }

    fn slug(&self) -> String {
        let problem = match self.problem {
            ProblemChoice::Smooth => "smooth",
            ProblemChoice::Lshape => "lshape",
        };
        let form = match self.formulation {
            FormulationChoice::First => format!("first_p{}", self.p),
            FormulationChoice::Second => "second".to_string(),
        };
        let mode = match self.mode {
            ModeChoice::Uniform => "uniform",
            ModeChoice::Adaptive => "adaptive",
        };
        format!("{problem}_{form}_{mode}")
    }

    /// Expected slope of error versus dimension and the accepted deviation.
    pub fn expected_rate(&self) -> (f64, f64) {
        match (self.problem, self.mode) {
            (ProblemChoice::Smooth, _) => (-0.5, 0.10),
            (ProblemChoice::Lshape, ModeChoice::Uniform) => (-1.0 / 3.0, 0.07),
            (ProblemChoice::Lshape, ModeChoice::Adaptive) => (-0.5, 0.10),
        }
    }

    fn resolve_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            return PathBuf::from(dir);
        }
        PathBuf::from("out")
    }
}

/// Runs the configured convergence study, writing the CSV table, an optional
/// VTK file per level, and a plain-text summary.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    let spec: ProblemSpec = match config.problem {
        ProblemChoice::Smooth => smooth_problem(),
        ProblemChoice::Lshape => lshape_problem(),
    };
    let form: Box<dyn Formulation> = match config.formulation {
        FormulationChoice::First => Box::new(FirstOrder::new(config.p)),
        FormulationChoice::Second => Box::new(SecondOrder::lowest()),
    };
    let mode = match config.mode {
        ModeChoice::Uniform => RefinementMode::Uniform,
        ModeChoice::Adaptive => RefinementMode::Adaptive,
    };
    let method = match config.solver {
        SolverChoice::Direct => SolveMethod::Direct,
        SolverChoice::Cg => SolveMethod::ConjugateGradient,
    };
    let adaptive = AdaptiveConfig {
        theta: config.theta,
        max_levels: config.levels,
        max_dof: config.max_dof,
        mode,
        solve: SolveOptions {
            method,
            threads: config.threads,
        },
    };

    let out_dir = config.resolve_out_dir();
    fs::create_dir_all(&out_dir)?;
    let slug = config.slug();

    let trace_names: &[&str] = match config.formulation {
        FormulationChoice::First => &["u2_hat", "u4_hat"],
        FormulationChoice::Second => &["u_div_hat", "w_div_hat"],
    };
    let mut vtk_error: Option<std::io::Error> = None;
    let records = adaptive_loop(
        &spec,
        form.as_ref(),
        &adaptive,
        spec.initial_mesh(config.initial_n),
        |state| {
            if config.vtk && vtk_error.is_none() {
                let layout = form.layout(state.mesh);
                let mut cells =
                    solution_cell_data(state.mesh, form.as_ref(), &layout, &state.solution.coeffs);
                cells.push(("eta".to_string(), state.estimate.per_element.clone()));
                let points =
                    trace_point_data(state.mesh, &layout, &state.solution.coeffs, trace_names);
                let path = out_dir.join(format!("{slug}_level{:02}.vtk", state.record.level));
                if let Err(e) = write_vtk(&path, state.mesh, &cells, &points) {
                    vtk_error = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = vtk_error {
        return Err(CliError::Io(e));
    }

    let grad_div_var = form
        .variables()
        .iter()
        .position(|v| matches!(v.exact, ExactField::GradDivU | ExactField::NegGradDivU))
        .expect("every formulation has a grad-div field");

    let csv_path = out_dir.join(format!("convergence_{slug}.csv"));
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    write_convergence_csv(&mut csv, &records, grad_div_var)?;
    csv.flush()?;

    let window = records.len().saturating_sub(3);
    let error_pts: Vec<(f64, f64)> = records[window..]
        .iter()
        .map(|r| (r.dim as f64, r.error_total))
        .collect();
    let eta_pts: Vec<(f64, f64)> = records[window..]
        .iter()
        .map(|r| (r.dim as f64, r.eta))
        .collect();
    let error_slope = fit_slope(&error_pts);
    let eta_slope = fit_slope(&eta_pts);
    let (expected_slope, tolerance) = config.expected_rate();
    let passed = config.check.then(|| {
        (error_slope - expected_slope).abs() <= tolerance
            && (eta_slope - error_slope).abs() <= 0.15
    });

    let summary_path = out_dir.join(format!("summary_{slug}.txt"));
    let mut summary = BufWriter::new(File::create(&summary_path)?);
    writeln!(summary, "run           {slug}")?;
    writeln!(summary, "levels        {}", records.len())?;
    writeln!(summary, "final dim     {}", records.last().map_or(0, |r| r.dim))?;
    writeln!(summary, "error slope   {error_slope:.4}")?;
    writeln!(summary, "eta slope     {eta_slope:.4}")?;
    writeln!(
        summary,
        "expected      {expected_slope:.4} +/- {tolerance:.2}"
    )?;
    if let Some(ok) = passed {
        writeln!(summary, "check         {}", if ok { "pass" } else { "FAIL" })?;
    }
    summary.flush()?;

    Ok(RunSummary {
        records,
        error_slope,
        eta_slope,
        expected_slope,
        tolerance,
        passed,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_rejects_higher_degree() {
        let config = RunConfig {
            formulation: FormulationChoice::Second,
            p: 1,
            ..RunConfig::default()
        };
        assert!(matches!(run(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn adaptive_needs_valid_theta() {
        let config = RunConfig {
            mode: ModeChoice::Adaptive,
            theta: 0.0,
            ..RunConfig::default()
        };
        assert!(matches!(run(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn expected_rates_follow_problem_and_mode() {
        let mut config = RunConfig::default();
        assert_eq!(config.expected_rate(), (-0.5, 0.10));
        config.problem = ProblemChoice::Lshape;
        assert_eq!(config.expected_rate(), (-1.0 / 3.0, 0.07));
        config.mode = ModeChoice::Adaptive;
        assert_eq!(config.expected_rate(), (-0.5, 0.10));
    }
}
