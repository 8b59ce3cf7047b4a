//! Estimator-driven refinement loop: solve, estimate, mark, refine.

use thiserror::Error;

use crate::dpg::{self, DpgError, Estimate, Solution, SolveOptions};
use crate::form::Formulation;
use crate::mesh::Mesh;
use crate::problems::{exact_errors, project_boundary_data, total_error, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefinementMode {
    /// Every element is marked on every level.
    Uniform,
    /// Bulk marking of a minimal set carrying `theta^2` of the squared estimator.
    Adaptive,
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveConfig {
    /// Bulk marking parameter in (0, 1]; the experiments use 3/4.
    pub theta: f64,
    /// Number of recorded levels (the loop solves this many times at most).
    pub max_levels: usize,
    /// Stop once the trial dimension reaches this budget.
    pub max_dof: usize,
    pub mode: RefinementMode,
    pub solve: SolveOptions,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            theta: 0.75,
            max_levels: 12,
            max_dof: 200_000,
            mode: RefinementMode::Adaptive,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AdaptivityError {
    #[error("marking parameter theta = {0} outside (0, 1]")]
    BadTheta(f64),
    #[error("level {level}: {source}")]
    Level { level: usize, source: DpgError },
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub n_elements: usize,
    pub dim: usize,
    /// Per-variable L2 errors in the order of `form.variables()`.
    pub errors: Vec<f64>,
    pub error_total: f64,
    pub eta: f64,
    /// Rate against the previous level: `-log(e_k / e_{k+1}) / log(dim_{k+1} / dim_k)`.
    pub eoc_error: Option<f64>,
    pub eoc_eta: Option<f64>,
}

/// Experimental order of convergence between two levels, negative for
/// decreasing quantities.
pub fn eoc(prev: (usize, f64), next: (usize, f64)) -> f64 {
    -((prev.1 / next.1).ln() / (next.0 as f64 / prev.0 as f64).ln())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|v| v * v).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Minimal bulk set by descending estimator contribution, ties broken by
/// lower element index: the smallest M with
/// `sum_{T in M} eta_T^2 >= theta^2 sum_T eta_T^2`.
pub fn doerfler_mark(eta: &[f64], theta: f64) -> Vec<usize> {
    assert!(theta > 0.0 && theta <= 1.0);
    let total: f64 = eta.iter().map(|e| e * e).sum();
    if total == 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let target = theta * theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for t in order {
        if acc >= target {
            break;
        }
        if eta[t] == 0.0 {
            break;
        }
        acc += eta[t] * eta[t];
        marked.push(t);
    }
    marked
}

/// Data handed to the per-level callback of [`adaptive_loop`].
pub struct LevelState<'a> {
    pub mesh: &'a Mesh,
    pub record: &'a ConvergenceRecord,
    pub solution: &'a Solution,
    pub estimate: &'a Estimate,
}

/// Runs the refinement loop, recording one [`ConvergenceRecord`] per level.
pub fn adaptive_loop(
    spec: &ProblemSpec,
    form: &dyn Formulation,
    config: &AdaptiveConfig,
    initial_mesh: Mesh,
    mut on_level: impl FnMut(&LevelState),
) -> Result<Vec<ConvergenceRecord>, AdaptivityError> {
    if !(config.theta > 0.0 && config.theta <= 1.0) {
        return Err(AdaptivityError::BadTheta(config.theta));
    }
    let mut mesh = initial_mesh;
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    for level in 0..config.max_levels {
        let layout = form.layout(&mesh);
        let constraints = project_boundary_data(&mesh, &layout, spec);
        let at_level = |source| AdaptivityError::Level { level, source };
        let solution = dpg::assemble_solve(
            &mesh,
            form,
            &layout,
            &spec.f,
            &constraints,
            config.solve,
        )
        .map_err(at_level)?;
        let estimate =
            dpg::estimate(&mesh, form, &layout, &spec.f, &solution.coeffs).map_err(at_level)?;
        let errors = exact_errors(&mesh, form, &layout, spec, &solution.coeffs);
        let error_total = total_error(&errors);

        let (eoc_error, eoc_eta) = match records.last() {
            Some(prev) => (
                Some(eoc((prev.dim, prev.error_total), (layout.n_total, error_total))),
                Some(eoc((prev.dim, prev.eta), (layout.n_total, estimate.total))),
            ),
            None => (None, None),
        };
        let record = ConvergenceRecord {
            level,
            n_elements: mesh.n_triangles(),
            dim: layout.n_total,
            errors,
            error_total,
            eta: estimate.total,
            eoc_error,
            eoc_eta,
        };
        on_level(&LevelState {
            mesh: &mesh,
            record: &record,
            solution: &solution,
            estimate: &estimate,
        });
        records.push(record);

        if layout.n_total >= config.max_dof || level + 1 == config.max_levels {
            break;
        }
        let marked = match config.mode {
            RefinementMode::Uniform => (0..mesh.n_triangles()).collect(),
            RefinementMode::Adaptive => doerfler_mark(&estimate.per_element, config.theta),
        };
        mesh = mesh.refine(&marked);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_estimators_mark_nine_of_sixteen() {
        // theta^2 = 9/16 exactly; brute force over prefix sums gives 9
        let eta = vec![1.0; 16];
        let marked = doerfler_mark(&eta, 0.75);
        assert_eq!(marked.len(), 9);
        let brute = (1..=16)
            .find(|&k| k as f64 >= 0.5625 * 16.0)
            .unwrap();
        assert_eq!(brute, 9);
    }

    #[test]
    fn theta_one_marks_all_positive() {
        let eta = vec![0.3, 0.0, 1.2, 0.7];
        let marked = doerfler_mark(&eta, 1.0);
        let mut sorted = marked.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 2, 3]);
    }

    #[test]
    fn dominant_element_marked_alone() {
        let eta = vec![0.01, 10.0, 0.02, 0.005];
        let marked = doerfler_mark(&eta, 0.75);
        assert_eq!(marked, vec![1]);
    }

    #[test]
    fn eoc_recovers_known_rate() {
        // e = dim^{-1/2}
        let e = |d: usize| (d as f64).powf(-0.5);
        let r = eoc((100, e(100)), (400, e(400)));
        assert!((r + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_slope_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&d: &f64| (d, 3.0 * d.powf(-0.5)))
            .collect();
        assert!((fit_slope(&pts) + 0.5).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn marked_set_is_minimal(values in proptest::collection::vec(0.0f64..10.0, 1..40),
                                 theta in 0.05f64..1.0) {
            let marked = doerfler_mark(&values, theta);
            let total: f64 = values.iter().map(|e| e * e).sum();
            let sum: f64 = marked.iter().map(|&t| values[t] * values[t]).sum();
            if total > 0.0 {
                prop_assert!(sum >= theta * theta * total - 1e-12 * total);
                // removing any element breaks the criterion (up to fp slack)
                for &t in &marked {
                    let without = sum - values[t] * values[t];
                    prop_assert!(without < theta * theta * total + 1e-12 * total);
                }
            } else {
                prop_assert!(marked.is_empty());
            }
        }
    }
}
