//! Formulation-generic minimum-residual algebra.
//!
//! Per element, the trial-to-test map is realized through the Cholesky factor
//! of the test Gram matrix: the local normal-equation block is
//! `A_T = B_T^T G_T^{-1} B_T` with right side `F_T = B_T^T G_T^{-1} l_T`.
//! Summing the blocks gives the SPD global system of the discrete
//! minimum-residual problem; essential trace unknowns are eliminated by
//! substitution during the scatter. The same local data yields the error
//! estimator: `eta_T^2 = r_T^T G_T^{-1} r_T` with `r_T = l_T - B_T x|_T`.

use rayon::prelude::*;
use thiserror::Error;

use crate::form::{Formulation, LocalSystem, RhsFn};
use crate::layout::{Constraint, DofLayout};
use crate::mesh::Mesh;
use crate::solver::{
    sparse_spd_solve, Cholesky, DMat, SolveMethod, SolverError, SparseSymmetric,
};

#[derive(Debug, Error)]
pub enum DpgError {
    #[error("test Gram matrix of element {element} is not SPD ({source}); broken inner product assembly")]
    GramNotSpd {
        element: usize,
        source: SolverError,
    },
    #[error("global solve failed: {0}")]
    Global(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Worker threads for element loops; `None` uses the rayon default.
    /// Results are identical for any choice (deterministic reduction).
    pub threads: Option<usize>,
}

/// Discrete solution as a full coefficient vector over all degrees of
/// freedom, essential ones included.
#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    /// Relative residual of the reduced linear solve.
    pub solver_residual: f64,
}

/// Assembled normal equations after eliminating essential unknowns.
pub struct ReducedSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// Global indices of the free unknowns, in reduced order.
    pub free: Vec<usize>,
    /// Full-length vector holding essential values (zero elsewhere).
    pub essential_values: Vec<f64>,
}

/// Local element contribution to the normal equations.
///
/// `G_T` is factored, never inverted; a factorization failure reports the
/// offending element since it signals a Gram assembly bug.
pub fn schur_local(ls: &LocalSystem) -> Result<(DMat, Vec<f64>), SolverError> {
    let chol = Cholesky::new(&ls.gram)?;
    let ginv_b = chol.solve_mat(&ls.b);
    let mut a = ls.b.matmul_tn(&ginv_b);
    // symmetrize away the solve rounding
    let n = a.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let ginv_l = chol.solve(&ls.load);
    let f = ls.b.matvec_t(&ginv_l);
    Ok((a, f))
}

fn with_pool<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    }
}

/// Builds the reduced global system by a deterministic element-order scatter
/// of the parallel-computed local blocks.
pub fn assemble(
    mesh: &Mesh,
    form: &dyn Formulation,
    layout: &DofLayout,
    f: &RhsFn,
    constraints: &[Constraint],
    threads: Option<usize>,
) -> Result<ReducedSystem, DpgError> {
    let mut essential_values = vec![0.0; layout.n_total];
    let mut is_essential = vec![false; layout.n_total];
    for c in constraints {
        essential_values[c.dof] = c.value;
        is_essential[c.dof] = true;
    }
    let mut reduced_index = vec![usize::MAX; layout.n_total];
    let mut free = Vec::with_capacity(layout.n_total);
    for dof in 0..layout.n_total {
        if !is_essential[dof] {
            reduced_index[dof] = free.len();
            free.push(dof);
        }
    }

    let locals: Vec<Result<(DMat, Vec<f64>, Vec<usize>), DpgError>> =
        with_pool(threads, || {
            (0..mesh.n_triangles())
                .into_par_iter()
                .map(|t| {
                    let ls = form.local_system(mesh, layout, t, f);
                    let (a, fv) = schur_local(&ls).map_err(|source| DpgError::GramNotSpd {
                        element: t,
                        source,
                    })?;
                    Ok((a, fv, ls.dofs))
                })
                .collect()
        });

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for local in locals {
        let (a, fv, dofs) = local?;
        for (il, &gi) in dofs.iter().enumerate() {
            let ri = reduced_index[gi];
            if ri == usize::MAX {
                continue;
            }
            rhs[ri] += fv[il];
            for (jl, &gj) in dofs.iter().enumerate() {
                let rj = reduced_index[gj];
                if rj == usize::MAX {
                    // essential column moves to the right-hand side
                    rhs[ri] -= a[(il, jl)] * essential_values[gj];
                } else if ri <= rj {
                    triplets.push((ri, rj, a[(il, jl)]));
                }
            }
        }
    }

    Ok(ReducedSystem {
        matrix: SparseSymmetric::from_triplets(free.len(), &triplets),
        rhs,
        free,
        essential_values,
    })
}

/// Assembles and solves the minimum-residual system.
pub fn assemble_solve(
    mesh: &Mesh,
    form: &dyn Formulation,
    layout: &DofLayout,
    f: &RhsFn,
    constraints: &[Constraint],
    opts: SolveOptions,
) -> Result<Solution, DpgError> {
    let sys = assemble(mesh, form, layout, f, constraints, opts.threads)?;
    let (x, solver_residual) = sparse_spd_solve(&sys.matrix, &sys.rhs, opts.method)?;
    let mut coeffs = sys.essential_values;
    for (r, &dof) in sys.free.iter().enumerate() {
        coeffs[dof] = x[r];
    }
    Ok(Solution {
        coeffs,
        solver_residual,
    })
}

/// Per-element and total residual estimator of an assembled solution.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub per_element: Vec<f64>,
    pub total: f64,
}

pub fn estimate(
    mesh: &Mesh,
    form: &dyn Formulation,
    layout: &DofLayout,
    f: &RhsFn,
    coeffs: &[f64],
) -> Result<Estimate, DpgError> {
    let squares: Vec<Result<f64, DpgError>> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let ls = form.local_system(mesh, layout, t, f);
            let x_loc: Vec<f64> = ls.dofs.iter().map(|&d| coeffs[d]).collect();
            let bx = ls.b.matvec(&x_loc);
            let r: Vec<f64> = ls.load.iter().zip(&bx).map(|(l, b)| l - b).collect();
            let chol = Cholesky::new(&ls.gram).map_err(|source| DpgError::GramNotSpd {
                element: t,
                source,
            })?;
            let ginv_r = chol.solve(&r);
            Ok(r.iter().zip(&ginv_r).map(|(a, b)| a * b).sum::<f64>())
        })
        .collect();
    let mut per_element = Vec::with_capacity(mesh.n_triangles());
    let mut total_sq = 0.0;
    for s in squares {
        let s = s?.max(0.0);
        total_sq += s;
        per_element.push(s.sqrt());
    }
    Ok(Estimate {
        per_element,
        total: total_sq.sqrt(),
    })
}
