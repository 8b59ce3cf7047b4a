//! Numerical verification of the reference-element projection operator that
//! backs the cubic test-space enrichment of the second-order scheme.
//!
//! On the reference triangle, the operator maps a vector field v to the
//! minimizer v* in P3^2 of the grad-div norm subject to matching the P0^2
//! volume moments of v and its grad-div trace moments against piecewise
//! constants (normal part) and continuous piecewise linears (divergence part)
//! on the boundary. The defining mixed system is square of size
//! 20 + 2 + 3 + 3 = 28; its invertibility is what makes the operator well
//! defined, and is checked here by an explicit singular-value report.

use crate::basis::{edge_hats, ScalarElementBasis};
use crate::mesh::Mesh;
use crate::quadrature::{edge_rule, triangle_rule};
use crate::solver::{lu_solve, sym_eigenvalues, DMat};

/// Vector field on the reference triangle with enough derivatives for the
/// moment and norm computations. Inputs must be polynomial of degree at most
/// eight so all quadratures are exact.
pub struct VectorField<'a> {
    pub value: &'a dyn Fn([f64; 2]) -> [f64; 2],
    pub div: &'a dyn Fn([f64; 2]) -> f64,
    pub grad_div: &'a dyn Fn([f64; 2]) -> [f64; 2],
}

/// Condition report of the assembled mixed system.
#[derive(Clone, Copy, Debug)]
pub struct FortinReport {
    pub size: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition: f64,
    pub max_asymmetry: f64,
    pub nonsingular: bool,
}

impl std::fmt::Display for FortinReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "reference projection system ({0} x {0})", self.size)?;
        writeln!(f, "  sigma_min      = {:.6e}", self.sigma_min)?;
        writeln!(f, "  sigma_max      = {:.6e}", self.sigma_max)?;
        writeln!(f, "  condition      = {:.6e}", self.condition)?;
        writeln!(f, "  max asymmetry  = {:.3e}", self.max_asymmetry)?;
        write!(
            f,
            "  nonsingular    = {}",
            if self.nonsingular { "yes" } else { "no" }
        )
    }
}

/// Assembled saddle-point system of the reference-element projection.
pub struct ReferenceFortinSystem {
    mesh: Mesh,
    basis: ScalarElementBasis,
    matrix: DMat,
}

const N_P3: usize = 20;
const QDEG: usize = 18;

impl ReferenceFortinSystem {
    pub fn new() -> Self {
        let mesh = Mesh::from_triangles(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
        );
        let basis = ScalarElementBasis::new(&mesh, 0, 3);
        debug_assert_eq!(2 * basis.dim(), N_P3);
        let n = N_P3 + 2 + 3 + 3;
        let mut m = DMat::zeros(n, n);

        // volume terms: grad-div inner product block and the P0^2 coupling
        let rule = triangle_rule(QDEG).expect("volume rule");
        let det = mesh.geometry(0).det;
        let pts: Vec<[f64; 2]> = rule.points.iter().map(|&p| mesh.map_point(0, p)).collect();
        let tab = basis.tabulate(&pts);
        let nb = basis.dim();
        let gd = |q: usize, j: usize, c: usize| -> [f64; 2] {
            if c == 0 {
                [tab.hess_xx[(q, j)], tab.hess_xy[(q, j)]]
            } else {
                [tab.hess_xy[(q, j)], tab.hess_yy[(q, j)]]
            }
        };
        for (q, &w) in rule.weights.iter().enumerate() {
            let w = w * det;
            for a in 0..2 {
                for i in 0..nb {
                    let vi = tab.values[(q, i)];
                    let gdi = gd(q, i, a);
                    for b in 0..2 {
                        for j in 0..nb {
                            let mass = if a == b { vi * tab.values[(q, j)] } else { 0.0 };
                            let gdj = gd(q, j, b);
                            m[(a * nb + i, b * nb + j)] +=
                                w * (mass + gdi[0] * gdj[0] + gdi[1] * gdj[1]);
                        }
                    }
                    // (w, dv) coupling with the constant fields e_x, e_y
                    m[(a * nb + i, N_P3 + a)] += w * vi;
                    m[(N_P3 + a, a * nb + i)] += w * vi;
                }
            }
        }

        // boundary terms: <(g_n, g_div), dv> = int g_n (div dv) - int g_div (dv . n)
        let geo = mesh.geometry(0);
        let tri = mesh.triangles[0];
        let erule = edge_rule(QDEG);
        for li in 0..3 {
            let vs = [tri[(li + 1) % 3], tri[(li + 2) % 3]];
            let (pa, pb) = (mesh.vertices[vs[0]], mesh.vertices[vs[1]]);
            let len = geo.edge_lengths[li];
            let nrm = geo.normals[li];
            for (&[s, _], &w) in erule.points.iter().zip(&erule.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let vals = basis.eval(x);
                let grads = basis.eval_grad(x);
                let wl = w * len;
                for c in 0..2 {
                    for j in 0..nb {
                        let row = c * nb + j;
                        // edge-constant normal part against div dv
                        let dv_div = grads[j][c];
                        m[(row, N_P3 + 2 + li)] += wl * dv_div;
                        m[(N_P3 + 2 + li, row)] += wl * dv_div;
                        // vertex-hat divergence part against dv . n
                        let vn = vals[j] * nrm[c];
                        let hats = edge_hats(s);
                        for (local, hat) in [(li + 1) % 3, (li + 2) % 3].into_iter().zip(hats) {
                            m[(row, N_P3 + 5 + local)] -= wl * hat * vn;
                            m[(N_P3 + 5 + local, row)] -= wl * hat * vn;
                        }
                    }
                }
            }
        }

        Self {
            mesh,
            basis,
            matrix: m,
        }
    }

    pub fn matrix(&self) -> &DMat {
        &self.matrix
    }

    /// Singular values through the symmetric eigendecomposition, with the
    /// nonsingularity acceptance `sigma_min > 1e-10 sigma_max`.
    pub fn check(&self) -> FortinReport {
        let eigs = sym_eigenvalues(&self.matrix);
        let mut sigmas: Vec<f64> = eigs.iter().map(|e| e.abs()).collect();
        sigmas.sort_by(f64::total_cmp);
        let sigma_min = sigmas[0];
        let sigma_max = *sigmas.last().unwrap();
        FortinReport {
            size: self.matrix.rows(),
            sigma_min,
            sigma_max,
            condition: sigma_max / sigma_min,
            max_asymmetry: self.matrix.max_abs_asymmetry(),
            nonsingular: sigma_min > 1e-10 * sigma_max,
        }
    }

    /// The eight constraint moments of a field: P0^2 volume moments, then
    /// per-edge divergence moments, then vertex-hat normal moments.
    pub fn moments(&self, v: &VectorField) -> [f64; 8] {
        let mut mom = [0.0f64; 8];
        let rule = triangle_rule(QDEG).expect("volume rule");
        let det = self.mesh.geometry(0).det;
        for (q, &p) in rule.points.iter().enumerate() {
            let x = self.mesh.map_point(0, p);
            let val = (v.value)(x);
            mom[0] += rule.weights[q] * det * val[0];
            mom[1] += rule.weights[q] * det * val[1];
        }
        let geo = self.mesh.geometry(0);
        let tri = self.mesh.triangles[0];
        let erule = edge_rule(QDEG);
        for li in 0..3 {
            let vs = [tri[(li + 1) % 3], tri[(li + 2) % 3]];
            let (pa, pb) = (self.mesh.vertices[vs[0]], self.mesh.vertices[vs[1]]);
            let len = geo.edge_lengths[li];
            let nrm = geo.normals[li];
            for (&[s, _], &w) in erule.points.iter().zip(&erule.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let wl = w * len;
                mom[2 + li] += wl * (v.div)(x);
                let val = (v.value)(x);
                let vn = val[0] * nrm[0] + val[1] * nrm[1];
                let hats = edge_hats(s);
                for (local, hat) in [(li + 1) % 3, (li + 2) % 3].into_iter().zip(hats) {
                    mom[5 + local] -= wl * hat * vn;
                }
            }
        }
        mom
    }

    /// Applies the projection, returning the coefficients of v* in the
    /// orthonormal P3 basis (x-component block, then y-component block).
    pub fn apply(&self, v: &VectorField) -> Vec<f64> {
        let mom = self.moments(v);
        let mut rhs = vec![0.0; self.matrix.rows()];
        rhs[N_P3..].copy_from_slice(&mom);
        let sol = lu_solve(&self.matrix, &rhs).expect("reference system is nonsingular");
        sol[..N_P3].to_vec()
    }

    /// Same constraint moments evaluated for a coefficient field in P3^2.
    pub fn coefficient_moments(&self, coeffs: &[f64]) -> [f64; 8] {
        let nb = self.basis.dim();
        let value = |x: [f64; 2]| -> [f64; 2] {
            let vals = self.basis.eval(x);
            let mut out = [0.0; 2];
            for c in 0..2 {
                for i in 0..nb {
                    out[c] += coeffs[c * nb + i] * vals[i];
                }
            }
            out
        };
        let div = |x: [f64; 2]| -> f64 {
            let grads = self.basis.eval_grad(x);
            (0..nb)
                .map(|i| coeffs[i] * grads[i][0] + coeffs[nb + i] * grads[i][1])
                .sum()
        };
        let grad_div = |_: [f64; 2]| [0.0, 0.0]; // not needed for moments
        self.moments(&VectorField {
            value: &value,
            div: &div,
            grad_div: &grad_div,
        })
    }

    /// Grad-div norm of a coefficient field in P3^2.
    pub fn coefficient_norm(&self, coeffs: &[f64]) -> f64 {
        let nb = self.basis.dim();
        let rule = triangle_rule(QDEG).expect("volume rule");
        let det = self.mesh.geometry(0).det;
        let pts: Vec<[f64; 2]> = rule
            .points
            .iter()
            .map(|&p| self.mesh.map_point(0, p))
            .collect();
        let tab = self.basis.tabulate(&pts);
        let mut sq = 0.0;
        for (q, &w) in rule.weights.iter().enumerate() {
            let w = w * det;
            let mut val = [0.0f64; 2];
            let mut gd = [0.0f64; 2];
            for i in 0..nb {
                let (cx, cy) = (coeffs[i], coeffs[nb + i]);
                val[0] += cx * tab.values[(q, i)];
                val[1] += cy * tab.values[(q, i)];
                gd[0] += cx * tab.hess_xx[(q, i)] + cy * tab.hess_xy[(q, i)];
                gd[1] += cx * tab.hess_xy[(q, i)] + cy * tab.hess_yy[(q, i)];
            }
            sq += w * (val[0] * val[0] + val[1] * val[1] + gd[0] * gd[0] + gd[1] * gd[1]);
        }
        sq.sqrt()
    }

    /// Value, divergence, and grad-div of a P3^2 coefficient field at `x`.
    pub fn eval_coefficients(&self, coeffs: &[f64], x: [f64; 2]) -> ([f64; 2], f64, [f64; 2]) {
        let nb = self.basis.dim();
        let tab = self.basis.tabulate(&[x]);
        let mut val = [0.0f64; 2];
        let mut div = 0.0f64;
        let mut gd = [0.0f64; 2];
        for i in 0..nb {
            let (cx, cy) = (coeffs[i], coeffs[nb + i]);
            val[0] += cx * tab.values[(0, i)];
            val[1] += cy * tab.values[(0, i)];
            div += cx * tab.grad_x[(0, i)] + cy * tab.grad_y[(0, i)];
            gd[0] += cx * tab.hess_xx[(0, i)] + cy * tab.hess_xy[(0, i)];
            gd[1] += cx * tab.hess_xy[(0, i)] + cy * tab.hess_yy[(0, i)];
        }
        (val, div, gd)
    }

    /// Grad-div norm of an arbitrary input field.
    pub fn field_norm(&self, v: &VectorField) -> f64 {
        let rule = triangle_rule(QDEG).expect("volume rule");
        let det = self.mesh.geometry(0).det;
        let mut sq = 0.0;
        for (q, &p) in rule.points.iter().enumerate() {
            let x = self.mesh.map_point(0, p);
            let val = (v.value)(x);
            let gd = (v.grad_div)(x);
            sq += rule.weights[q]
                * det
                * (val[0] * val[0] + val[1] * val[1] + gd[0] * gd[0] + gd[1] * gd[1]);
        }
        sq.sqrt()
    }
}

impl Default for ReferenceFortinSystem {
    fn default() -> Self {
        Self::new()
    }
}

/// Assembles the system and reports its conditioning; the entry point used
/// by the test suite and the `fortin_report` example.
pub fn build_and_check() -> FortinReport {
    ReferenceFortinSystem::new().check()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_symmetric_and_28x28() {
        let sys = ReferenceFortinSystem::new();
        assert_eq!(sys.matrix().rows(), 28);
        assert_eq!(sys.matrix().cols(), 28);
        assert!(sys.matrix().max_abs_asymmetry() < 1e-13);
    }

    #[test]
    fn system_is_nonsingular() {
        let report = build_and_check();
        assert!(report.sigma_min > 0.0);
        assert!(report.nonsingular, "{report}");
    }

    #[test]
    fn projection_is_idempotent_on_its_range()  {
        let sys = ReferenceFortinSystem::new();
        let value = |x: [f64; 2]| {
            [
                x[0] * x[0] * x[1] + 0.5 * x[1],
                x[0] - x[1] * x[1] * x[1] + 2.0,
            ]
        };
        let div = |x: [f64; 2]| 2.0 * x[0] * x[1] - 3.0 * x[1] * x[1];
        let grad_div = |x: [f64; 2]| [2.0 * x[1], 2.0 * x[0] - 6.0 * x[1]];
        let coeffs = sys.apply(&VectorField {
            value: &value,
            div: &div,
            grad_div: &grad_div,
        });
        // moments must be preserved
        let want = sys.moments(&VectorField {
            value: &value,
            div: &div,
            grad_div: &grad_div,
        });
        let got = sys.coefficient_moments(&coeffs);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-11, "{got:?} vs {want:?}");
        }
        // applying the operator to the output reproduces it
        let value2 = |x: [f64; 2]| sys.eval_coefficients(&coeffs, x).0;
        let div2 = |x: [f64; 2]| sys.eval_coefficients(&coeffs, x).1;
        let gd2 = |x: [f64; 2]| sys.eval_coefficients(&coeffs, x).2;
        let again = sys.apply(&VectorField {
            value: &value2,
            div: &div2,
            grad_div: &gd2,
        });
        let scale = coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
        for (a, b) in again.iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-11 * scale);
        }
    }
}
