//! Polynomial bases for broken element spaces and skeleton traces.
//!
//! Element bases are built in physical coordinates from scaled monomials
//! `((x - x_c)/h_T)^a ((y - y_c)/h_T)^b`, orthonormalized in the element L2
//! inner product. Working in the physical frame keeps grad-div compositions
//! free of chain-rule bookkeeping, and the scaling keeps the monomial Gram
//! matrices well conditioned at the degrees used here.

use crate::mesh::Mesh;
use crate::quadrature::{self, shifted_legendre};
use crate::solver::{Cholesky, DMat};

/// Dimension of the bivariate polynomial space of total degree `p`.
pub fn poly_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Monomial exponents up to total degree `p` in graded order: 1, x, y, x^2, xy, y^2, ...
fn monomial_exponents(p: usize) -> Vec<(u32, u32)> {
    let mut exps = Vec::with_capacity(poly_dim(p));
    for d in 0..=p as u32 {
        for b in 0..=d {
            exps.push((d - b, b));
        }
    }
    exps
}

/// L2-orthonormal polynomial basis of one element.
#[derive(Clone, Debug)]
pub struct ScalarElementBasis {
    degree: usize,
    dim: usize,
    center: [f64; 2],
    scale: f64,
    exps: Vec<(u32, u32)>,
    /// Column j holds the monomial coefficients of orthonormal function j.
    coeff: DMat,
}

/// Tabulated basis data at a set of points (rows: points, columns: functions).
pub struct BasisTable {
    pub values: DMat,
    pub grad_x: DMat,
    pub grad_y: DMat,
    pub hess_xx: DMat,
    pub hess_xy: DMat,
    pub hess_yy: DMat,
}

impl ScalarElementBasis {
    pub fn new(mesh: &Mesh, t: usize, degree: usize) -> Self {
        let geo = mesh.geometry(t);
        let rule = quadrature::triangle_rule(2 * degree).expect("orthonormalization rule");
        let exps = monomial_exponents(degree);
        let dim = exps.len();

        let mut basis = Self {
            degree,
            dim,
            center: geo.centroid,
            scale: geo.diameter,
            exps,
            coeff: DMat::identity(dim),
        };

        // Gram matrix of the raw monomials under exact quadrature
        let mut gram = DMat::zeros(dim, dim);
        for (q, &pref) in rule.points.iter().enumerate() {
            let x = mesh.map_point(t, pref);
            let w = rule.weights[q] * geo.det;
            let m = basis.monomial_values(x);
            for i in 0..dim {
                for j in i..dim {
                    gram[(i, j)] += w * m[i] * m[j];
                }
            }
        }
        for i in 0..dim {
            for j in 0..i {
                gram[(i, j)] = gram[(j, i)];
            }
        }

        // G = L L^T; columns of C = L^{-T} orthonormalize the monomials
        let chol = Cholesky::new(&gram).expect("monomial Gram must be SPD");
        let l = chol.factor().clone();
        let mut coeff = DMat::zeros(dim, dim);
        for j in 0..dim {
            // solve L^T c = e_j by back substitution
            let mut c = vec![0.0; dim];
            c[j] = 1.0;
            for i in (0..dim).rev() {
                for k in (i + 1)..dim {
                    c[i] -= l[(k, i)] * c[k];
                }
                c[i] /= l[(i, i)];
            }
            for i in 0..dim {
                coeff[(i, j)] = c[i];
            }
        }
        basis.coeff = coeff;
        basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn local(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.center[0]) / self.scale,
            (p[1] - self.center[1]) / self.scale,
        ]
    }

    fn monomial_values(&self, p: [f64; 2]) -> Vec<f64> {
        let [x, y] = self.local(p);
        self.exps
            .iter()
            .map(|&(a, b)| x.powi(a as i32) * y.powi(b as i32))
            .collect()
    }

    /// Values of all basis functions at one physical point.
    pub fn eval(&self, p: [f64; 2]) -> Vec<f64> {
        let m = self.monomial_values(p);
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.coeff[(i, j)] * m[i]).sum())
            .collect()
    }

    /// Gradients of all basis functions at one physical point.
    pub fn eval_grad(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let [x, y] = self.local(p);
        let pow = |v: f64, e: i32| if e < 0 { 0.0 } else { v.powi(e) };
        let mut grads = vec![[0.0; 2]; self.dim];
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            let (af, bf) = (a as f64, b as f64);
            let dx = af * pow(x, a as i32 - 1) * pow(y, b as i32) / self.scale;
            let dy = bf * pow(x, a as i32) * pow(y, b as i32 - 1) / self.scale;
            for j in 0..self.dim {
                let c = self.coeff[(i, j)];
                grads[j][0] += c * dx;
                grads[j][1] += c * dy;
            }
        }
        grads
    }

    /// Tabulates values, first and second derivatives at the given points.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> BasisTable {
        let n = points.len();
        let mut values = DMat::zeros(n, self.dim);
        let mut grad_x = DMat::zeros(n, self.dim);
        let mut grad_y = DMat::zeros(n, self.dim);
        let mut hess_xx = DMat::zeros(n, self.dim);
        let mut hess_xy = DMat::zeros(n, self.dim);
        let mut hess_yy = DMat::zeros(n, self.dim);
        let s = self.scale;
        let pow = |v: f64, e: i32| if e < 0 { 0.0 } else { v.powi(e) };
        for (q, &p) in points.iter().enumerate() {
            let [x, y] = self.local(p);
            for (i, &(a, b)) in self.exps.iter().enumerate() {
                let (ai, bi) = (a as i32, b as i32);
                let (af, bf) = (a as f64, b as f64);
                let v = pow(x, ai) * pow(y, bi);
                let dx = af * pow(x, ai - 1) * pow(y, bi) / s;
                let dy = bf * pow(x, ai) * pow(y, bi - 1) / s;
                let dxx = af * (af - 1.0) * pow(x, ai - 2) * pow(y, bi) / (s * s);
                let dxy = af * bf * pow(x, ai - 1) * pow(y, bi - 1) / (s * s);
                let dyy = bf * (bf - 1.0) * pow(x, ai) * pow(y, bi - 2) / (s * s);
                for j in 0..self.dim {
                    let c = self.coeff[(i, j)];
                    values[(q, j)] += c * v;
                    grad_x[(q, j)] += c * dx;
                    grad_y[(q, j)] += c * dy;
                    hess_xx[(q, j)] += c * dxx;
                    hess_xy[(q, j)] += c * dxy;
                    hess_yy[(q, j)] += c * dyy;
                }
            }
        }
        BasisTable {
            values,
            grad_x,
            grad_y,
            hess_xx,
            hess_xy,
            hess_yy,
        }
    }
}

/// H^{-1/2}-type edge mode: Legendre polynomial `P_k` in the global edge parameter.
pub fn edge_mode(k: usize, s: f64) -> f64 {
    shifted_legendre(k, s)
}

/// Endpoint hat values `(1 - s, s)` of the continuous trace space on one edge.
pub fn edge_hats(s: f64) -> [f64; 2] {
    [1.0 - s, s]
}

/// Interior edge bubble k (1-based) of the continuous trace space; vanishes at
/// both endpoints and has unit value at the midpoint for k = 1.
pub fn edge_bubble(k: usize, s: f64) -> f64 {
    debug_assert!(k >= 1);
    4.0 * s * (1.0 - s) * shifted_legendre(k - 1, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_unit_square;
    use crate::mesh::Mesh;
    use crate::quadrature::{edge_rule, triangle_rule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_like() -> Mesh {
        Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]])
    }

    #[test]
    fn p0_is_normalized_constant() {
        let mesh = reference_like();
        let basis = ScalarElementBasis::new(&mesh, 0, 0);
        let v = basis.eval([0.3, 0.3]);
        assert_eq!(v.len(), 1);
        let area: f64 = 0.5;
        assert!((v[0] - 1.0 / area.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn orthonormal_under_exact_quadrature() {
        let mesh = make_unit_square(2);
        for t in [0usize, 3, 5] {
            for degree in [1usize, 2, 3] {
                let basis = ScalarElementBasis::new(&mesh, t, degree);
                let rule = triangle_rule(2 * degree).unwrap();
                let geo = mesh.geometry(t);
                let n = basis.dim();
                let mut gram = DMat::zeros(n, n);
                for (q, &pref) in rule.points.iter().enumerate() {
                    let x = mesh.map_point(t, pref);
                    let w = rule.weights[q] * geo.det;
                    let v = basis.eval(x);
                    for i in 0..n {
                        for j in 0..n {
                            gram[(i, j)] += w * v[i] * v[j];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (gram[(i, j)] - expect).abs() < 1e-12,
                            "t={t} p={degree} ({i},{j}): {}",
                            gram[(i, j)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mesh = reference_like();
        let basis = ScalarElementBasis::new(&mesh, 0, 2);
        let h = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (a, b) = (rng.random_range(0.05..0.9), rng.random_range(0.05..0.9));
            if a + b > 0.95 {
                continue;
            }
            let p = [a, b * (1.0 - a)];
            let grads = basis.eval_grad(p);
            let vxp = basis.eval([p[0] + h, p[1]]);
            let vxm = basis.eval([p[0] - h, p[1]]);
            let vyp = basis.eval([p[0], p[1] + h]);
            let vym = basis.eval([p[0], p[1] - h]);
            for j in 0..basis.dim() {
                let fdx = (vxp[j] - vxm[j]) / (2.0 * h);
                let fdy = (vyp[j] - vym[j]) / (2.0 * h);
                let scale = 1.0 + grads[j][0].abs().max(grads[j][1].abs());
                assert!((grads[j][0] - fdx).abs() < 1e-6 * scale);
                assert!((grads[j][1] - fdy).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn hessian_grad_div_matches_finite_differences() {
        // grad(div(phi e_x)) = (phi_xx, phi_xy): check the analytic Hessian
        let mesh = make_unit_square(1);
        let basis = ScalarElementBasis::new(&mesh, 1, 3);
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<[f64; 2]> = (0..10)
            .map(|_| {
                let a = rng.random_range(0.1..0.8);
                let b = rng.random_range(0.1..(0.95 - a));
                mesh.map_point(1, [a, b])
            })
            .collect();
        let table = basis.tabulate(&pts);
        for (q, &p) in pts.iter().enumerate() {
            let gxp = basis.eval_grad([p[0] + h, p[1]]);
            let gxm = basis.eval_grad([p[0] - h, p[1]]);
            let gyp = basis.eval_grad([p[0], p[1] + h]);
            let gym = basis.eval_grad([p[0], p[1] - h]);
            for j in 0..basis.dim() {
                let fd_xx = (gxp[j][0] - gxm[j][0]) / (2.0 * h);
                let fd_xy = (gyp[j][0] - gym[j][0]) / (2.0 * h);
                let fd_yy = (gyp[j][1] - gym[j][1]) / (2.0 * h);
                let scale = 1.0 + fd_xx.abs().max(fd_xy.abs()).max(fd_yy.abs());
                assert!((table.hess_xx[(q, j)] - fd_xx).abs() < 1e-5 * scale);
                assert!((table.hess_xy[(q, j)] - fd_xy).abs() < 1e-5 * scale);
                assert!((table.hess_yy[(q, j)] - fd_yy).abs() < 1e-5 * scale);
            }
        }
    }

    #[test]
    fn divergence_theorem_on_element() {
        // int_T d_x psi = int_dT psi n_x for every basis function
        let mesh = make_unit_square(2);
        let t = 4;
        let geo = mesh.geometry(t);
        let basis = ScalarElementBasis::new(&mesh, t, 2);
        let vol_rule = triangle_rule(4).unwrap();
        let edge_q = edge_rule(8);
        for j in 0..basis.dim() {
            let vol: f64 = vol_rule
                .points
                .iter()
                .zip(&vol_rule.weights)
                .map(|(&pref, &w)| {
                    w * geo.det * basis.eval_grad(mesh.map_point(t, pref))[j][0]
                })
                .sum();
            let mut surf = 0.0;
            let tri = mesh.triangles[t];
            for i in 0..3 {
                let u = mesh.vertices[tri[(i + 1) % 3]];
                let w = mesh.vertices[tri[(i + 2) % 3]];
                let len = geo.edge_lengths[i];
                let nx = geo.normals[i][0];
                surf += edge_q.integrate(|[s, _]| {
                    let p = [u[0] + s * (w[0] - u[0]), u[1] + s * (w[1] - u[1])];
                    basis.eval(p)[j] * nx
                }) * len;
            }
            assert!((vol - surf).abs() < 1e-11, "function {j}: {vol} vs {surf}");
        }
    }

    #[test]
    fn trace_functions_on_edges() {
        // P0 edge mode is the constant 1; hats interpolate the endpoints;
        // bubbles vanish there
        assert_eq!(edge_mode(0, 0.3), 1.0);
        assert_eq!(edge_hats(0.0), [1.0, 0.0]);
        assert_eq!(edge_hats(1.0), [0.0, 1.0]);
        assert!(edge_bubble(1, 0.0).abs() < 1e-15);
        assert!(edge_bubble(1, 1.0).abs() < 1e-15);
        assert!((edge_bubble(1, 0.5) - 1.0).abs() < 1e-15);
        // partition of unity of the endpoint hats along the edge
        for s in [0.1, 0.35, 0.62, 0.9] {
            let [h0, h1] = edge_hats(s);
            assert!((h0 + h1 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_modes_orthogonal_with_length_scaling() {
        let rule = edge_rule(10);
        let len = 0.37;
        for j in 0..4usize {
            for k in 0..4usize {
                let v = len * rule.integrate(|[s, _]| edge_mode(j, s) * edge_mode(k, s));
                let exact = if j == k {
                    len / (2 * k + 1) as f64
                } else {
                    0.0
                };
                assert!((v - exact).abs() < 1e-14);
            }
        }
    }
}
