//! Second-order ultraweak formulation.
//!
//! Field variables per element: u and w = -grad div u, vectors of degree p,
//! satisfying
//!
//! ```text
//! -grad div w + u = f,   grad div u + w = 0
//! ```
//!
//! with boundary conditions on u . n and div u. Each field carries a paired
//! skeleton trace (normal component as Legendre edge modes, divergence as a
//! continuous trace of degree p + 1); the u pair is essential on the
//! boundary. Both test variables are vectors of degree p + 3 in the broken
//! grad-div inner product (v, dv) + (grad div v, grad div dv). The trace
//! pairing expands through integration by parts of grad div as
//!
//! ```text
//! <(g_n, g_div), tau> = int g_n (div tau) ds - int g_div (tau . n) ds
//! ```
//!
//! with the element orientation sign on the single-valued g_n.
//!
//! The experiments run the lowest order p = 0, the only case whose enriched
//! test space (cubics) is backed by the reference projection operator checked
//! in [`crate::fortin`]; higher p is exposed for consistency testing.

use crate::basis::{edge_bubble, edge_hats, edge_mode, poly_dim, ScalarElementBasis};
use crate::layout::{
    edge_continuous_coeffs, edge_legendre_coeffs, BcData, DofLayout, TraceKind,
};
use crate::mesh::Mesh;
use crate::solver::DMat;

use super::{
    edge_quads, volume_quad, ExactField, Formulation, LocalSystem, RhsFn, VariableSpec,
    VectorOp, VectorTestBasis,
};

const VARIABLES: [VariableSpec; 2] = [
    VariableSpec {
        name: "u",
        components: 2,
        exact: ExactField::U,
    },
    VariableSpec {
        name: "w",
        components: 2,
        exact: ExactField::NegGradDivU,
    },
];

#[derive(Clone, Copy, Debug)]
pub struct SecondOrder {
    p: usize,
}

impl SecondOrder {
    pub fn new(p: usize) -> Self {
        assert!(p <= 3, "field degree {p} not supported");
        Self { p }
    }

    /// Lowest-order scheme used by the experiments.
    pub fn lowest() -> Self {
        Self::new(0)
    }

    pub fn quad_degree(&self) -> usize {
        2 * (self.p + 3 + 2)
    }

    /// Local test-space dimension.
    pub fn n_test(&self) -> usize {
        4 * poly_dim(self.p + 3)
    }

    /// Coefficient vector of an exact tuple (u, w) with w = -grad div u.
    /// The divergence callbacks feed the continuous trace components.
    pub fn inject_exact(
        &self,
        mesh: &Mesh,
        layout: &DofLayout,
        u: &dyn Fn([f64; 2]) -> [f64; 2],
        div_u: &dyn Fn([f64; 2]) -> f64,
        w: &dyn Fn([f64; 2]) -> [f64; 2],
        div_w: &dyn Fn([f64; 2]) -> f64,
    ) -> Vec<f64> {
        let p = self.p;
        let np = poly_dim(p);
        let qdeg = self.quad_degree();
        let mut coeffs = vec![0.0; layout.n_total];

        for t in 0..mesh.n_triangles() {
            let basis = ScalarElementBasis::new(mesh, t, p);
            let vol = volume_quad(mesh, t, qdeg);
            let tab = basis.tabulate(&vol.pts);
            let mut moments = [vec![0.0; np], vec![0.0; np], vec![0.0; np], vec![0.0; np]];
            for (q, &x) in vol.pts.iter().enumerate() {
                let wq = vol.wts[q];
                let uv = u(x);
                let wv = w(x);
                let vals = [uv[0], uv[1], wv[0], wv[1]];
                for i in 0..np {
                    let b = tab.values[(q, i)];
                    for (m, v) in moments.iter_mut().zip(vals) {
                        m[i] += wq * v * b;
                    }
                }
            }
            for (slot, m) in moments.iter().enumerate() {
                for i in 0..np {
                    coeffs[layout.field_dof(t, slot * np + i)] = m[i];
                }
            }
        }

        let normal_of = |e: usize| {
            let (a, b) = mesh.edge_points(e);
            let len = mesh.edge_length(e);
            [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
        };
        for e in 0..mesh.n_edges() {
            let n = normal_of(e);
            for (fi, func) in [(0usize, u as &dyn Fn([f64; 2]) -> [f64; 2]), (2, w)] {
                let fam = &layout.families[fi];
                let c = edge_legendre_coeffs(mesh, e, p + 1, qdeg, &|x, _| {
                    let v = func(x);
                    v[0] * n[0] + v[1] * n[1]
                });
                for (k, ck) in c.iter().enumerate() {
                    coeffs[fam.edge_dof(e, k)] = *ck;
                }
            }
            for (fi, func) in [(1usize, div_u as &dyn Fn([f64; 2]) -> f64), (3, div_w)] {
                let fam = &layout.families[fi];
                let (ga, gb, bub) = edge_continuous_coeffs(mesh, e, p, qdeg, func);
                let [va, vb] = mesh.edges[e];
                coeffs[fam.vertex_dof(va)] = ga;
                coeffs[fam.vertex_dof(vb)] = gb;
                for (k, bk) in bub.iter().enumerate() {
                    coeffs[fam.bubble_dof(mesh, e, k + 1)] = *bk;
                }
            }
        }
        coeffs
    }

    /// Local test coefficients of a broken test pair (v, tau) given by global
    /// callbacks; exact for polynomials of degree at most p + 3.
    pub fn represent_test(
        &self,
        mesh: &Mesh,
        t: usize,
        v: &dyn Fn([f64; 2]) -> [f64; 2],
        tau: &dyn Fn([f64; 2]) -> [f64; 2],
    ) -> Vec<f64> {
        let bt = VectorTestBasis::new(mesh, t, self.p + 3, VectorOp::GradDiv);
        let nt = bt.dim();
        let vol = volume_quad(mesh, t, self.quad_degree());
        let tt = bt.tabulate(&vol.pts);
        let mut out = vec![0.0; 2 * nt];
        for (q, &x) in vol.pts.iter().enumerate() {
            let w = vol.wts[q];
            let (av, at) = (v(x), tau(x));
            for j in 0..nt {
                out[j] += w * (av[0] * tt.vx[(q, j)] + av[1] * tt.vy[(q, j)]);
                out[nt + j] += w * (at[0] * tt.vx[(q, j)] + at[1] * tt.vy[(q, j)]);
            }
        }
        out
    }
}

impl Formulation for SecondOrder {
    fn name(&self) -> &'static str {
        "second"
    }

    fn degree(&self) -> usize {
        self.p
    }

    fn layout(&self, mesh: &Mesh) -> DofLayout {
        let p = self.p;
        DofLayout::new(
            mesh,
            4 * poly_dim(p),
            &[
                (
                    TraceKind::EdgeModes { modes: p + 1 },
                    Some(BcData::NormalComponent),
                ),
                (
                    TraceKind::Continuous { bubbles: p },
                    Some(BcData::DivergenceTrace),
                ),
                (TraceKind::EdgeModes { modes: p + 1 }, None),
                (TraceKind::Continuous { bubbles: p }, None),
            ],
        )
    }

    fn variables(&self) -> &'static [VariableSpec] {
        &VARIABLES
    }

    fn local_system(&self, mesh: &Mesh, layout: &DofLayout, t: usize, f: &RhsFn) -> LocalSystem {
        let p = self.p;
        let np = poly_dim(p);
        let nt = 2 * poly_dim(p + 3);
        let n_test = 2 * nt;
        let (o_v, o_tau) = (0, nt);

        let dofs = layout.element_dofs(mesh, t);
        let n_trial = dofs.len();
        let qdeg = self.quad_degree();

        let bp = ScalarElementBasis::new(mesh, t, p);
        let bt = VectorTestBasis::new(mesh, t, p + 3, VectorOp::GradDiv);
        let vol = volume_quad(mesh, t, qdeg);
        let tp = bp.tabulate(&vol.pts);
        let tt = bt.tabulate(&vol.pts);

        let mut gram = DMat::zeros(n_test, n_test);
        let mut b = DMat::zeros(n_test, n_trial);
        let mut load = vec![0.0; n_test];

        for q in 0..vol.pts.len() {
            let w = vol.wts[q];
            for i in 0..nt {
                for j in i..nt {
                    let val = w
                        * (tt.vx[(q, i)] * tt.vx[(q, j)]
                            + tt.vy[(q, i)] * tt.vy[(q, j)]
                            + tt.gdx[(q, i)] * tt.gdx[(q, j)]
                            + tt.gdy[(q, i)] * tt.gdy[(q, j)]);
                    gram[(o_v + i, o_v + j)] += val;
                    gram[(o_tau + i, o_tau + j)] += val;
                    if i != j {
                        gram[(o_v + j, o_v + i)] += val;
                        gram[(o_tau + j, o_tau + i)] += val;
                    }
                }
            }

            for i in 0..np {
                let psi = w * tp.values[(q, i)];
                for a in 0..2 {
                    let va = |j: usize| {
                        if a == 0 {
                            tt.vx[(q, j)]
                        } else {
                            tt.vy[(q, j)]
                        }
                    };
                    let gda = |j: usize| {
                        if a == 0 {
                            tt.gdx[(q, j)]
                        } else {
                            tt.gdy[(q, j)]
                        }
                    };
                    // (u, v - grad div tau)
                    let col = a * np + i;
                    for j in 0..nt {
                        b[(o_v + j, col)] += psi * va(j);
                        b[(o_tau + j, col)] -= psi * gda(j);
                    }
                    // -(w, tau + grad div v)
                    let col = 2 * np + a * np + i;
                    for j in 0..nt {
                        b[(o_tau + j, col)] -= psi * va(j);
                        b[(o_v + j, col)] -= psi * gda(j);
                    }
                }
            }

            let fv = f(vol.pts[q]);
            for j in 0..nt {
                load[o_v + j] += w * (fv[0] * tt.vx[(q, j)] + fv[1] * tt.vy[(q, j)]);
            }
        }

        // trace columns: <(g_n, g_div), z> = int g_n (div z) - int g_div (z . n)
        let edges = edge_quads(mesh, t, qdeg);
        let n_fields = 4 * np;
        let modes = p + 1;
        let c_uhat_n = n_fields;
        let c_uhat_div = c_uhat_n + 3 * modes;
        let c_what_n = c_uhat_div + 3 + 3 * p;
        let c_what_div = c_what_n + 3 * modes;
        debug_assert_eq!(c_what_div + 3 + 3 * p, n_trial);

        for (li, eq) in edges.iter().enumerate() {
            let et = bt.tabulate(&eq.pts);
            for (q, (&sq, &wq)) in eq.s.iter().zip(&eq.w).enumerate() {
                let wl = wq * eq.len;
                for k in 0..modes {
                    let m = wl * eq.sign * edge_mode(k, sq);
                    for j in 0..nt {
                        // u_hat_n pairs div tau, w_hat_n pairs div v
                        b[(o_tau + j, c_uhat_n + li * modes + k)] += m * et.div[(q, j)];
                        b[(o_v + j, c_what_n + li * modes + k)] += m * et.div[(q, j)];
                    }
                }
                let hats = edge_hats(sq);
                for (end, hat) in eq.endpoint_slots.iter().zip(hats) {
                    let m = wl * hat;
                    for j in 0..nt {
                        let vn = et.vx[(q, j)] * eq.normal[0] + et.vy[(q, j)] * eq.normal[1];
                        b[(o_tau + j, c_uhat_div + end)] -= m * vn;
                        b[(o_v + j, c_what_div + end)] -= m * vn;
                    }
                }
                for k in 1..=p {
                    let m = wl * edge_bubble(k, sq);
                    let col_u = c_uhat_div + 3 + li * p + (k - 1);
                    let col_w = c_what_div + 3 + li * p + (k - 1);
                    for j in 0..nt {
                        let vn = et.vx[(q, j)] * eq.normal[0] + et.vy[(q, j)] * eq.normal[1];
                        b[(o_tau + j, col_u)] -= m * vn;
                        b[(o_v + j, col_w)] -= m * vn;
                    }
                }
            }
        }

        LocalSystem {
            gram,
            b,
            load,
            dofs,
        }
    }

    fn eval_fields(
        &self,
        mesh: &Mesh,
        layout: &DofLayout,
        coeffs: &[f64],
        t: usize,
        points: &[[f64; 2]],
    ) -> Vec<DMat> {
        let np = poly_dim(self.p);
        let basis = ScalarElementBasis::new(mesh, t, self.p);
        let tab = basis.tabulate(points);
        let mut out = Vec::with_capacity(2);
        let mut slot = 0usize;
        for var in &VARIABLES {
            let mut vals = DMat::zeros(points.len(), var.components);
            for c in 0..var.components {
                for i in 0..np {
                    let coeff = coeffs[layout.field_dof(t, (slot + c) * np + i)];
                    for q in 0..points.len() {
                        vals[(q, c)] += coeff * tab.values[(q, i)];
                    }
                }
            }
            slot += var.components;
            out.push(vals);
        }
        out
    }
}
