//! First-order ultraweak formulation.
//!
//! Field variables per element: u1 (vector), u2 (scalar), u3 (vector),
//! u4 (scalar), all of degree p, satisfying the first-order system
//!
//! ```text
//! grad u4 + u1 = f,   div u3 - u4 = 0,   grad u2 - u3 = 0,   div u1 - u2 = 0
//! ```
//!
//! with boundary conditions on u1 . n and u2. Skeleton traces: normal traces
//! of u1 and u3 (Legendre modes per edge, the u1 family essential on the
//! boundary) and point traces of u2 and u4 (continuous of degree p + 1, the
//! u2 family essential). Test variables v1, v3 are vectors of degree p + 2 in
//! the broken H(div) inner product; v2, v4 are scalars of degree p + 3 in the
//! broken H^1 inner product. The scalar enrichment is two above the vector
//! one because of the reaction pairings (u2, v4) and (u4, v2).

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

const VARIABLES: [VariableSpec; 4] = [
    VariableSpec {
        name: "u1",
        components: 2,
        exact: ExactField::U,
    },
    VariableSpec {
        name: "u2",
        components: 1,
        exact: ExactField::DivU,
    },
    VariableSpec {
        name: "u3",
        components: 2,
        exact: ExactField::GradDivU,
    },
    VariableSpec {
        name: "u4",
        components: 1,
        exact: ExactField::LapDivU,
    },
];

#[derive(Clone, Copy, Debug)]
pub struct FirstOrder {
    p: usize,
}

impl FirstOrder {
    /// Field degree `p`; the experiments run p = 0 and p = 1.
    pub fn new(p: usize) -> Self {
        assert!(p <= 4, "field degree {p} not supported");
        Self { p }
    }

    /// Default operating quadrature degree, covering every assembly integrand.
    pub fn quad_degree(&self) -> usize {
        2 * (self.p + 3 + 2)
    }

    /// Local test-space dimension.
    pub fn n_test(&self) -> usize {
        4 * poly_dim(self.p + 2) + 2 * poly_dim(self.p + 3)
    }

    /// Exact solution tuple as a coefficient vector: element L2 moments for
    /// the fields and trace projections on the skeleton. Reproduces any tuple
    /// whose fields have degree at most p (traces at most p, resp. p + 1).
    pub fn inject_exact(
        &self,
        mesh: &Mesh,
        layout: &DofLayout,
        u1: &dyn Fn([f64; 2]) -> [f64; 2],
        u2: &dyn Fn([f64; 2]) -> f64,
        u3: &dyn Fn([f64; 2]) -> [f64; 2],
        u4: &dyn Fn([f64; 2]) -> f64,
    ) -> Vec<f64> {
        let p = self.p;
        let np = poly_dim(p);
        let qdeg = self.quad_degree();
        let mut coeffs = vec![0.0; layout.n_total];

        for t in 0..mesh.n_triangles() {
            let basis = ScalarElementBasis::new(mesh, t, p);
            let vol = volume_quad(mesh, t, qdeg);
            let tab = basis.tabulate(&vol.pts);
            let mut moments =
                [vec![0.0; np], vec![0.0; np], vec![0.0; np], vec![0.0; np], vec![0.0; np], vec![0.0; np]];
            for (q, &x) in vol.pts.iter().enumerate() {
                let w = vol.wts[q];
                let f1 = u1(x);
                let f3 = u3(x);
                let vals = [f1[0], f1[1], u2(x), f3[0], f3[1], u4(x)];
                for i in 0..np {
                    let b = tab.values[(q, i)];
                    for (m, v) in moments.iter_mut().zip(vals) {
                        m[i] += w * v * b;
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
            for (fi, func) in [(0usize, u1 as &dyn Fn([f64; 2]) -> [f64; 2]), (2, u3)] {
                let fam = &layout.families[fi];
                let modes = p + 1;
                let c = edge_legendre_coeffs(mesh, e, modes, qdeg, &|x, _| {
                    let v = func(x);
                    v[0] * n[0] + v[1] * n[1]
                });
                for (k, ck) in c.iter().enumerate() {
                    coeffs[fam.edge_dof(e, k)] = *ck;
                }
            }
            for (fi, func) in [(1usize, u2 as &dyn Fn([f64; 2]) -> f64), (3, u4)] {
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

    /// Local test coefficients of a broken test tuple (v1, v2, v3, v4) given
    /// by global callbacks; exact whenever the components are polynomials of
    /// the test degrees (p + 2 vectors, p + 3 scalars).
    pub fn represent_test(
        &self,
        mesh: &Mesh,
        t: usize,
        v1: &dyn Fn([f64; 2]) -> [f64; 2],
        v2: &dyn Fn([f64; 2]) -> f64,
        v3: &dyn Fn([f64; 2]) -> [f64; 2],
        v4: &dyn Fn([f64; 2]) -> f64,
    ) -> Vec<f64> {
        let p = self.p;
        let bv = VectorTestBasis::new(mesh, t, p + 2, VectorOp::Div);
        let bs = ScalarElementBasis::new(mesh, t, p + 3);
        let nv = bv.dim();
        let ns = poly_dim(p + 3);
        let vol = volume_quad(mesh, t, 2 * (p + 3 + 2));
        let tv = bv.tabulate(&vol.pts);
        let ts = bs.tabulate(&vol.pts);
        let mut out = vec![0.0; 2 * nv + 2 * ns];
        for (q, &x) in vol.pts.iter().enumerate() {
            let w = vol.wts[q];
            let (a1, a3) = (v1(x), v3(x));
            let (a2, a4) = (v2(x), v4(x));
            for j in 0..nv {
                out[j] += w * (a1[0] * tv.vx[(q, j)] + a1[1] * tv.vy[(q, j)]);
                out[nv + ns + j] += w * (a3[0] * tv.vx[(q, j)] + a3[1] * tv.vy[(q, j)]);
            }
            for j in 0..ns {
                out[nv + j] += w * a2 * ts.values[(q, j)];
                out[2 * nv + ns + j] += w * a4 * ts.values[(q, j)];
            }
        }
        out
    }
}

impl Formulation for FirstOrder {
    fn name(&self) -> &'static str {
        "first"
    }

    fn degree(&self) -> usize {
        self.p
    }

    fn layout(&self, mesh: &Mesh) -> DofLayout {
        let p = self.p;
        DofLayout::new(
            mesh,
            6 * poly_dim(p),
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
        let nv = 2 * poly_dim(p + 2);
        let ns = poly_dim(p + 3);
        let n_test = 2 * nv + 2 * ns;
        // test block order: v1 (vector), v2 (scalar), v3 (vector), v4 (scalar)
        let (o_v1, o_v2, o_v3, o_v4) = (0, nv, nv + ns, 2 * nv + ns);

        let dofs = layout.element_dofs(mesh, t);
        let n_trial = dofs.len();
        let qdeg = self.quad_degree();

        let bp = ScalarElementBasis::new(mesh, t, p);
        let bv = VectorTestBasis::new(mesh, t, p + 2, VectorOp::Div);
        let bs = ScalarElementBasis::new(mesh, t, p + 3);
        let vol = volume_quad(mesh, t, qdeg);
        let tp = bp.tabulate(&vol.pts);
        let tv = bv.tabulate(&vol.pts);
        let ts = bs.tabulate(&vol.pts);

        let mut gram = DMat::zeros(n_test, n_test);
        let mut b = DMat::zeros(n_test, n_trial);
        let mut load = vec![0.0; n_test];

        for q in 0..vol.pts.len() {
            let w = vol.wts[q];
            // Gram: (v, dv) + (div v, div dv) on vector blocks, mass +
            // stiffness on scalar blocks; v1/v3 and v2/v4 coincide
            for i in 0..nv {
                for j in i..nv {
                    let val = w
                        * (tv.vx[(q, i)] * tv.vx[(q, j)]
                            + tv.vy[(q, i)] * tv.vy[(q, j)]
                            + tv.div[(q, i)] * tv.div[(q, j)]);
                    gram[(o_v1 + i, o_v1 + j)] += val;
                    gram[(o_v3 + i, o_v3 + j)] += val;
                    if i != j {
                        gram[(o_v1 + j, o_v1 + i)] += val;
                        gram[(o_v3 + j, o_v3 + i)] += val;
                    }
                }
            }
            for i in 0..ns {
                for j in i..ns {
                    let val = w
                        * (ts.values[(q, i)] * ts.values[(q, j)]
                            + ts.grad_x[(q, i)] * ts.grad_x[(q, j)]
                            + ts.grad_y[(q, i)] * ts.grad_y[(q, j)]);
                    gram[(o_v2 + i, o_v2 + j)] += val;
                    gram[(o_v4 + i, o_v4 + j)] += val;
                    if i != j {
                        gram[(o_v2 + j, o_v2 + i)] += val;
                        gram[(o_v4 + j, o_v4 + i)] += val;
                    }
                }
            }

            // field columns
            for i in 0..np {
                let psi = w * tp.values[(q, i)];
                for a in 0..2 {
                    let va = |tab: &super::VecTable, j: usize| {
                        if a == 0 {
                            tab.vx[(q, j)]
                        } else {
                            tab.vy[(q, j)]
                        }
                    };
                    let ga = |j: usize| {
                        if a == 0 {
                            ts.grad_x[(q, j)]
                        } else {
                            ts.grad_y[(q, j)]
                        }
                    };
                    // (u1, v1 - grad v4)
                    let col = a * np + i;
                    for j in 0..nv {
                        b[(o_v1 + j, col)] += psi * va(&tv, j);
                    }
                    for j in 0..ns {
                        b[(o_v4 + j, col)] -= psi * ga(j);
                    }
                    // -(u3, v3 + grad v2)
                    let col = 3 * np + a * np + i;
                    for j in 0..nv {
                        b[(o_v3 + j, col)] -= psi * va(&tv, j);
                    }
                    for j in 0..ns {
                        b[(o_v2 + j, col)] -= psi * ga(j);
                    }
                }
                // -(u2, v4 + div v3)
                let col = 2 * np + i;
                for j in 0..ns {
                    b[(o_v4 + j, col)] -= psi * ts.values[(q, j)];
                }
                for j in 0..nv {
                    b[(o_v3 + j, col)] -= psi * tv.div[(q, j)];
                }
                // -(u4, v2 + div v1)
                let col = 5 * np + i;
                for j in 0..ns {
                    b[(o_v2 + j, col)] -= psi * ts.values[(q, j)];
                }
                for j in 0..nv {
                    b[(o_v1 + j, col)] -= psi * tv.div[(q, j)];
                }
            }

            // load: (f, v1)
            let fv = f(vol.pts[q]);
            for j in 0..nv {
                load[o_v1 + j] += w * (fv[0] * tv.vx[(q, j)] + fv[1] * tv.vy[(q, j)]);
            }
        }

        // trace columns; the cursor tracks the element_dofs contract
        let edges = edge_quads(mesh, t, qdeg);
        let n_fields = 6 * np;
        let modes = p + 1;
        let c_u1hat = n_fields;
        let c_u2hat = c_u1hat + 3 * modes;
        let c_u3hat = c_u2hat + 3 + 3 * p;
        let c_u4hat = c_u3hat + 3 * modes;
        debug_assert_eq!(c_u4hat + 3 + 3 * p, n_trial);

        for (li, eq) in edges.iter().enumerate() {
            let es = bs.tabulate(&eq.pts);
            let ev = bv.tabulate(&eq.pts);
            for (q, (&sq, &wq)) in eq.s.iter().zip(&eq.w).enumerate() {
                let wl = wq * eq.len;
                // <u1_hat, v4> and <u3_hat, v2>: signed Legendre modes
                for k in 0..modes {
                    let m = wl * eq.sign * edge_mode(k, sq);
                    for j in 0..ns {
                        b[(o_v4 + j, c_u1hat + li * modes + k)] += m * es.values[(q, j)];
                        b[(o_v2 + j, c_u3hat + li * modes + k)] += m * es.values[(q, j)];
                    }
                }
                // <u2_hat, v3> and <u4_hat, v1>: continuous trace against v . n
                let hats = edge_hats(sq);
                for (end, hat) in eq.endpoint_slots.iter().zip(hats) {
                    let m = wl * hat;
                    for j in 0..nv {
                        let vn = ev.vx[(q, j)] * eq.normal[0] + ev.vy[(q, j)] * eq.normal[1];
                        b[(o_v3 + j, c_u2hat + end)] += m * vn;
                        b[(o_v1 + j, c_u4hat + end)] += m * vn;
                    }
                }
                for k in 1..=p {
                    let m = wl * edge_bubble(k, sq);
                    let col2 = c_u2hat + 3 + li * p + (k - 1);
                    let col4 = c_u4hat + 3 + li * p + (k - 1);
                    for j in 0..nv {
                        let vn = ev.vx[(q, j)] * eq.normal[0] + ev.vy[(q, j)] * eq.normal[1];
                        b[(o_v3 + j, col2)] += m * vn;
                        b[(o_v1 + j, col4)] += m * vn;
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
        let mut out = Vec::with_capacity(4);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_unit_square, Mesh};
    use crate::quadrature::triangle_rule;
    use crate::solver::Cholesky;

    fn reference_like() -> Mesh {
        Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]])
    }

    #[test]
    fn layout_dimensions_p0_p1() {
        let mesh = make_unit_square(2);
        // p = 0: 6 fields/element, 1 mode/edge, vertex traces
        let layout = FirstOrder::new(0).layout(&mesh);
        assert_eq!(layout.n_total, 6 * 8 + 16 + 9 + 16 + 9);
        // p = 1: 18 fields/element, 2 modes/edge, vertices + 1 bubble/edge
        let layout = FirstOrder::new(1).layout(&mesh);
        assert_eq!(
            layout.n_total,
            18 * 8 + 2 * 16 + (9 + 16) + 2 * 16 + (9 + 16)
        );
    }

    #[test]
    fn gram_is_block_diagonal_and_spd() {
        let mesh = make_unit_square(2);
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let nv = 2 * poly_dim(2);
        let ns = poly_dim(3);
        for t in [0usize, 5] {
            let ls = form.local_system(&mesh, &layout, t, &|_| [0.0, 0.0]);
            assert!(ls.gram.max_abs_asymmetry() < 1e-12);
            Cholesky::new(&ls.gram).expect("gram must be SPD");
            // the four variable blocks do not couple
            for i in 0..nv {
                for j in nv..(2 * nv + 2 * ns) {
                    assert_eq!(ls.gram[(i, j)], 0.0);
                }
            }
            for i in nv..nv + ns {
                for j in nv + ns..(2 * nv + 2 * ns) {
                    assert_eq!(ls.gram[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn v2_block_matches_direct_mass_plus_stiffness() {
        // independent quadrature of the P^3 scalar block on the reference-like triangle
        let mesh = reference_like();
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let ls = form.local_system(&mesh, &layout, 0, &|_| [0.0, 0.0]);
        let basis = ScalarElementBasis::new(&mesh, 0, 3);
        let rule = triangle_rule(8).unwrap();
        let nv = 2 * poly_dim(2);
        let ns = poly_dim(3);
        let det = mesh.geometry(0).det;
        for i in 0..ns {
            for j in 0..ns {
                let mut want = 0.0;
                for (q, &pref) in rule.points.iter().enumerate() {
                    let x = mesh.map_point(0, pref);
                    let v = basis.eval(x);
                    let g = basis.eval_grad(x);
                    want += rule.weights[q]
                        * det
                        * (v[i] * v[j] + g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
                let got = ls.gram[(nv + i, nv + j)];
                assert!((got - want).abs() < 1e-11, "({i},{j}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn constant_u1_against_grad_v4_vanishes() {
        // (u1, -grad v4) pairs a constant u1 with the constant test function
        // to zero; the constant is the first scalar basis function
        let mesh = reference_like();
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let ls = form.local_system(&mesh, &layout, 0, &|_| [0.0, 0.0]);
        let nv = 2 * poly_dim(2);
        let ns = poly_dim(3);
        let o_v4 = 2 * nv + ns;
        assert!(ls.b[(o_v4, 0)].abs() < 1e-13);
    }

    #[test]
    fn hat_column_contracts_to_edge_integrals() {
        // <u4_hat, v1> with v1 a constant vector field W: the hat column
        // contracted with the representation of W equals
        // sum over incident edges of len * int hat (W . n) ds
        let mesh = reference_like();
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let ls = form.local_system(&mesh, &layout, 0, &|_| [0.0, 0.0]);
        let nv = 2 * poly_dim(2);
        let np = 1;
        let c_u4hat = 6 * np + 3 + 3 + 3;
        let w_field = [0.7, -1.3];
        let repr = form.represent_test(
            &mesh,
            0,
            &|_| w_field,
            &|_| 0.0,
            &|_| [0.0, 0.0],
            &|_| 0.0,
        );
        let geo = mesh.geometry(0);
        let tri = mesh.triangles[0];
        let rule = crate::quadrature::edge_rule(10);
        for lv in 0..3 {
            let col = c_u4hat + lv;
            let got: f64 = (0..nv).map(|j| ls.b[(j, col)] * repr[j]).sum();
            let mut want = 0.0;
            for li in 0..3 {
                let e = mesh.tri_edges[0][li];
                let [va, vb] = mesh.edges[e];
                let hat_at = if tri[lv] == va {
                    0
                } else if tri[lv] == vb {
                    1
                } else {
                    continue;
                };
                let wn = w_field[0] * geo.normals[li][0] + w_field[1] * geo.normals[li][1];
                let ih: f64 = rule.integrate(|[s, _]| if hat_at == 0 { 1.0 - s } else { s });
                want += geo.edge_lengths[li] * ih * wn;
            }
            assert!((got - want).abs() < 1e-12, "vertex {lv}: {got} vs {want}");
        }
    }

    #[test]
    fn load_zero_rhs_and_block_structure() {
        let mesh = make_unit_square(1);
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let ls = form.local_system(&mesh, &layout, 0, &|_| [0.0, 0.0]);
        assert!(ls.load.iter().all(|&v| v == 0.0));
        // constant f: moments appear only in the v1 block, and contracting
        // with the representation of f gives back its squared L2 norm
        let f = [1.0, 0.0];
        let ls = form.local_system(&mesh, &layout, 0, &move |_| f);
        let nv = 2 * poly_dim(2);
        let ns = poly_dim(3);
        assert!(ls.load[..nv].iter().any(|&v| v.abs() > 1e-10));
        assert!(ls.load[nv..2 * nv + 2 * ns].iter().all(|&v| v.abs() < 1e-14));
        let repr = form.represent_test(&mesh, 0, &|_| f, &|_| 0.0, &|_| [0.0, 0.0], &|_| 0.0);
        let got: f64 = (0..nv).map(|j| ls.load[j] * repr[j]).sum();
        let area = mesh.geometry(0).area;
        assert!((got - area * (f[0] * f[0] + f[1] * f[1])).abs() < 1e-13);
    }

    #[test]
    fn smooth_load_matches_over_integration() {
        let mesh = make_unit_square(2);
        let form = FirstOrder::new(0);
        let layout = form.layout(&mesh);
        let f = |x: [f64; 2]| [(3.0 * x[0]).sin() * x[1], (2.0 * x[1]).cos()];
        // contract the load with the representation of a quadratic field W:
        // (f, W) by over-integration is the independent reference
        let w_field = |x: [f64; 2]| [x[0] * x[1] - 0.3, x[1] * x[1] + 0.5 * x[0]];
        let t = 3;
        let ls = form.local_system(&mesh, &layout, t, &f);
        let repr = form.represent_test(&mesh, t, &w_field, &|_| 0.0, &|_| [0.0, 0.0], &|_| 0.0);
        let nv = 2 * poly_dim(2);
        let got: f64 = (0..nv).map(|j| ls.load[j] * repr[j]).sum();
        let rule = triangle_rule(20).unwrap();
        let det = mesh.geometry(t).det;
        let mut want = 0.0;
        for (q, &pref) in rule.points.iter().enumerate() {
            let x = mesh.map_point(t, pref);
            let fv = f(x);
            let wv = w_field(x);
            want += rule.weights[q] * det * (fv[0] * wv[0] + fv[1] * wv[1]);
        }
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn represent_test_is_exact_on_polynomials() {
        // the vector test basis spans P^{p+2} componentwise even after the
        // kernel-aligned rotation
        let mesh = make_unit_square(2);
        let form = FirstOrder::new(0);
        let v1 = |x: [f64; 2]| [x[0] * x[0] - x[1], 2.0 * x[0] * x[1]];
        let repr = form.represent_test(&mesh, 1, &v1, &|_| 0.0, &|_| [0.0, 0.0], &|_| 0.0);
        let bv = VectorTestBasis::new(&mesh, 1, 2, VectorOp::Div);
        let nv = bv.dim();
        for &pref in &[[0.2, 0.3], [0.6, 0.1], [0.1, 0.7]] {
            let x = mesh.map_point(1, pref);
            let tab = bv.tabulate(&[x]);
            let mut got = [0.0f64; 2];
            for j in 0..nv {
                got[0] += repr[j] * tab.vx[(0, j)];
                got[1] += repr[j] * tab.vy[(0, j)];
            }
            let want = v1(x);
            assert!((got[0] - want[0]).abs() < 1e-12);
            assert!((got[1] - want[1]).abs() < 1e-12);
        }
    }
}
