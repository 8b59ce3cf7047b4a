//! Manufactured solutions, boundary data projection, and exact errors.
//!
//! Two benchmark problems: a smooth vector field on the unit square with
//! homogeneous boundary conditions, and a singular curl field on a rotated
//! L-shaped domain whose normal trace is nonzero on the outer boundary.
//! Closed forms of all derived quantities are hand-derived (see
//! docs/derivations.md) and double-checked by finite differences in the
//! tests rather than trusted blindly.

use std::f64::consts::PI;

use crate::form::{ExactField, Formulation};
use crate::layout::{
    edge_continuous_coeffs, edge_legendre_coeffs, BcData, Constraint, DofLayout, TraceKind,
};
use crate::mesh::{make_lshape, make_unit_square, Mesh};
use crate::quadrature::triangle_rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    LShape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    Smooth,
    Singular,
}

/// A model problem with exact solution and boundary data callbacks.
#[derive(Clone, Copy)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub regularity: Regularity,
    pub u: fn([f64; 2]) -> [f64; 2],
    pub div_u: fn([f64; 2]) -> f64,
    pub grad_div_u: fn([f64; 2]) -> [f64; 2],
    pub lap_div_u: fn([f64; 2]) -> f64,
    /// `(grad div)^2 u`.
    pub grad_lap_div_u: fn([f64; 2]) -> [f64; 2],
    pub f: fn([f64; 2]) -> [f64; 2],
    /// Fixed element quadrature degree for exact-error integration.
    pub error_quad_degree: usize,
}

impl ProblemSpec {
    /// Coarsest mesh of the problem domain. `n` subdivides the unit square
    /// and is ignored for the L-shape.
    pub fn initial_mesh(&self, n: usize) -> Mesh {
        match self.domain {
            Domain::UnitSquare => make_unit_square(n),
            Domain::LShape => make_lshape(),
        }
    }

    pub fn eval_exact(&self, which: ExactField, x: [f64; 2], out: &mut [f64]) {
        match which {
            ExactField::U => {
                let v = (self.u)(x);
                out[0] = v[0];
                out[1] = v[1];
            }
            ExactField::DivU => out[0] = (self.div_u)(x),
            ExactField::GradDivU => {
                let v = (self.grad_div_u)(x);
                out[0] = v[0];
                out[1] = v[1];
            }
            ExactField::LapDivU => out[0] = (self.lap_div_u)(x),
            ExactField::NegGradDivU => {
                let v = (self.grad_div_u)(x);
                out[0] = -v[0];
                out[1] = -v[1];
            }
        }
    }
}

// polynomial factor t^2 (t - 1)^2 and its derivatives
fn g0(t: f64) -> f64 {
    t * t * (t - 1.0) * (t - 1.0)
}
fn g1(t: f64) -> f64 {
    4.0 * t * t * t - 6.0 * t * t + 2.0 * t
}
fn g2(t: f64) -> f64 {
    12.0 * t * t - 12.0 * t + 2.0
}
fn g3(t: f64) -> f64 {
    24.0 * t - 12.0
}
const G4: f64 = 24.0;

// trigonometric factor sin^2(pi t) and its derivatives
fn s0(t: f64) -> f64 {
    let v = (PI * t).sin();
    v * v
}
fn s1(t: f64) -> f64 {
    PI * (2.0 * PI * t).sin()
}
fn s2(t: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * t).cos()
}
fn s3(t: f64) -> f64 {
    -4.0 * PI * PI * PI * (2.0 * PI * t).sin()
}
fn s4(t: f64) -> f64 {
    -8.0 * PI * PI * PI * PI * (2.0 * PI * t).cos()
}

fn smooth_u(x: [f64; 2]) -> [f64; 2] {
    [g0(x[0]) * g0(x[1]), s0(x[0]) * s0(x[1])]
}
fn smooth_div_u(x: [f64; 2]) -> f64 {
    g1(x[0]) * g0(x[1]) + s0(x[0]) * s1(x[1])
}
fn smooth_grad_div_u(x: [f64; 2]) -> [f64; 2] {
    [
        g2(x[0]) * g0(x[1]) + s1(x[0]) * s1(x[1]),
        g1(x[0]) * g1(x[1]) + s0(x[0]) * s2(x[1]),
    ]
}
fn smooth_lap_div_u(x: [f64; 2]) -> f64 {
    g3(x[0]) * g0(x[1]) + s2(x[0]) * s1(x[1]) + g1(x[0]) * g2(x[1]) + s0(x[0]) * s3(x[1])
}
fn smooth_grad_lap_div_u(x: [f64; 2]) -> [f64; 2] {
    [
        G4 * g0(x[1]) + s3(x[0]) * s1(x[1]) + g2(x[0]) * g2(x[1]) + s1(x[0]) * s3(x[1]),
        g3(x[0]) * g1(x[1]) + s2(x[0]) * s2(x[1]) + g1(x[0]) * g3(x[1]) + s0(x[0]) * s4(x[1]),
    ]
}
fn smooth_f(x: [f64; 2]) -> [f64; 2] {
    let a = smooth_grad_lap_div_u(x);
    let b = smooth_u(x);
    [a[0] + b[0], a[1] + b[1]]
}

/// Smooth benchmark on the unit square:
/// `u = (x^2 (x-1)^2 y^2 (y-1)^2, sin^2(pi x) sin^2(pi y))`,
/// which satisfies `div u = u . n = 0` on the whole boundary.
pub fn smooth_problem() -> ProblemSpec {
    ProblemSpec {
        domain: Domain::UnitSquare,
        regularity: Regularity::Smooth,
        u: smooth_u,
        div_u: smooth_div_u,
        grad_div_u: smooth_grad_div_u,
        lap_div_u: smooth_lap_div_u,
        grad_lap_div_u: smooth_grad_lap_div_u,
        f: smooth_f,
        error_quad_degree: 12,
    }
}

/// Scalar potential of the singular benchmark in polar coordinates.
pub fn lshape_potential(x: [f64; 2]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[1].atan2(x[0]);
    r.powf(2.0 / 3.0) * (2.0 * phi / 3.0).cos()
}

fn lshape_u(x: [f64; 2]) -> [f64; 2] {
    // two-dimensional curl of the potential: (d/dy, -d/dx) r^{2/3} cos(2 phi / 3)
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[1].atan2(x[0]);
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    [c * (phi / 3.0).sin(), -c * (phi / 3.0).cos()]
}
fn lshape_zero_scalar(_: [f64; 2]) -> f64 {
    0.0
}
fn lshape_zero_vec(_: [f64; 2]) -> [f64; 2] {
    [0.0, 0.0]
}

/// Singular benchmark on the rotated L-shape: `u = curl(r^{2/3} cos(2 phi/3))`,
/// divergence free with `f = u`; the potential vanishes on the two boundary
/// edges meeting at the reentrant corner, so `u . n = 0` there while the
/// outer boundary carries nonzero normal data.
pub fn lshape_problem() -> ProblemSpec {
    ProblemSpec {
        domain: Domain::LShape,
        regularity: Regularity::Singular,
        u: lshape_u,
        div_u: lshape_zero_scalar,
        grad_div_u: lshape_zero_vec,
        lap_div_u: lshape_zero_scalar,
        grad_lap_div_u: lshape_zero_vec,
        f: lshape_u,
        error_quad_degree: 10,
    }
}

/// Projects the boundary data of `spec` onto the essential trace unknowns:
/// edgewise Legendre (L2) projection of `u . n` for the normal-trace family
/// and pointwise interpolation of `div u` for the continuous family.
pub fn project_boundary_data(
    mesh: &Mesh,
    layout: &DofLayout,
    spec: &ProblemSpec,
) -> Vec<Constraint> {
    let qdeg = 12;
    let mut constraints = Vec::new();
    for fam in &layout.families {
        let Some(data) = fam.constrained else {
            continue;
        };
        match (data, fam.kind) {
            (BcData::NormalComponent, TraceKind::EdgeModes { modes }) => {
                for e in 0..mesh.n_edges() {
                    if !mesh.edge_boundary[e] {
                        continue;
                    }
                    let (a, b) = mesh.edge_points(e);
                    let len = mesh.edge_length(e);
                    let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                    let coeffs = edge_legendre_coeffs(mesh, e, modes, qdeg, &|x, _| {
                        let v = (spec.u)(x);
                        v[0] * n[0] + v[1] * n[1]
                    });
                    for (k, value) in coeffs.into_iter().enumerate() {
                        constraints.push(Constraint {
                            dof: fam.edge_dof(e, k),
                            value,
                        });
                    }
                }
            }
            (BcData::DivergenceTrace, TraceKind::Continuous { bubbles }) => {
                for v in 0..mesh.n_vertices() {
                    if mesh.vertex_boundary[v] {
                        constraints.push(Constraint {
                            dof: fam.vertex_dof(v),
                            value: (spec.div_u)(mesh.vertices[v]),
                        });
                    }
                }
                for e in 0..mesh.n_edges() {
                    if !mesh.edge_boundary[e] {
                        continue;
                    }
                    let (_, _, bub) =
                        edge_continuous_coeffs(mesh, e, bubbles, qdeg, &|x| (spec.div_u)(x));
                    for (k, value) in bub.into_iter().enumerate() {
                        constraints.push(Constraint {
                            dof: fam.bubble_dof(mesh, e, k + 1),
                            value,
                        });
                    }
                }
            }
            _ => panic!("mismatched boundary data and trace kind"),
        }
    }
    constraints
}

/// Element-wise L2 errors of every field variable against the exact solution.
pub fn exact_errors(
    mesh: &Mesh,
    form: &dyn Formulation,
    layout: &DofLayout,
    spec: &ProblemSpec,
    coeffs: &[f64],
) -> Vec<f64> {
    let rule = triangle_rule(spec.error_quad_degree).expect("error quadrature");
    let vars = form.variables();
    let mut sums = vec![0.0; vars.len()];
    let mut exact = [0.0f64; 2];
    for t in 0..mesh.n_triangles() {
        let det = mesh.geometry(t).det;
        let pts: Vec<[f64; 2]> = rule.points.iter().map(|&p| mesh.map_point(t, p)).collect();
        let fields = form.eval_fields(mesh, layout, coeffs, t, &pts);
        for (vi, var) in vars.iter().enumerate() {
            for (q, &x) in pts.iter().enumerate() {
                spec.eval_exact(var.exact, x, &mut exact);
                let mut d2 = 0.0;
                for c in 0..var.components {
                    let d = exact[c] - fields[vi][(q, c)];
                    d2 += d * d;
                }
                sums[vi] += rule.weights[q] * det * d2;
            }
        }
    }
    sums.into_iter().map(f64::sqrt).collect()
}

/// Euclidean combination of the per-variable errors.
pub fn total_error(errors: &[f64]) -> f64 {
    errors.iter().map(|e| e * e).sum::<f64>().sqrt()
}
