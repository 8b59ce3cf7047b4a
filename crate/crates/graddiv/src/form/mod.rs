//! Element-level ingredients of the two ultraweak formulations.
//!
//! Each formulation produces, per element, the SPD test-space Gram matrix,
//! the rectangular trial-test matrix whose columns follow the contract of
//! [`DofLayout::element_dofs`], and the load vector of right-hand-side
//! moments. Everything downstream (optimal test functions, Schur complements,
//! assembly, estimation) is formulation-generic.

mod first;
mod second;

pub use first::FirstOrder;
pub use second::SecondOrder;

use crate::basis::ScalarElementBasis;
use crate::layout::DofLayout;
use crate::mesh::Mesh;
use crate::quadrature::{edge_rule, triangle_rule};
use crate::solver::{null_space_split, DMat};

/// Right-hand side of the strong equation, always a vector field.
pub type RhsFn = dyn Fn([f64; 2]) -> [f64; 2] + Sync;

/// Per-element matrices of one formulation.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    /// SPD Gram matrix of the broken test inner product.
    pub gram: DMat,
    /// Trial-test matrix; rows are local test functions, columns follow
    /// [`DofLayout::element_dofs`].
    pub b: DMat,
    /// Load moments against the test basis.
    pub load: Vec<f64>,
    /// Global indices of the columns.
    pub dofs: Vec<usize>,
}

/// Exact-solution component a discrete field variable approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactField {
    U,
    DivU,
    GradDivU,
    LapDivU,
    NegGradDivU,
}

#[derive(Clone, Copy, Debug)]
pub struct VariableSpec {
    pub name: &'static str,
    pub components: usize,
    pub exact: ExactField,
}

pub trait Formulation: Sync {
    fn name(&self) -> &'static str;
    /// Polynomial degree of the field variables.
    fn degree(&self) -> usize;
    fn layout(&self, mesh: &Mesh) -> DofLayout;
    fn variables(&self) -> &'static [VariableSpec];
    fn local_system(&self, mesh: &Mesh, layout: &DofLayout, t: usize, f: &RhsFn) -> LocalSystem;
    /// Values of every field variable at the given physical points of
    /// element `t`; one matrix (points x components) per variable.
    fn eval_fields(
        &self,
        mesh: &Mesh,
        layout: &DofLayout,
        coeffs: &[f64],
        t: usize,
        points: &[[f64; 2]],
    ) -> Vec<DMat>;
}

/// First-order derivative operator entering a vector test block's norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VectorOp {
    Div,
    GradDiv,
}

/// Vector-valued polynomial test basis of one element, rotated so that the
/// leading functions span the orthogonal complement of ker(op) and the
/// trailing ones span the kernel itself.
///
/// The inner product (v, dv) + (op v, op dv) has entries spanning many
/// orders of magnitude on small elements (1/h^2 for div, 1/h^4 for
/// grad-div). In a component-aligned basis every function mixes both
/// subspaces and the Gram loses positive definiteness to cancellation on
/// strongly graded meshes; in the rotated basis the Gram is
/// scaled-diagonally-dominant and its Cholesky factorization stays accurate
/// at any refinement depth.
pub(crate) struct VectorTestBasis {
    scalar: ScalarElementBasis,
    /// Column j holds the scalar-basis coefficients of function j: rows
    /// 0..ns are the x-component, rows ns..2ns the y-component.
    coeff: DMat,
    dim: usize,
}

/// Tabulated vector basis data at a point set.
pub(crate) struct VecTable {
    pub vx: DMat,
    pub vy: DMat,
    pub div: DMat,
    pub gdx: DMat,
    pub gdy: DMat,
}

impl VectorTestBasis {
    pub fn new(mesh: &Mesh, t: usize, degree: usize, op: VectorOp) -> Self {
        let scalar = ScalarElementBasis::new(mesh, t, degree);
        let ns = scalar.dim();
        let dim = 2 * ns;

        // moment matrix of the operator against an orthonormal basis of its
        // polynomial target space; only the null/row split matters
        let target_degree = degree.saturating_sub(match op {
            VectorOp::Div => 1,
            VectorOp::GradDiv => 2,
        });
        let target = ScalarElementBasis::new(mesh, t, target_degree);
        let mt = target.dim();
        let rows = match op {
            VectorOp::Div => mt,
            VectorOp::GradDiv => 2 * mt,
        };
        let rule = triangle_rule(2 * degree).expect("moment rule");
        let det = mesh.geometry(t).det;
        let pts: Vec<[f64; 2]> = rule.points.iter().map(|&p| mesh.map_point(t, p)).collect();
        let stab = scalar.tabulate(&pts);
        let ttab = target.tabulate(&pts);
        let mut k = DMat::zeros(rows, dim);
        for (q, &w) in rule.weights.iter().enumerate() {
            let w = w * det;
            for i in 0..ns {
                // div(psi e_x) = d_x psi, div(psi e_y) = d_y psi
                // grad div(psi e_x) = (psi_xx, psi_xy), e_y -> (psi_xy, psi_yy)
                match op {
                    VectorOp::Div => {
                        for m in 0..mt {
                            let wm = w * ttab.values[(q, m)];
                            k[(m, i)] += wm * stab.grad_x[(q, i)];
                            k[(m, ns + i)] += wm * stab.grad_y[(q, i)];
                        }
                    }
                    VectorOp::GradDiv => {
                        for m in 0..mt {
                            let wm = w * ttab.values[(q, m)];
                            k[(m, i)] += wm * stab.hess_xx[(q, i)];
                            k[(m, ns + i)] += wm * stab.hess_xy[(q, i)];
                            k[(mt + m, i)] += wm * stab.hess_xy[(q, i)];
                            k[(mt + m, ns + i)] += wm * stab.hess_yy[(q, i)];
                        }
                    }
                }
            }
        }
        let (coeff, _rank) = null_space_split(&k);
        Self { scalar, coeff, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tabulate(&self, pts: &[[f64; 2]]) -> VecTable {
        let ns = self.scalar.dim();
        let stab = self.scalar.tabulate(pts);
        let n = pts.len();
        let mut vx = DMat::zeros(n, self.dim);
        let mut vy = DMat::zeros(n, self.dim);
        let mut div = DMat::zeros(n, self.dim);
        let mut gdx = DMat::zeros(n, self.dim);
        let mut gdy = DMat::zeros(n, self.dim);
        for q in 0..n {
            for j in 0..self.dim {
                let mut acc = [0.0f64; 5];
                for i in 0..ns {
                    let cx = self.coeff[(i, j)];
                    let cy = self.coeff[(ns + i, j)];
                    acc[0] += cx * stab.values[(q, i)];
                    acc[1] += cy * stab.values[(q, i)];
                    acc[2] += cx * stab.grad_x[(q, i)] + cy * stab.grad_y[(q, i)];
                    acc[3] += cx * stab.hess_xx[(q, i)] + cy * stab.hess_xy[(q, i)];
                    acc[4] += cx * stab.hess_xy[(q, i)] + cy * stab.hess_yy[(q, i)];
                }
                vx[(q, j)] = acc[0];
                vy[(q, j)] = acc[1];
                div[(q, j)] = acc[2];
                gdx[(q, j)] = acc[3];
                gdy[(q, j)] = acc[4];
            }
        }
        VecTable {
            vx,
            vy,
            div,
            gdx,
            gdy,
        }
    }
}

/// Volume quadrature of one element in physical coordinates.
pub(crate) struct VolumeQuad {
    pub pts: Vec<[f64; 2]>,
    /// Reference weights times the Jacobian determinant.
    pub wts: Vec<f64>,
}

pub(crate) fn volume_quad(mesh: &Mesh, t: usize, degree: usize) -> VolumeQuad {
    let rule = triangle_rule(degree).expect("element quadrature degree");
    let det = mesh.geometry(t).det;
    VolumeQuad {
        pts: rule.points.iter().map(|&p| mesh.map_point(t, p)).collect(),
        wts: rule.weights.iter().map(|&w| w * det).collect(),
    }
}

/// Edge quadrature and orientation data of one local element edge.
pub(crate) struct EdgeQuad {
    /// +1 when the element outward normal equals the global edge normal.
    pub sign: f64,
    pub len: f64,
    /// Element outward unit normal.
    pub normal: [f64; 2],
    /// Parameters in the global edge orientation (lower vertex to higher).
    pub s: Vec<f64>,
    /// Reference weights summing to one.
    pub w: Vec<f64>,
    pub pts: Vec<[f64; 2]>,
    /// Local vertex slots (0..3) of the global endpoints (lower, higher).
    pub endpoint_slots: [usize; 2],
}

pub(crate) fn edge_quads(mesh: &Mesh, t: usize, degree: usize) -> Vec<EdgeQuad> {
    let rule = edge_rule(degree);
    let geo = mesh.geometry(t);
    let tri = mesh.triangles[t];
    (0..3)
        .map(|li| {
            let e = mesh.tri_edges[t][li];
            let [va, vb] = mesh.edges[e];
            let (a, b) = (mesh.vertices[va], mesh.vertices[vb]);
            let s: Vec<f64> = rule.points.iter().map(|&[s, _]| s).collect();
            let pts = s
                .iter()
                .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
                .collect();
            let slot = |v: usize| tri.iter().position(|&x| x == v).expect("edge endpoint in element");
            EdgeQuad {
                sign: mesh.tri_edge_signs[t][li],
                len: geo.edge_lengths[li],
                normal: geo.normals[li],
                s,
                w: rule.weights.clone(),
                pts,
                endpoint_slots: [slot(va), slot(vb)],
            }
        })
        .collect()
}
