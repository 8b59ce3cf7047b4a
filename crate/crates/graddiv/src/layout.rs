//! Degree-of-freedom numbering for field and skeleton trace variables.
//!
//! Field unknowns live in element-local blocks, numbered first. Trace
//! families follow in declaration order. Within a family, H^{-1/2}-type
//! unknowns carry `modes` Legendre coefficients per edge (single-valued with
//! the global edge orientation), while H^{1/2}-type unknowns carry one value
//! per vertex plus `bubbles` interior modes per edge.
//!
//! The element-local column order produced by [`DofLayout::element_dofs`] is
//! a contract shared with the element matrices: fields first, then for each
//! family either (edges 0..3) x (modes ascending), or (local vertices 0..3)
//! followed by (edges 0..3) x (bubbles ascending).

use crate::basis::{edge_bubble, edge_hats, edge_mode};
use crate::mesh::Mesh;
use crate::quadrature::edge_rule;
use crate::solver::{Cholesky, DMat};

/// Boundary datum tied to a constrained trace family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcData {
    /// Normal component of the associated vector field on the boundary.
    NormalComponent,
    /// Point trace of the associated scalar (a divergence in both schemes).
    DivergenceTrace,
}

#[derive(Clone, Copy, Debug)]
pub enum TraceKind {
    /// Legendre modes per edge, H^{-1/2} flavor.
    EdgeModes { modes: usize },
    /// Continuous piecewise polynomials on the skeleton, H^{1/2} flavor.
    Continuous { bubbles: usize },
}

#[derive(Clone, Debug)]
pub struct TraceFamily {
    pub kind: TraceKind,
    pub offset: usize,
    /// `Some` when boundary degrees of freedom are essential.
    pub constrained: Option<BcData>,
}

impl TraceFamily {
    pub fn dim(&self, mesh: &Mesh) -> usize {
        match self.kind {
            TraceKind::EdgeModes { modes } => modes * mesh.n_edges(),
            TraceKind::Continuous { bubbles } => {
                mesh.n_vertices() + bubbles * mesh.n_edges()
            }
        }
    }

    pub fn edge_dof(&self, e: usize, k: usize) -> usize {
        match self.kind {
            TraceKind::EdgeModes { modes } => {
                debug_assert!(k < modes);
                self.offset + e * modes + k
            }
            TraceKind::Continuous { .. } => panic!("edge_dof on a continuous family"),
        }
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        match self.kind {
            TraceKind::Continuous { .. } => self.offset + v,
            TraceKind::EdgeModes { .. } => panic!("vertex_dof on an edge-mode family"),
        }
    }

    /// Bubble `k` is 1-based, matching [`edge_bubble`].
    pub fn bubble_dof(&self, mesh: &Mesh, e: usize, k: usize) -> usize {
        match self.kind {
            TraceKind::Continuous { bubbles } => {
                debug_assert!(k >= 1 && k <= bubbles);
                self.offset + mesh.n_vertices() + e * bubbles + (k - 1)
            }
            TraceKind::EdgeModes { .. } => panic!("bubble_dof on an edge-mode family"),
        }
    }
}

/// Essential degree of freedom with its prescribed value.
#[derive(Clone, Copy, Debug)]
pub struct Constraint {
    pub dof: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct DofLayout {
    pub fields_per_element: usize,
    pub n_elements: usize,
    pub families: Vec<TraceFamily>,
    pub n_total: usize,
}

impl DofLayout {
    pub fn new(
        mesh: &Mesh,
        fields_per_element: usize,
        family_specs: &[(TraceKind, Option<BcData>)],
    ) -> Self {
        let n_elements = mesh.n_triangles();
        let mut offset = fields_per_element * n_elements;
        let mut families = Vec::with_capacity(family_specs.len());
        for &(kind, constrained) in family_specs {
            let fam = TraceFamily {
                kind,
                offset,
                constrained,
            };
            offset += fam.dim(mesh);
            families.push(fam);
        }
        Self {
            fields_per_element,
            n_elements,
            families,
            n_total: offset,
        }
    }

    pub fn n_field_dofs(&self) -> usize {
        self.fields_per_element * self.n_elements
    }

    pub fn field_dof(&self, t: usize, local: usize) -> usize {
        debug_assert!(local < self.fields_per_element);
        t * self.fields_per_element + local
    }

    /// Global indices of all degrees of freedom coupled to element `t`, in
    /// the element-local column order used by the element matrices.
    pub fn element_dofs(&self, mesh: &Mesh, t: usize) -> Vec<usize> {
        let mut dofs: Vec<usize> = (0..self.fields_per_element)
            .map(|l| self.field_dof(t, l))
            .collect();
        let tri = mesh.triangles[t];
        let te = mesh.tri_edges[t];
        for fam in &self.families {
            match fam.kind {
                TraceKind::EdgeModes { modes } => {
                    for &e in &te {
                        for k in 0..modes {
                            dofs.push(fam.edge_dof(e, k));
                        }
                    }
                }
                TraceKind::Continuous { bubbles } => {
                    for &v in &tri {
                        dofs.push(fam.vertex_dof(v));
                    }
                    for &e in &te {
                        for k in 1..=bubbles {
                            dofs.push(fam.bubble_dof(mesh, e, k));
                        }
                    }
                }
            }
        }
        dofs
    }

    /// All essential (boundary) degrees of freedom in ascending order,
    /// without values.
    pub fn essential_dofs(&self, mesh: &Mesh) -> Vec<usize> {
        let mut dofs = Vec::new();
        for fam in &self.families {
            if fam.constrained.is_none() {
                continue;
            }
            match fam.kind {
                TraceKind::EdgeModes { modes } => {
                    for e in 0..mesh.n_edges() {
                        if mesh.edge_boundary[e] {
                            for k in 0..modes {
                                dofs.push(fam.edge_dof(e, k));
                            }
                        }
                    }
                }
                TraceKind::Continuous { bubbles } => {
                    for v in 0..mesh.n_vertices() {
                        if mesh.vertex_boundary[v] {
                            dofs.push(fam.vertex_dof(v));
                        }
                    }
                    for e in 0..mesh.n_edges() {
                        if mesh.edge_boundary[e] {
                            for k in 1..=bubbles {
                                dofs.push(fam.bubble_dof(mesh, e, k));
                            }
                        }
                    }
                }
            }
        }
        dofs.sort_unstable();
        dofs
    }
}

/// Legendre coefficients on edge `e` of the scalar datum `g` given in global
/// edge parameterization, using `c_k = (2k + 1) \int_0^1 g P_k ds`.
pub fn edge_legendre_coeffs(
    mesh: &Mesh,
    e: usize,
    modes: usize,
    quad_degree: usize,
    g: &dyn Fn([f64; 2], f64) -> f64,
) -> Vec<f64> {
    let rule = edge_rule(quad_degree);
    let (a, b) = mesh.edge_points(e);
    let mut coeffs = vec![0.0; modes];
    for (&[s, _], &w) in rule.points.iter().zip(&rule.weights) {
        let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let gv = g(x, s);
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += w * gv * edge_mode(k, s);
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64;
    }
    coeffs
}

/// Splits a scalar edge datum into endpoint values plus bubble coefficients
/// of the continuous trace space. Exact whenever `g` restricted to the edge
/// is a polynomial of degree at most `bubbles + 1`.
pub fn edge_continuous_coeffs(
    mesh: &Mesh,
    e: usize,
    bubbles: usize,
    quad_degree: usize,
    g: &dyn Fn([f64; 2]) -> f64,
) -> (f64, f64, Vec<f64>) {
    let (a, b) = mesh.edge_points(e);
    let ga = g(a);
    let gb = g(b);
    if bubbles == 0 {
        return (ga, gb, Vec::new());
    }
    let rule = edge_rule(quad_degree);
    let mut gram = DMat::zeros(bubbles, bubbles);
    let mut rhs = vec![0.0; bubbles];
    for (&[s, _], &w) in rule.points.iter().zip(&rule.weights) {
        let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let [h0, h1] = edge_hats(s);
        let resid = g(x) - ga * h0 - gb * h1;
        let bv: Vec<f64> = (1..=bubbles).map(|k| edge_bubble(k, s)).collect();
        for i in 0..bubbles {
            rhs[i] += w * resid * bv[i];
            for j in 0..bubbles {
                gram[(i, j)] += w * bv[i] * bv[j];
            }
        }
    }
    let coeffs = Cholesky::new(&gram)
        .expect("bubble Gram is SPD")
        .solve(&rhs);
    (ga, gb, coeffs)
}
