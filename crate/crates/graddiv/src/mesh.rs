//! Conforming triangulations, geometry queries, and newest-vertex bisection.
//!
//! Triangles are stored counterclockwise with the convention that the
//! refinement edge is the edge opposite the first vertex. Bisection inserts
//! the midpoint of that edge and lists it first in both children, so the
//! convention is preserved across generations. Edges carry a global
//! orientation (lower vertex index first); each triangle records a sign per
//! edge telling whether its outward normal agrees with the global edge normal.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {0} has non-positive area")]
    NonPositiveArea(usize),
    #[error("edge {0} has {1} incident triangles")]
    BadIncidence(usize, usize),
    #[error("interior edge {0} has equal orientation signs on both sides")]
    BadOrientation(usize),
}

/// Cached affine-map data of one triangle.
#[derive(Clone, Debug)]
pub struct TriGeometry {
    /// Columns are v1 - v0 and v2 - v0.
    pub jacobian: [[f64; 2]; 2],
    /// Determinant of the Jacobian, equal to twice the area.
    pub det: f64,
    pub area: f64,
    pub centroid: [f64; 2],
    /// Longest edge length.
    pub diameter: f64,
    /// Outward unit normal of the edge opposite local vertex i.
    pub normals: [[f64; 2]; 3],
    /// Length of the edge opposite local vertex i.
    pub edge_lengths: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Vertex indices, counterclockwise; refinement edge is (v1, v2).
    pub triangles: Vec<[usize; 3]>,
    /// Lower vertex index first.
    pub edges: Vec<[usize; 2]>,
    /// `tri_edges[t][i]` is the edge opposite local vertex i of triangle t.
    pub tri_edges: Vec<[usize; 3]>,
    /// +1 when the element outward normal matches the global edge normal.
    pub tri_edge_signs: Vec<[f64; 3]>,
    pub edge_boundary: Vec<bool>,
    pub vertex_boundary: Vec<bool>,
    /// Triangle index in the mesh this one was refined from; identity for
    /// freshly constructed meshes. Used by tests for nesting checks.
    pub parents: Vec<usize>,
    geometry: Vec<TriGeometry>,
}


fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl Mesh {
    /// Builds connectivity and geometry from vertices and triangles. The
    /// `parents` vector is set to the identity.
    pub fn from_triangles(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Self {
        let parents = (0..triangles.len()).collect();
        Self::assemble(vertices, triangles, parents)
    }

    fn assemble(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, parents: Vec<usize>) -> Self {
        // deterministic global edge list: sorted pairs, lower index first
        let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(3 * triangles.len());
        for t in &triangles {
            for i in 0..3 {
                let u = t[(i + 1) % 3];
                let w = t[(i + 2) % 3];
                pairs.push([u.min(w), u.max(w)]);
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let edges = pairs;

        let edge_id = |a: usize, b: usize| -> usize {
            let key = [a.min(b), a.max(b)];
            edges.binary_search(&key).expect("edge must exist")
        };

        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut tri_edge_signs = Vec::with_capacity(triangles.len());
        let mut incidence = vec![0usize; edges.len()];
        for t in &triangles {
            let mut te = [0usize; 3];
            let mut ts = [0.0f64; 3];
            for i in 0..3 {
                let u = t[(i + 1) % 3];
                let w = t[(i + 2) % 3];
                let e = edge_id(u, w);
                te[i] = e;
                // CCW traversal direction u -> w; outward normal is its
                // clockwise rotation, so signs agree iff u is the lower index
                ts[i] = if u < w { 1.0 } else { -1.0 };
                incidence[e] += 1;
            }
            tri_edges.push(te);
            tri_edge_signs.push(ts);
        }

        let edge_boundary: Vec<bool> = incidence.iter().map(|&c| c == 1).collect();
        let mut vertex_boundary = vec![false; vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if edge_boundary[e] {
                vertex_boundary[a] = true;
                vertex_boundary[b] = true;
            }
        }

        let geometry = triangles
            .iter()
            .map(|&[a, b, c]| {
                let (va, vb, vc) = (vertices[a], vertices[b], vertices[c]);
                let jac = [[vb[0] - va[0], vc[0] - va[0]], [vb[1] - va[1], vc[1] - va[1]]];
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                let corners = [va, vb, vc];
                let mut normals = [[0.0; 2]; 3];
                let mut edge_lengths = [0.0; 3];
                for i in 0..3 {
                    let u = corners[(i + 1) % 3];
                    let w = corners[(i + 2) % 3];
                    let len = dist(u, w);
                    edge_lengths[i] = len;
                    normals[i] = [(w[1] - u[1]) / len, -(w[0] - u[0]) / len];
                }
                TriGeometry {
                    jacobian: jac,
                    det,
                    area: 0.5 * det,
                    centroid: [
                        (va[0] + vb[0] + vc[0]) / 3.0,
                        (va[1] + vb[1] + vc[1]) / 3.0,
                    ],
                    diameter: edge_lengths.iter().cloned().fold(0.0, f64::max),
                    normals,
                    edge_lengths,
                }
            })
            .collect();

        Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            tri_edge_signs,
            edge_boundary,
            vertex_boundary,
            parents,
            geometry,
        }
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn geometry(&self, t: usize) -> &TriGeometry {
        &self.geometry[t]
    }

    /// Maps reference coordinates on the unit triangle into triangle `t`.
    pub fn map_point(&self, t: usize, p: [f64; 2]) -> [f64; 2] {
        let v0 = self.vertices[self.triangles[t][0]];
        let j = &self.geometry[t].jacobian;
        [
            v0[0] + j[0][0] * p[0] + j[0][1] * p[1],
            v0[1] + j[1][0] * p[0] + j[1][1] * p[1],
        ]
    }

    /// Endpoints of edge `e` in global orientation (lower vertex first).
    pub fn edge_points(&self, e: usize) -> ([f64; 2], [f64; 2]) {
        let [a, b] = self.edges[e];
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_points(e);
        dist(a, b)
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Largest diameter^2 / area over all triangles (shape-regularity measure).
    pub fn max_shape_ratio(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.diameter * g.diameter / g.area)
            .fold(0.0, f64::max)
    }

    /// Checks orientation, edge incidence counts, and sign consistency.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (t, g) in self.geometry.iter().enumerate() {
            if g.area <= 0.0 {
                return Err(MeshError::NonPositiveArea(t));
            }
        }
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.edges.len()];
        for (t, te) in self.tri_edges.iter().enumerate() {
            for (i, &e) in te.iter().enumerate() {
                incident[e].push((t, i));
            }
        }
        for (e, inc) in incident.iter().enumerate() {
            match inc.len() {
                1 => {
                    if !self.edge_boundary[e] {
                        return Err(MeshError::BadIncidence(e, 1));
                    }
                }
                2 => {
                    let s0 = self.tri_edge_signs[inc[0].0][inc[0].1];
                    let s1 = self.tri_edge_signs[inc[1].0][inc[1].1];
                    if s0 * s1 != -1.0 {
                        return Err(MeshError::BadOrientation(e));
                    }
                }
                n => return Err(MeshError::BadIncidence(e, n)),
            }
        }
        Ok(())
    }

    /// Newest-vertex bisection of the marked triangles with conforming closure.
    pub fn refine(&self, marked: &[usize]) -> Mesh {
        let mut edge_marked = vec![false; self.edges.len()];
        for &t in marked {
            edge_marked[self.tri_edges[t][0]] = true;
        }
        // closure: a triangle with any marked edge must have its refinement
        // edge marked as well
        loop {
            let mut changed = false;
            for te in &self.tri_edges {
                if (edge_marked[te[0]] || edge_marked[te[1]] || edge_marked[te[2]])
                    && !edge_marked[te[0]]
                {
                    edge_marked[te[0]] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![usize::MAX; self.edges.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if edge_marked[e] {
                midpoint[e] = vertices.len();
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
        }

        let mut triangles = Vec::with_capacity(self.triangles.len() * 2);
        let mut parents = Vec::with_capacity(self.triangles.len() * 2);
        for (t, &[v0, v1, v2]) in self.triangles.iter().enumerate() {
            let te = self.tri_edges[t];
            let (m0, m1, m2) = (midpoint[te[0]], midpoint[te[1]], midpoint[te[2]]);
            let mut push = |tri: [usize; 3]| {
                triangles.push(tri);
                parents.push(t);
            };
            if !edge_marked[te[0]] {
                debug_assert!(!edge_marked[te[1]] && !edge_marked[te[2]]);
                push([v0, v1, v2]);
                continue;
            }
            // first bisection at the refinement edge (v1, v2); children keep
            // the newest vertex first, so their refinement edges are the old
            // outer edges (v0, v1) and (v2, v0)
            if edge_marked[te[2]] {
                push([m2, m0, v0]);
                push([m2, v1, m0]);
            } else {
                push([m0, v0, v1]);
            }
            if edge_marked[te[1]] {
                push([m1, m0, v2]);
                push([m1, v0, m0]);
            } else {
                push([m0, v2, v0]);
            }
        }

        Mesh::assemble(vertices, triangles, parents)
    }

    /// One round of uniform refinement (every triangle bisected once).
    pub fn refine_uniform(&self) -> Mesh {
        let all: Vec<usize> = (0..self.n_triangles()).collect();
        self.refine(&all)
    }
}

/// Structured triangulation of the unit square: n x n cells, each split by
/// its southwest-northeast diagonal, which doubles as the refinement edge.
pub fn make_unit_square(n: usize) -> Mesh {
    assert!(n >= 1);
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            // lower-right apex and upper-left apex; refinement edge is the diagonal
            triangles.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j)]);
            triangles.push([idx(i, j + 1), idx(i, j), idx(i + 1, j + 1)]);
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Rotated L-shaped domain `{ |x1| + |x2| < sqrt(2)/4 }` minus the closed
/// quarter diamond `{ |x1 + sqrt(2)/4| + |x2| <= sqrt(2)/4 }`, with the
/// reentrant corner at the origin.
///
/// The three remaining quarter diamonds are each split by their diagonal
/// through the origin, giving six triangles whose refinement edges all meet
/// at the reentrant corner.
pub fn make_lshape() -> Mesh {
    let s = std::f64::consts::SQRT_2 / 4.0;
    let h = s / 2.0;
    let vertices = vec![
        [0.0, 0.0],  // 0: reentrant corner
        [s, 0.0],    // 1: east corner
        [h, h],      // 2: northeast side midpoint
        [0.0, s],    // 3: north corner
        [-h, h],     // 4: northwest reentrant endpoint
        [-h, -h],    // 5: southwest reentrant endpoint
        [0.0, -s],   // 6: south corner
        [h, -h],     // 7: southeast side midpoint
    ];
    let triangles = vec![
        [2, 0, 1], // east diamond, upper half
        [7, 1, 0], // east diamond, lower half
        [4, 0, 3], // north diamond, left half
        [2, 3, 0], // north diamond, right half
        [7, 0, 6], // south diamond, right half
        [5, 6, 0], // south diamond, left half
    ];
    Mesh::from_triangles(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_square_counts() {
        let m1 = make_unit_square(1);
        assert_eq!(m1.n_triangles(), 2);
        assert_eq!(m1.n_vertices(), 4);
        assert_eq!(m1.n_edges(), 5);
        m1.validate().unwrap();

        let m2 = make_unit_square(2);
        assert_eq!(m2.n_triangles(), 8);
        assert_eq!(m2.n_vertices(), 9);
        assert_eq!(m2.n_edges(), 16);
        m2.validate().unwrap();
    }

    #[test]
    fn unit_square_area_conserved() {
        let m = make_unit_square(4);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lshape_area_three_sixteenths() {
        let m = make_lshape();
        m.validate().unwrap();
        assert!((m.total_area() - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn lshape_area_monte_carlo_oracle() {
        // membership test straight from the set definition
        let s = std::f64::consts::SQRT_2 / 4.0;
        let inside = |x: f64, y: f64| {
            x.abs() + y.abs() < s && !((x + s).abs() + y.abs() <= s)
        };
        let mut hits = 0usize;
        let n = 400_000;
        // deterministic low-discrepancy sweep over the bounding box [-s,s]^2
        let mut u = 0.5_f64;
        let mut v = 0.5_f64;
        for _ in 0..n {
            u = (u + 0.7548776662466927) % 1.0;
            v = (v + 0.5698402909980532) % 1.0;
            if inside((2.0 * u - 1.0) * s, (2.0 * v - 1.0) * s) {
                hits += 1;
            }
        }
        let estimate = hits as f64 / n as f64 * (2.0 * s) * (2.0 * s);
        assert!((estimate - 3.0 / 16.0).abs() < 2e-3, "estimate {estimate}");
        assert!((make_lshape().total_area() - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn lshape_origin_is_vertex_and_boundary_segments() {
        let m = make_lshape();
        assert!(m
            .vertices
            .iter()
            .any(|v| v[0] == 0.0 && v[1] == 0.0));
        // every boundary edge lies on one of the six boundary segments
        let s = std::f64::consts::SQRT_2 / 4.0;
        let on_segment = |p: [f64; 2], q: [f64; 2]| -> bool {
            let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
            let eps = 1e-12;
            let checks: [bool; 6] = [
                (mid[0] + mid[1] - s).abs() < eps && mid[0] >= -eps,      // NE side
                (mid[1] - mid[0] - s).abs() < eps && mid[0] <= eps,       // NW outer half
                (mid[1] + mid[0] + s).abs() < eps && mid[0] <= eps,       // SW outer half
                (mid[0] - mid[1] - s).abs() < eps && mid[0] >= -eps,      // SE side
                (mid[1] - (-mid[0])).abs() < eps && mid[0] <= eps && mid[1] >= -eps, // reentrant upper
                (mid[1] - mid[0]).abs() < eps && mid[0] <= eps && mid[1] <= eps,     // reentrant lower
            ];
            checks.iter().any(|&c| c)
        };
        for (e, &[a, b]) in m.edges.iter().enumerate() {
            if m.edge_boundary[e] {
                assert!(
                    on_segment(m.vertices[a], m.vertices[b]),
                    "boundary edge {e} off the outline"
                );
            }
        }
    }

    #[test]
    fn geometry_of_reference_like_triangle() {
        let m = Mesh::from_triangles(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
        );
        let g = m.geometry(0);
        assert!((g.det - 1.0).abs() < 1e-15);
        assert!((g.area - 0.5).abs() < 1e-15);
        // edge 0 is opposite vertex 0: the hypotenuse
        let r = 0.5f64.sqrt();
        assert!((g.normals[0][0] - r).abs() < 1e-15 && (g.normals[0][1] - r).abs() < 1e-15);
        assert!((g.normals[1][0] + 1.0).abs() < 1e-15 && g.normals[1][1].abs() < 1e-15);
        assert!(g.normals[2][0].abs() < 1e-15 && (g.normals[2][1] + 1.0).abs() < 1e-15);
        assert!((g.edge_lengths[0] - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((g.edge_lengths[1] - 1.0).abs() < 1e-15);
        assert!((g.edge_lengths[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normals_close_up() {
        // sum of length * outward normal vanishes on any triangle
        let m = make_lshape();
        for t in 0..m.n_triangles() {
            let g = m.geometry(t);
            let mut sum = [0.0, 0.0];
            for i in 0..3 {
                sum[0] += g.edge_lengths[i] * g.normals[i][0];
                sum[1] += g.edge_lengths[i] * g.normals[i][1];
            }
            assert!(sum[0].abs() < 1e-14 && sum[1].abs() < 1e-14);
        }
    }

    #[test]
    fn refine_empty_marking_is_identity() {
        let m = make_unit_square(2);
        let r = m.refine(&[]);
        assert_eq!(r.triangles, m.triangles);
        assert_eq!(r.vertices, m.vertices);
    }

    #[test]
    fn refine_both_triangles_of_unit_cell() {
        let m = make_unit_square(1);
        let r = m.refine(&[0, 1]);
        assert_eq!(r.n_triangles(), 4);
        r.validate().unwrap();
        assert!((r.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_nvb_doubles_each_round() {
        let mut m = make_unit_square(1);
        for k in 1..=6 {
            m = m.refine_uniform();
            m.validate().unwrap();
            assert_eq!(m.n_triangles(), 2 * (1 << k), "round {k}");
        }
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_mark_closure_stays_conforming() {
        let mut m = make_lshape();
        for step in 0..8 {
            m = m.refine(&[step % m.n_triangles()]);
            m.validate().unwrap();
        }
        assert!((m.total_area() - 3.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn children_cover_parent() {
        let m = make_lshape();
        let r = m.refine(&[0, 3]);
        let mut child_area = vec![0.0; m.n_triangles()];
        for (t, &p) in r.parents.iter().enumerate() {
            child_area[p] += r.geometry(t).area;
        }
        for t in 0..m.n_triangles() {
            assert!((child_area[t] - m.geometry(t).area).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_regularity_under_uniform_nvb() {
        let m0 = make_unit_square(1);
        let base = m0.max_shape_ratio();
        let mut m = m0;
        for _ in 0..6 {
            m = m.refine_uniform();
        }
        assert!(m.max_shape_ratio() <= 2.0 * base + 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn arbitrary_markings_keep_conformity(seed in any::<u64>()) {
            let mut m = make_lshape();
            let mut state = seed;
            for _ in 0..4 {
                let mut marked = Vec::new();
                for t in 0..m.n_triangles() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if state >> 60 < 6 {
                        marked.push(t);
                    }
                }
                m = m.refine(&marked);
                prop_assert!(m.validate().is_ok());
            }
            prop_assert!((m.total_area() - 3.0/16.0).abs() < 1e-12);
        }
    }
}
