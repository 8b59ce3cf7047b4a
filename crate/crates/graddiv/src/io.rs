//! VTK legacy ASCII export and CSV writers.
//!
//! File layouts are documented in docs/io.md. All numbers are written with
//! Rust's shortest-roundtrip float formatting, so identical runs produce
//! byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::adaptivity::ConvergenceRecord;
use crate::form::Formulation;
use crate::layout::{DofLayout, TraceKind};
use crate::mesh::Mesh;

/// Legacy unstructured-grid file with optional cell and point arrays.
pub fn write_vtk<P: AsRef<Path>>(
    path: P,
    mesh: &Mesh,
    cell_data: &[(String, Vec<f64>)],
    point_data: &[(String, Vec<f64>)],
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "graddiv export")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} 0", v[0], v[1])?;
    }
    writeln!(w, "CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles())?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_triangles())?;
    for _ in 0..mesh.n_triangles() {
        writeln!(w, "5")?;
    }
    if !cell_data.is_empty() {
        writeln!(w, "CELL_DATA {}", mesh.n_triangles())?;
        for (name, values) in cell_data {
            assert_eq!(values.len(), mesh.n_triangles());
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values {
                writeln!(w, "{v}")?;
            }
        }
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        for (name, values) in point_data {
            assert_eq!(values.len(), mesh.n_vertices());
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values {
                writeln!(w, "{v}")?;
            }
        }
    }
    w.flush()
}

/// Element means of every field-variable component, named `<var>_<comp>`.
pub fn solution_cell_data(
    mesh: &Mesh,
    form: &dyn Formulation,
    layout: &DofLayout,
    coeffs: &[f64],
) -> Vec<(String, Vec<f64>)> {
    let vars = form.variables();
    let mut arrays: Vec<(String, Vec<f64>)> = vars
        .iter()
        .flat_map(|v| {
            (0..v.components).map(move |c| {
                let name = if v.components == 1 {
                    v.name.to_string()
                } else {
                    format!("{}_{}", v.name, ["x", "y"][c])
                };
                (name, Vec::with_capacity(mesh.n_triangles()))
            })
        })
        .collect();
    for t in 0..mesh.n_triangles() {
        let centroid = mesh.geometry(t).centroid;
        let fields = form.eval_fields(mesh, layout, coeffs, t, &[centroid]);
        let mut k = 0;
        for (vi, v) in vars.iter().enumerate() {
            for c in 0..v.components {
                arrays[k].1.push(fields[vi][(0, c)]);
                k += 1;
            }
        }
    }
    arrays
}

/// Vertex values of the continuous trace families, one array per family.
pub fn trace_point_data(
    mesh: &Mesh,
    layout: &DofLayout,
    coeffs: &[f64],
    names: &[&str],
) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    let mut names = names.iter();
    for fam in &layout.families {
        if let TraceKind::Continuous { .. } = fam.kind {
            let name = names.next().expect("one name per continuous family");
            let values = (0..mesh.n_vertices())
                .map(|v| coeffs[fam.vertex_dof(v)])
                .collect();
            out.push((name.to_string(), values));
        }
    }
    out
}

/// Fixed-schema convergence table. The `e_w` column holds the error of the
/// grad-div field variable (u3 for the first-order scheme, w for the
/// second), `e_u` the error of the primary field.
pub fn write_convergence_csv<W: Write>(
    w: &mut W,
    records: &[ConvergenceRecord],
    grad_div_var: usize,
) -> io::Result<()> {
    writeln!(w, "level,nelems,dim,e_u,e_w,eta,eoc_u,eoc_eta")?;
    for r in records {
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x}"),
            None => "nan".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.level,
            r.n_elements,
            r.dim,
            r.errors[0],
            r.errors[grad_div_var],
            r.eta,
            fmt_opt(r.eoc_error),
            fmt_opt(r.eoc_eta),
        )?;
    }
    Ok(())
}

/// One coefficient per line, for regression comparisons.
pub fn write_dof_csv<W: Write>(w: &mut W, coeffs: &[f64]) -> io::Result<()> {
    writeln!(w, "dof,value")?;
    for (i, v) in coeffs.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_unit_square;

    #[test]
    fn vtk_layout_for_small_mesh() {
        let mesh = make_unit_square(1);
        let dir = std::env::temp_dir().join("graddiv_vtk_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mesh.vtk");
        write_vtk(
            &path,
            &mesh,
            &[("area".to_string(), vec![0.5, 0.5])],
            &[],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        assert!(text.contains("CELL_TYPES 2"));
        assert!(text.contains("SCALARS area double 1"));
        let fives = text.lines().filter(|l| *l == "5").count();
        assert_eq!(fives, 2);
    }

    #[test]
    fn csv_schema_is_stable() {
        let records = vec![ConvergenceRecord {
            level: 0,
            n_elements: 8,
            dim: 98,
            errors: vec![0.5, 0.25, 0.125, 0.0625],
            error_total: 0.6,
            eta: 0.7,
            eoc_error: None,
            eoc_eta: None,
        }];
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &records, 2).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "level,nelems,dim,e_u,e_w,eta,eoc_u,eoc_eta"
        );
        assert_eq!(lines.next().unwrap(), "0,8,98,0.5,0.125,0.7,nan,nan");
    }
}
