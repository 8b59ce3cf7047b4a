use graddiv::adaptivity::doerfler_mark;
use graddiv::dpg::{assemble_solve, estimate, SolveOptions};
use graddiv::form::{Formulation, SecondOrder};
use graddiv::layout::Constraint;
use graddiv::problems::{exact_errors, lshape_problem, project_boundary_data, total_error};

fn main() {
    let spec = lshape_problem();
    let form = SecondOrder::lowest();
    let mut mesh = spec.initial_mesh(1);
    for level in 0..28 {
        let layout = form.layout(&mesh);
        let cu = [0.8, -0.45];
        let exact = form.inject_exact(&mesh, &layout, &|_| cu, &|_| 0.0, &|_| [0.0, 0.0], &|_| 0.0);
        let cons: Vec<Constraint> = layout
            .essential_dofs(&mesh)
            .into_iter()
            .map(|dof| Constraint { dof, value: exact[dof] })
            .collect();
        let probe = assemble_solve(&mesh, &form, &layout, &move |_| cu, &cons, SolveOptions::default()).unwrap();
        let rec = probe.coeffs.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let constraints = project_boundary_data(&mesh, &layout, &spec);
        let sol = assemble_solve(&mesh, &form, &layout, &spec.f, &constraints, SolveOptions::default()).unwrap();
        let est = estimate(&mesh, &form, &layout, &spec.f, &sol.coeffs).unwrap();
        let errors = exact_errors(&mesh, &form, &layout, &spec, &sol.coeffs);
        let h_min = (0..mesh.n_triangles()).map(|t| mesh.geometry(t).diameter).fold(f64::INFINITY, f64::min);
        println!(
            "L{level:2} dim {:6} hmin {:8.2e} rec {:9.2e} err {:9.3e} eta {:9.3e}",
            layout.n_total, h_min, rec, total_error(&errors), est.total
        );
        if layout.n_total >= 70000 { break; }
        let marked = doerfler_mark(&est.per_element, 0.75);
        mesh = mesh.refine(&marked);
    }
}
