//! Legacy ASCII VTK unstructured grids.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::{DofMap, SystemState};
use crate::mesh::{Cell, Mesh};

const VTK_TRIANGLE: u8 = 5;
const VTK_QUAD: u8 = 9;

fn scalars(s: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(s, "{v:e}");
    }
}

fn geometry(s: &mut String, mesh: &Mesh, title: &str) {
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.node_count());
    for [x, y] in &mesh.nodes {
        let _ = writeln!(s, "{x:e} {y:e} 0");
    }
    let size: usize = mesh.cells.iter().map(|c| c.nodes().len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.cell_count());
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.nodes().len());
        for n in c.nodes() {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cell_count());
    for c in &mesh.cells {
        let t = match c {
            Cell::Quad4(_) => VTK_QUAD,
            Cell::Tri3(_) => VTK_TRIANGLE,
        };
        let _ = writeln!(s, "{t}");
    }
}

/// Mesh only.
pub fn mesh_vtk(mesh: &Mesh) -> String {
    let mut s = String::new();
    geometry(&mut s, mesh, "mesh");
    s
}

/// Mesh with nodal `u`, `phi` (clipped to [0, 1]), `theta`, `lambda` when the
/// state has multipliers, and the slack gap `h - theta^2`.
pub fn fields_vtk(mesh: &Mesh, dofs: &DofMap, state: &SystemState) -> Result<String> {
    if mesh.node_count() != dofs.n_nodes() {
        return Err(Error::Setup(format!(
            "mesh has {} nodes but the DOF map {}",
            mesh.node_count(),
            dofs.n_nodes()
        )));
    }
    state.check(dofs)?;
    let n = mesh.node_count();
    let mut s = String::new();
    geometry(&mut s, mesh, &format!("step {} u = {:e} mm", state.step, state.u_applied));
    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "VECTORS u double");
    for a in 0..n {
        let [ux, uy] = state.displacement(dofs, a);
        let _ = writeln!(s, "{ux:e} {uy:e} 0");
    }
    scalars(&mut s, "phi", (0..n).map(|a| state.phi(dofs, a).clamp(0.0, 1.0)));
    scalars(&mut s, "theta", (0..n).map(|a| state.theta(dofs, a)));
    if dofs.has_lambda() {
        scalars(&mut s, "lambda", (0..n).map(|a| state.lambda(dofs, a)));
    }
    scalars(
        &mut s,
        "slack_gap",
        (0..n).map(|a| {
            let th = state.theta(dofs, a);
            state.h(dofs, a) - th * th
        }),
    );
    Ok(s)
}

pub fn write_fields(mesh: &Mesh, dofs: &DofMap, state: &SystemState, path: &Path) -> Result<()> {
    let text = fields_vtk(mesh, dofs, state)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
