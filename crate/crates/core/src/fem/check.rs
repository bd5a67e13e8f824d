//! Finite-difference verification of the assembled tangent.

use super::assembly::{AssemblyOptions, FeProblem};
use super::dofs::{Field, SystemState};
use super::shape;
use crate::error::Result;
use crate::tensor::{eigen, Tensor2s};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentCheck {
    /// `max |K_fd − K|` over all entries.
    pub max_diff: f64,
    /// `max |K|`.
    pub max_entry: f64,
}

impl TangentCheck {
    pub fn relative(&self) -> f64 {
        self.max_diff / self.max_entry.max(f64::MIN_POSITIVE)
    }
}

/// Compares the reduced tangent at `state` with central differences of the
/// reduced residual. `steps` gives the perturbation for `u`, `φ`, `θ` and `Λ`.
pub fn tangent_fd_check(problem: &FeProblem, state: &SystemState, opts: &AssemblyOptions, steps: [f64; 4]) -> Result<TangentCheck> {
    let sys = problem.assemble(state, opts, true)?;
    let k = sys.matrix.expect("matrix requested").to_dense();
    let free = problem.dofs.free_dofs();
    let mut out = TangentCheck {
        max_diff: 0.0,
        max_entry: k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let mut s = state.clone();
    for (j, &g) in free.iter().enumerate() {
        let d = match problem.dofs.field_of(g) {
            Field::U | Field::Master => steps[0],
            Field::Phi => steps[1],
            Field::Theta => steps[2],
            Field::Lambda => steps[3],
        };
        let x = s.values[g];
        s.values[g] = x + d;
        s.sync_tied(&problem.dofs);
        let rp = problem.assemble(&s, opts, false)?.residual;
        s.values[g] = x - d;
        s.sync_tied(&problem.dofs);
        let rm = problem.assemble(&s, opts, false)?.residual;
        s.values[g] = x;
        for i in 0..free.len() {
            let fd = (rp[i] - rm[i]) / (2.0 * d);
            out.max_diff = out.max_diff.max((fd - k[i][j]).abs());
        }
    }
    s.sync_tied(&problem.dofs);
    Ok(out)
}

/// True when some Gauss-point strain has a principal value or trace within
/// `tol` of zero, or two principal values within `tol` of each other, where
/// the split energy is not twice differentiable or its tangent is evaluated
/// in the coincident-eigenvalue limit.
pub fn near_split_kink(problem: &FeProblem, state: &SystemState, tol: f64) -> bool {
    let mesh = &problem.mesh;
    for (c, cell) in mesh.cells.iter().enumerate() {
        let coords = mesh.cell_coords(c);
        let Ok(gps) = shape::evaluate(cell.kind(), &coords) else {
            return true;
        };
        for gp in &gps {
            let mut e = [0.0; 3];
            for (a, &n) in cell.nodes().iter().enumerate() {
                let [ux, uy] = state.displacement(&problem.dofs, n);
                let [dx, dy] = gp.dndx[a];
                e[0] += dx * ux;
                e[1] += dy * uy;
                e[2] += 0.5 * (dy * ux + dx * uy);
            }
            let eps = Tensor2s::new(e[0], e[1], e[2]);
            let (l, _) = eigen(&eps);
            if l[0].abs() < tol || l[1].abs() < tol || (l[0] - l[1]).abs() < tol || eps.trace().abs() < tol {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{BulkMaterial, DofMap, Formulation};
    use crate::material::PhaseFieldModel;
    use crate::mesh::generate_rect_mesh;
    use crate::tensor::LameParams;

    #[test]
    fn smooth_state_passes() {
        let mesh = generate_rect_mesh(2.0, 2.0, 1.0, &[]).unwrap();
        let dofs = DofMap::new(mesh.node_count(), Formulation::Lmm, 0);
        let mat = BulkMaterial {
            model: PhaseFieldModel::BrittleAt2,
            lame: LameParams::new(100.0, 80.0).unwrap(),
            gc: 2.7,
            length_scale: 0.5,
        };
        let p = FeProblem::new(mesh, dofs, mat).unwrap();
        let mut s = SystemState::new(&p.dofs);
        for a in 0..p.dofs.n_nodes() {
            let [x, y] = p.mesh.nodes[a];
            s.values[p.dofs.u(a, 0)] = 1e-3 * x + 2e-4 * y * y;
            s.values[p.dofs.u(a, 1)] = 5e-4 * y - 1e-4 * x * y;
            s.values[p.dofs.phi(a)] = 0.1 + 0.05 * x;
            s.values[p.dofs.theta(a)] = 0.2;
            s.values[p.dofs.lambda(a).unwrap()] = 1.5;
        }
        assert!(!near_split_kink(&p, &s, 1e-6));
        let opts = AssemblyOptions::new(1e6, 2.7, 0.5);
        let r = tangent_fd_check(&p, &s, &opts, [1e-8, 1e-6, 1e-6, 1e-4]).unwrap();
        assert!(r.relative() < 1e-5, "{r:?}");
    }
}
