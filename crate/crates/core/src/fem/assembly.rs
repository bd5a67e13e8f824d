//! Global assembly of the reduced (free-DOF) system.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::dofs::{DofKind, DofMap, Formulation, SystemState};
use super::element::{element_bulk, nodal_lmm, nodal_penalty, BulkMaterial, ElementState, ElementSystem, NodalSystem};
use super::shape::{self, MAX_NODES};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Relative size of the fictitious stiffness.
pub const FICTITIOUS_FACTOR: f64 = 1e-8;

const CHUNK: usize = 4096;

/// Constraint-related assembly parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyOptions {
    /// Penalty parameter `η` (N/mm²), used by the penalty formulation.
    pub eta: f64,
    /// `κ_f` (N/mm³): added to the `θθ` diagonal when it is weaker than `κ_f·A`.
    pub kappa_theta: f64,
    /// (mm³/N): `−κ_Λ·A` is added to every `ΛΛ` diagonal.
    pub kappa_lambda: f64,
}

impl AssemblyOptions {
    pub fn new(eta: f64, gc: f64, length_scale: f64) -> Self {
        Self {
            eta,
            kappa_theta: FICTITIOUS_FACTOR * gc / length_scale,
            kappa_lambda: FICTITIOUS_FACTOR * length_scale / gc,
        }
    }
}

/// Mesh, material and DOF layout of one discrete problem, with the cached
/// sparsity pattern of its reduced tangent.
#[derive(Clone, Debug)]
pub struct FeProblem {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub material: BulkMaterial<f64>,
    /// Lumped nodal weights `∫ N_a dΩ` (mm²).
    pub nodal_area: Vec<f64>,
    pattern: CsrMatrix,
}

/// Global residual and tangent at one state.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    /// Reduced tangent over free equations (`Tᵀ K T`).
    pub matrix: Option<CsrMatrix>,
    /// Reduced residual.
    pub residual: Vec<f64>,
    /// Residual at every global DOF; rows of tied DOFs are also accumulated
    /// into their masters.
    pub full_residual: Vec<f64>,
    /// Internal force `(x, y)` summed over every mesh node set (N per unit thickness).
    pub reactions: BTreeMap<String, [f64; 2]>,
    /// Bulk energy (N·mm per unit thickness).
    pub energy: f64,
    /// Quadrature points whose phase field left `[0, 1]`.
    pub clipped_elements: usize,
    /// Diagonal entries that received fictitious stiffness.
    pub regularized: usize,
}

impl AssembledSystem {
    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn element_dofs(dofs: &DofMap, nodes: &[usize]) -> ([usize; 3 * MAX_NODES], usize) {
    let mut out = [0; 3 * MAX_NODES];
    let n = nodes.len();
    for (a, &node) in nodes.iter().enumerate() {
        out[2 * a] = dofs.u(node, 0);
        out[2 * a + 1] = dofs.u(node, 1);
        out[2 * n + a] = dofs.phi(node);
    }
    (out, 3 * n)
}

fn nodal_dofs(dofs: &DofMap, node: usize) -> [Option<usize>; 3] {
    [Some(dofs.phi(node)), Some(dofs.theta(node)), dofs.lambda(node)]
}

impl FeProblem {
    pub fn new(mesh: Mesh, dofs: DofMap, material: BulkMaterial<f64>) -> Result<Self> {
        mesh.validate()?;
        if dofs.n_nodes() != mesh.node_count() {
            return Err(Error::Setup(format!(
                "DOF map has {} nodes, mesh has {}",
                dofs.n_nodes(),
                mesh.node_count()
            )));
        }
        let mut nodal_area = vec![0.0; mesh.node_count()];
        for c in 0..mesh.cell_count() {
            let cell = &mesh.cells[c];
            let sh = shape::evaluate::<f64>(cell.kind(), &mesh.cell_coords(c))
                .map_err(|d| Error::Mesh(format!("element {c} has non-positive Jacobian {d:.3e}")))?;
            let w = shape::lumped_weights(cell.kind(), &sh);
            for (a, &n) in cell.nodes().iter().enumerate() {
                nodal_area[n] += w[a];
            }
        }
        let pattern = Self::build_pattern(&mesh, &dofs);
        Ok(Self {
            mesh,
            dofs,
            material,
            nodal_area,
            pattern,
        })
    }

    fn build_pattern(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dofs.n_free()];
        let (mut ei, mut ej) = (Vec::new(), Vec::new());
        let mut couple = |globals: &[usize], rows: &mut Vec<Vec<usize>>| {
            for &gi in globals {
                dofs.equations(gi, &mut ei);
                for &(r, _) in &ei {
                    for &gj in globals {
                        dofs.equations(gj, &mut ej);
                        rows[r].extend(ej.iter().map(|&(c, _)| c));
                    }
                }
            }
        };
        for cell in &mesh.cells {
            let (g, n) = element_dofs(dofs, cell.nodes());
            couple(&g[..n], &mut rows);
        }
        for node in 0..dofs.n_nodes() {
            let g: Vec<usize> = nodal_dofs(dofs, node).into_iter().flatten().collect();
            couple(&g, &mut rows);
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.push(r);
        }
        CsrMatrix::from_rows(rows)
    }

    pub fn n_free(&self) -> usize {
        self.dofs.n_free()
    }

    /// Sparsity pattern of the reduced tangent (all values zero).
    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    fn element_system(&self, c: usize, state: &SystemState) -> Result<ElementSystem<f64>> {
        let cell = &self.mesh.cells[c];
        let nodes = cell.nodes();
        let mut x = [[0.0; 2]; MAX_NODES];
        let mut u = [[0.0; 2]; MAX_NODES];
        let mut phi = [0.0; MAX_NODES];
        for (a, &n) in nodes.iter().enumerate() {
            x[a] = self.mesh.nodes[n];
            u[a] = state.displacement(&self.dofs, n);
            phi[a] = state.phi(&self.dofs, n);
        }
        let k = nodes.len();
        element_bulk(
            c,
            &ElementState {
                kind: cell.kind(),
                coords: &x[..k],
                u: &u[..k],
                phi: &phi[..k],
            },
            &self.material,
        )
    }

    /// Constraint contribution of one node.
    pub fn nodal_system(&self, node: usize, state: &SystemState, opts: &AssemblyOptions) -> NodalSystem<f64> {
        let a = self.nodal_area[node];
        let h = state.h(&self.dofs, node);
        let theta = state.theta(&self.dofs, node);
        match self.dofs.formulation() {
            Formulation::Lmm => nodal_lmm(a, h, theta, state.lambda(&self.dofs, node)),
            Formulation::Penalty => nodal_penalty(a, h, theta, opts.eta),
        }
    }

    /// Assembles residual and (optionally) tangent at `state`.
    ///
    /// Element kernels run in parallel; contributions are added in element
    /// order, so results do not depend on the thread count.
    pub fn assemble(&self, state: &SystemState, opts: &AssemblyOptions, with_matrix: bool) -> Result<AssembledSystem> {
        state.check(&self.dofs)?;
        let dofs = &self.dofs;
        let mut full = vec![0.0; dofs.total_dofs()];
        let mut matrix = with_matrix.then(|| {
            let mut m = self.pattern.clone();
            m.clear();
            m
        });
        let mut energy = 0.0;
        let mut clipped = 0;
        let (mut ei, mut ej) = (Vec::new(), Vec::new());

        let mut scatter = |globals: &[usize],
                           r: &dyn Fn(usize) -> f64,
                           k: &dyn Fn(usize, usize) -> f64,
                           full: &mut [f64],
                           matrix: &mut Option<CsrMatrix>| {
            for (i, &gi) in globals.iter().enumerate() {
                full[gi] += r(i);
            }
            if let Some(m) = matrix.as_mut() {
                for (i, &gi) in globals.iter().enumerate() {
                    dofs.equations(gi, &mut ei);
                    if ei.is_empty() {
                        continue;
                    }
                    for (j, &gj) in globals.iter().enumerate() {
                        let v = k(i, j);
                        if v == 0.0 {
                            continue;
                        }
                        dofs.equations(gj, &mut ej);
                        for &(re, rc) in &ei {
                            for &(ce, cc) in &ej {
                                m.add(re, ce, rc * cc * v);
                            }
                        }
                    }
                }
            }
        };

        let n_cells = self.mesh.cell_count();
        for start in (0..n_cells).step_by(CHUNK) {
            let end = (start + CHUNK).min(n_cells);
            let systems: Vec<ElementSystem<f64>> = (start..end)
                .into_par_iter()
                .map(|c| self.element_system(c, state))
                .collect::<Result<_>>()?;
            for (c, sys) in (start..end).zip(&systems) {
                let (g, n) = element_dofs(dofs, self.mesh.cells[c].nodes());
                energy += sys.energy;
                clipped += usize::from(sys.clipped);
                scatter(&g[..n], &|i| sys.residual[i], &|i, j| sys.tangent[i][j], &mut full, &mut matrix);
            }
        }

        let mut regularized = 0;
        for node in 0..dofs.n_nodes() {
            let ns = self.nodal_system(node, state, opts);
            let g = nodal_dofs(dofs, node);
            let idx: Vec<usize> = (0..3).filter(|&i| g[i].is_some()).collect();
            let globals: Vec<usize> = idx.iter().map(|&i| g[i].unwrap_or_default()).collect();
            scatter(
                &globals,
                &|i| ns.residual[idx[i]],
                &|i, j| ns.tangent[idx[i]][idx[j]],
                &mut full,
                &mut matrix,
            );
            if let Some(m) = matrix.as_mut() {
                let a = self.nodal_area[node];
                if let DofKind::Free(eq) = dofs.kind(dofs.theta(node)) {
                    if ns.tangent[1][1].abs() < opts.kappa_theta * a {
                        m.add(*eq, *eq, opts.kappa_theta * a);
                        regularized += 1;
                    }
                }
                if let Some(gl) = dofs.lambda(node) {
                    if let DofKind::Free(eq) = dofs.kind(gl) {
                        m.add(*eq, *eq, -opts.kappa_lambda * a);
                        regularized += 1;
                    }
                }
            }
        }

        let mut residual = vec![0.0; dofs.n_free()];
        for (g, kind) in dofs.kinds().iter().enumerate() {
            match kind {
                DofKind::Free(eq) => residual[*eq] += full[g],
                DofKind::Prescribed(_) => {}
                DofKind::Tied(masters) => {
                    for &(m, c) in masters {
                        if let DofKind::Free(eq) = dofs.kind(m) {
                            residual[*eq] += c * full[g];
                        }
                    }
                }
            }
        }
        for (g, kind) in dofs.kinds().iter().enumerate() {
            if let DofKind::Tied(masters) = kind {
                for &(m, c) in masters {
                    full[m] += c * full[g];
                }
            }
        }
        if let Some(i) = residual.iter().position(|v| !v.is_finite()) {
            return Err(Error::Setup(format!("non-finite residual at equation {i}")));
        }
        let reactions = self
            .mesh
            .node_sets
            .iter()
            .map(|(name, ids)| {
                let mut f = [0.0; 2];
                for &n in ids {
                    f[0] += full[dofs.u(n, 0)];
                    f[1] += full[dofs.u(n, 1)];
                }
                (name.clone(), f)
            })
            .collect();
        Ok(AssembledSystem {
            matrix,
            residual,
            full_residual: full,
            reactions,
            energy,
            clipped_elements: clipped,
            regularized,
        })
    }
}
