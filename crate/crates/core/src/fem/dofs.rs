//! Degree-of-freedom bookkeeping for the coupled `u, φ, θ, Λ` system.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    #[default]
    Lmm,
    Penalty,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Lmm => "lmm",
            Formulation::Penalty => "penalty",
        })
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmm" => Ok(Formulation::Lmm),
            "penalty" => Ok(Formulation::Penalty),
            other => Err(Error::param("formulation", format!("expected lmm or penalty, got `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    U,
    Phi,
    Theta,
    Lambda,
    /// Rigid-pin master unknowns (two translations and a rotation).
    Master,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::Phi => "phi",
            Field::Theta => "theta",
            Field::Lambda => "lambda",
            Field::Master => "pin",
        }
    }
}

/// How a global DOF value is determined.
#[derive(Clone, Debug, PartialEq)]
pub enum DofKind {
    /// Unknown with equation number.
    Free(usize),
    /// Value `coeff · u_applied`; `coeff = 0` fixes the DOF at zero.
    Prescribed(f64),
    /// Linear combination of master DOFs.
    Tied(Vec<(usize, f64)>),
}

/// Global numbering: `u` (2 per node), `φ`, `θ`, `Λ` (LMM only), then pin masters.
#[derive(Clone, Debug)]
pub struct DofMap {
    n_nodes: usize,
    formulation: Formulation,
    n_masters: usize,
    kinds: Vec<DofKind>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn new(n_nodes: usize, formulation: Formulation, n_masters: usize) -> Self {
        let per_node = match formulation {
            Formulation::Lmm => 5,
            Formulation::Penalty => 4,
        };
        let total = per_node * n_nodes + n_masters;
        let mut map = Self {
            n_nodes,
            formulation,
            n_masters,
            kinds: vec![DofKind::Free(0); total],
            free: Vec::new(),
        };
        map.renumber();
        map
    }

    fn renumber(&mut self) {
        self.free.clear();
        for (g, k) in self.kinds.iter_mut().enumerate() {
            if let DofKind::Free(eq) = k {
                *eq = self.free.len();
                self.free.push(g);
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn has_lambda(&self) -> bool {
        self.formulation == Formulation::Lmm
    }

    pub fn total_dofs(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_masters(&self) -> usize {
        self.n_masters
    }

    pub fn constrained_count(&self) -> usize {
        self.total_dofs() - self.n_free()
    }

    /// Global DOF of each free equation.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn kind(&self, g: usize) -> &DofKind {
        &self.kinds[g]
    }

    pub fn kinds(&self) -> &[DofKind] {
        &self.kinds
    }

    pub fn u(&self, node: usize, comp: usize) -> usize {
        2 * node + comp
    }

    pub fn phi(&self, node: usize) -> usize {
        2 * self.n_nodes + node
    }

    pub fn theta(&self, node: usize) -> usize {
        3 * self.n_nodes + node
    }

    pub fn lambda(&self, node: usize) -> Option<usize> {
        self.has_lambda().then(|| 4 * self.n_nodes + node)
    }

    pub fn master(&self, m: usize) -> usize {
        self.kinds.len() - self.n_masters + m
    }

    pub fn field_of(&self, g: usize) -> Field {
        let n = self.n_nodes;
        let nodal = self.kinds.len() - self.n_masters;
        match g {
            _ if g >= nodal => Field::Master,
            _ if g < 2 * n => Field::U,
            _ if g < 3 * n => Field::Phi,
            _ if g < 4 * n => Field::Theta,
            _ => Field::Lambda,
        }
    }

    /// Node owning a nodal DOF.
    pub fn node_of(&self, g: usize) -> Option<usize> {
        let n = self.n_nodes;
        match self.field_of(g) {
            Field::U => Some(g / 2),
            Field::Phi => Some(g - 2 * n),
            Field::Theta => Some(g - 3 * n),
            Field::Lambda => Some(g - 4 * n),
            Field::Master => None,
        }
    }

    /// Sets DOF kinds; free equations are renumbered in global order.
    pub fn constrain(&mut self, constraints: impl IntoIterator<Item = (usize, DofKind)>) -> Result<()> {
        for (g, kind) in constraints {
            if g >= self.kinds.len() {
                return Err(Error::Setup(format!("constraint on DOF {g} out of range")));
            }
            if let DofKind::Tied(masters) = &kind {
                if let Some(&(m, _)) = masters
                    .iter()
                    .find(|(m, _)| *m >= self.kinds.len() || matches!(self.kinds[*m], DofKind::Tied(_)))
                {
                    return Err(Error::Setup(format!("DOF {g} tied to invalid master {m}")));
                }
            }
            self.kinds[g] = kind;
        }
        self.renumber();
        Ok(())
    }

    /// Reduced-space contributions `(equation, coefficient)` of a global DOF.
    pub fn equations(&self, g: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        match &self.kinds[g] {
            DofKind::Free(eq) => out.push((*eq, 1.0)),
            DofKind::Prescribed(_) => {}
            DofKind::Tied(masters) => {
                for &(m, c) in masters {
                    if let DofKind::Free(eq) = self.kinds[m] {
                        out.push((eq, c));
                    }
                }
            }
        }
    }
}

/// Nodal and master values of all fields plus step bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub values: Vec<f64>,
    /// `ⁿφ`, the converged phase field of the previous step.
    pub phi_prev: Vec<f64>,
    pub t: f64,
    pub step: usize,
    pub u_applied: f64,
}

impl SystemState {
    pub fn new(dofs: &DofMap) -> Self {
        Self {
            values: vec![0.0; dofs.total_dofs()],
            phi_prev: vec![0.0; dofs.n_nodes()],
            t: 0.0,
            step: 0,
            u_applied: 0.0,
        }
    }

    pub fn check(&self, dofs: &DofMap) -> Result<()> {
        if self.values.len() != dofs.total_dofs() || self.phi_prev.len() != dofs.n_nodes() {
            return Err(Error::Setup(format!(
                "state has {} values / {} nodes, DOF map expects {} / {}",
                self.values.len(),
                self.phi_prev.len(),
                dofs.total_dofs(),
                dofs.n_nodes()
            )));
        }
        Ok(())
    }

    /// Writes prescribed values for the current `u_applied` and refreshes tied DOFs.
    pub fn apply_constraints(&mut self, dofs: &DofMap) {
        for (g, k) in dofs.kinds().iter().enumerate() {
            if let DofKind::Prescribed(c) = k {
                self.values[g] = c * self.u_applied;
            }
        }
        self.sync_tied(dofs);
    }

    pub fn sync_tied(&mut self, dofs: &DofMap) {
        for (g, k) in dofs.kinds().iter().enumerate() {
            if let DofKind::Tied(masters) = k {
                self.values[g] = masters.iter().map(|&(m, c)| c * self.values[m]).sum();
            }
        }
    }

    pub fn phi(&self, dofs: &DofMap, node: usize) -> f64 {
        self.values[dofs.phi(node)]
    }

    pub fn theta(&self, dofs: &DofMap, node: usize) -> f64 {
        self.values[dofs.theta(node)]
    }

    pub fn lambda(&self, dofs: &DofMap, node: usize) -> f64 {
        dofs.lambda(node).map_or(0.0, |g| self.values[g])
    }

    pub fn displacement(&self, dofs: &DofMap, node: usize) -> [f64; 2] {
        [self.values[dofs.u(node, 0)], self.values[dofs.u(node, 1)]]
    }

    /// Constraint function `h = φ − ⁿφ` at a node.
    pub fn h(&self, dofs: &DofMap, node: usize) -> f64 {
        self.phi(dofs, node) - self.phi_prev[node]
    }

    /// Accepts the current phase field as `ⁿφ`.
    pub fn commit_phase(&mut self, dofs: &DofMap) {
        for a in 0..dofs.n_nodes() {
            self.phi_prev[a] = self.values[dofs.phi(a)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_dense_and_disjoint() {
        let m = DofMap::new(3, Formulation::Lmm, 3);
        let mut seen = vec![false; m.total_dofs()];
        for a in 0..3 {
            for g in [m.u(a, 0), m.u(a, 1), m.phi(a), m.theta(a), m.lambda(a).unwrap()] {
                assert!(!seen[g]);
                seen[g] = true;
            }
        }
        for k in 0..3 {
            assert!(!seen[m.master(k)]);
            seen[m.master(k)] = true;
            assert_eq!(m.field_of(m.master(k)), Field::Master);
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(m.field_of(m.lambda(2).unwrap()), Field::Lambda);
        assert_eq!(m.node_of(m.theta(1)), Some(1));
        assert!(DofMap::new(3, Formulation::Penalty, 0).lambda(0).is_none());
    }

    #[test]
    fn constraints_renumber_free_equations() {
        let mut m = DofMap::new(2, Formulation::Penalty, 1);
        let master = m.master(0);
        m.constrain([(0, DofKind::Prescribed(0.0)), (1, DofKind::Tied(vec![(master, 2.0)]))])
            .unwrap();
        assert_eq!(m.n_free(), m.total_dofs() - 2);
        let mut eqs = Vec::new();
        m.equations(1, &mut eqs);
        assert_eq!(eqs, vec![(m.n_free() - 1, 2.0)]);
        let mut s = SystemState::new(&m);
        s.values[master] = 0.5;
        s.sync_tied(&m);
        assert_eq!(s.values[1], 1.0);
    }
}
