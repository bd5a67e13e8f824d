//! Numerical check of the irreversibility KKT conditions
//! `h ≥ 0`, `Λ ≥ 0`, `Λ h = 0` with `h = φ − ⁿφ`.

use serde::{Deserialize, Serialize};

use super::dofs::{DofMap, Formulation, SystemState};

/// Worst nodal values of each condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `min_a min(h_a, 0)`.
    pub primal: f64,
    /// `min_a min(Λ_a, 0)`; for the penalty method `Λ = −η(h − θ²)`.
    pub dual: f64,
    /// `max_a |Λ_a h_a|`.
    pub complementarity: f64,
    /// `max_a |Λ_a θ_a|`.
    pub lambda_theta: f64,
    /// `max_a |θ_a² − h_a|`.
    pub slack: f64,
    pub worst_primal_node: Option<usize>,
    pub worst_dual_node: Option<usize>,
}

/// Multiplier at a node: the LMM unknown or the penalty equivalent.
pub fn multiplier(dofs: &DofMap, state: &SystemState, node: usize, eta: f64) -> f64 {
    match dofs.formulation() {
        Formulation::Lmm => state.lambda(dofs, node),
        Formulation::Penalty => {
            let th = state.theta(dofs, node);
            -eta * (state.h(dofs, node) - th * th)
        }
    }
}

pub fn kkt_report(dofs: &DofMap, state: &SystemState, eta: f64) -> KktReport {
    let mut r = KktReport::default();
    for a in 0..dofs.n_nodes() {
        let h = state.h(dofs, a);
        let th = state.theta(dofs, a);
        let lam = multiplier(dofs, state, a, eta);
        if h.min(0.0) < r.primal {
            r.primal = h;
            r.worst_primal_node = Some(a);
        }
        if lam.min(0.0) < r.dual {
            r.dual = lam;
            r.worst_dual_node = Some(a);
        }
        r.complementarity = r.complementarity.max((lam * h).abs());
        r.lambda_theta = r.lambda_theta.max((lam * th).abs());
        r.slack = r.slack.max((th * th - h).abs());
    }
    r
}

/// Thresholds applied to a [`KktReport`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktTolerance {
    pub primal: f64,
    pub dual: f64,
    pub lambda_theta: f64,
    pub complementarity: f64,
}

impl KktReport {
    pub fn passes(&self, tol: &KktTolerance) -> bool {
        self.primal >= -tol.primal
            && self.dual >= -tol.dual
            && self.lambda_theta <= tol.lambda_theta
            && self.complementarity <= tol.complementarity
    }
}
