//! Monolithic Newton iteration for one load step.

use log::{debug, trace, warn};

use super::config::SolverConfig;
use super::linear::SparseLu;
use super::norm::{error_norm, FieldUpdate};
use crate::error::{Error, Result};
use crate::fem::{AssembledSystem, AssemblyOptions, DofKind, FeProblem, Field, Formulation, SystemState};

/// Outcome of a converged step.
#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub iterations: usize,
    pub err: f64,
    pub err_trace: Vec<f64>,
    /// Dual-feasibility restarts performed.
    pub restarts: usize,
    /// Residual-only assembly at the converged state (reactions).
    pub system: AssembledSystem,
}

pub fn assembly_options(problem: &FeProblem, cfg: &SolverConfig) -> AssemblyOptions {
    AssemblyOptions::new(cfg.eta, problem.material.gc, problem.material.length_scale)
}

/// Free equations grouped by field for the error norm; pin masters count as `u`.
pub(crate) fn field_groups(problem: &FeProblem) -> [Vec<usize>; 4] {
    let mut groups: [Vec<usize>; 4] = Default::default();
    for (eq, &g) in problem.dofs.free_dofs().iter().enumerate() {
        let k = match problem.dofs.field_of(g) {
            Field::U | Field::Master => 0,
            Field::Phi => 1,
            Field::Theta => 2,
            Field::Lambda => 3,
        };
        groups[k].push(eq);
    }
    groups
}

/// Raises free slack variables to at least `seed` in magnitude.
pub fn seed_slack(problem: &FeProblem, state: &mut SystemState, seed: f64) {
    let dofs = &problem.dofs;
    for a in 0..dofs.n_nodes() {
        let g = dofs.theta(a);
        if matches!(dofs.kind(g), DofKind::Free(_)) {
            state.values[g] = state.values[g].abs().max(seed);
        }
    }
}

/// Sets `θ = ±√max(h, 0)` keeping the sign of `θ`. Every solution of either
/// formulation satisfies this, except the spurious `θ = 0, h > 0` branch.
/// A node leaving that branch counts as a release: under LMM a node held at
/// `θ = 0` by a negative multiplier gets `Λ = 0` and `θ` raised to `seed`;
/// under the penalty method the projection itself lifts `θ` off zero. Each
/// node is released at most `max_releases` times per step, after which it
/// follows the plain Newton update; this stops active-set cycling.
/// `theta_before` is the slack before the update. Returns the DOFs that may have changed.
#[allow(clippy::too_many_arguments)]
fn project_slack(
    problem: &FeProblem,
    state: &mut SystemState,
    a: usize,
    theta_before: f64,
    seed: f64,
    lambda_tol: f64,
    releases: &mut [u32],
    max_releases: u32,
) -> [Option<usize>; 2] {
    let dofs = &problem.dofs;
    let gt = dofs.theta(a);
    if !matches!(dofs.kind(gt), DofKind::Free(_)) {
        return [None, None];
    }
    let r = state.h(dofs, a).max(0.0).sqrt();
    let sign = if state.values[gt] < 0.0 { -1.0 } else { 1.0 };
    let gl = dofs.lambda(a);
    match gl {
        Some(gl) => {
            state.values[gt] = sign * r;
            if state.values[gl] < -lambda_tol && releases[a] < max_releases && matches!(dofs.kind(gl), DofKind::Free(_)) {
                releases[a] += 1;
                state.values[gl] = 0.0;
                state.values[gt] = sign * r.max(seed);
            }
        }
        None => {
            if theta_before == 0.0 && r > 0.0 {
                if releases[a] >= max_releases {
                    return [None, None];
                }
                releases[a] += 1;
            }
            state.values[gt] = sign * r;
        }
    }
    [Some(gt), gl]
}

/// Counts nodes converged onto the `θ = 0` branch with a multiplier of the
/// wrong sign, reseeding them when `reseed` is set.
fn restore_dual_feasibility(problem: &FeProblem, state: &mut SystemState, cfg: &SolverConfig, reseed: bool) -> usize {
    let dofs = &problem.dofs;
    let lambda_tol = 1e-6 * cfg.lambda_scale(problem.material.gc, problem.material.length_scale);
    let gap_tol = 1e-4 * cfg.tol;
    let mut count = 0;
    for a in 0..dofs.n_nodes() {
        let gt = dofs.theta(a);
        if !matches!(dofs.kind(gt), DofKind::Free(_)) {
            continue;
        }
        match dofs.formulation() {
            Formulation::Lmm => {
                let gl = dofs.lambda(a).expect("LMM has Λ");
                if state.values[gl] < -lambda_tol {
                    if reseed {
                        state.values[gl] = 0.0;
                        state.values[gt] = cfg.theta_seed;
                    }
                    count += 1;
                }
            }
            Formulation::Penalty => {
                let h = state.h(dofs, a);
                let th = state.values[gt];
                if h - th * th > gap_tol {
                    if reseed {
                        state.values[gt] = h.max(0.0).sqrt().max(cfg.theta_seed);
                    }
                    count += 1;
                }
            }
        }
    }
    count
}

/// Smallest multiplier over free slack nodes; `−η(h − θ²)` for the penalty method.
fn worst_multiplier(problem: &FeProblem, state: &SystemState, cfg: &SolverConfig) -> f64 {
    let dofs = &problem.dofs;
    (0..dofs.n_nodes())
        .filter(|&a| matches!(dofs.kind(dofs.theta(a)), DofKind::Free(_)))
        .map(|a| match dofs.formulation() {
            Formulation::Lmm => state.lambda(dofs, a),
            Formulation::Penalty => {
                let th = state.theta(dofs, a);
                -cfg.eta * (state.h(dofs, a) - th * th)
            }
        })
        .fold(0.0, f64::min)
}

/// Newton iteration at fixed boundary data. `state` must already carry the
/// step's prescribed values and `ⁿφ`.
pub fn newton_step(problem: &FeProblem, state: &mut SystemState, cfg: &SolverConfig, lu: &mut SparseLu) -> Result<NewtonReport> {
    let opts = assembly_options(problem, cfg);
    let groups = field_groups(problem);
    let scales = [
        cfg.scale_u,
        cfg.scale_phi,
        cfg.scale_theta,
        cfg.lambda_scale(problem.material.gc, problem.material.length_scale),
    ];
    let free = problem.dofs.free_dofs();
    let lambda_tol = 1e-6 * scales[3];
    let mut releases = vec![0u32; problem.dofs.n_nodes()];
    let mut trace_err = Vec::new();
    let mut restarts = 0;
    let mut iterations = 0;
    let mut budget = cfg.max_iters;
    loop {
        let mut converged = false;
        while budget > 0 {
            budget -= 1;
            iterations += 1;
            let sys = problem.assemble(state, &opts, true)?;
            let k = sys.matrix.as_ref().expect("matrix requested");
            let rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
            let mut du = lu.solve(k, &rhs)?;
            let before = if cfg.project_slack { state.values.clone() } else { Vec::new() };
            for (eq, &g) in free.iter().enumerate() {
                state.values[g] += du[eq];
            }
            state.sync_tied(&problem.dofs);
            if cfg.project_slack {
                for a in 0..problem.dofs.n_nodes() {
                    let theta_before = before[problem.dofs.theta(a)];
                    let touched = project_slack(
                        problem,
                        state,
                        a,
                        theta_before,
                        cfg.theta_seed,
                        lambda_tol,
                        &mut releases,
                        cfg.max_releases,
                    );
                    for g in touched.into_iter().flatten() {
                        if let DofKind::Free(eq) = *problem.dofs.kind(g) {
                            // report the change actually made this iteration
                            du[eq] = state.values[g] - before[g];
                        }
                    }
                }
            }
            let upd: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&e| du[e]).collect()).collect();
            let sol: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&e| state.values[free[e]]).collect()).collect();
            let fields: Vec<FieldUpdate<'_>> = (0..4)
                .map(|j| FieldUpdate {
                    update: &upd[j],
                    solution: &sol[j],
                    scale: scales[j],
                })
                .collect();
            let err = error_norm(&fields);
            trace!("iteration {iterations}: err = {err:.3e}, |R| = {:.3e}", sys.residual_norm());
            trace_err.push(err);
            if !err.is_finite() {
                break;
            }
            // the first update is measured from the previous step's state and
            // cannot certify equilibrium on its own
            if err < cfg.tol && budget + 2 <= cfg.max_iters {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations,
                last_err: trace_err.last().copied().unwrap_or(f64::INFINITY),
                trace: trace_err,
            });
        }
        let reseed = restarts < cfg.max_restarts;
        let n = restore_dual_feasibility(problem, state, cfg, reseed);
        if n == 0 {
            break;
        }
        if !reseed {
            let worst = worst_multiplier(problem, state, cfg);
            if worst < -cfg.dual_tolerance * scales[3] {
                return Err(Error::DualInfeasible { nodes: n, worst });
            }
            warn!("{n} nodes remain dual infeasible after {restarts} restarts (min Λ = {worst:.3e}); accepting");
            break;
        }
        debug!("restart {}: reseeded {n} slack variables", restarts + 1);
        restarts += 1;
        budget = cfg.max_iters;
    }
    let system = problem.assemble(state, &opts, false)?;
    Ok(NewtonReport {
        iterations,
        err: *trace_err.last().expect("at least one iteration"),
        err_trace: trace_err,
        restarts,
        system,
    })
}
