//! Pseudo-time stepping over a displacement schedule.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{SolverConfig, StepSchedule};
use super::linear::SparseLu;
use super::newton::{newton_step, seed_slack, NewtonReport};
use crate::error::{Error, Result};
use crate::fem::{kkt_report, AssembledSystem, FeProblem, KktReport, SystemState};

/// DOFs whose summed residual is the reported reaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub dofs: Vec<usize>,
    /// Orientation applied to the reaction so that the loading direction is positive.
    pub sign: f64,
}

impl Monitor {
    /// Reaction (N per unit thickness).
    pub fn reaction(&self, sys: &AssembledSystem) -> f64 {
        self.sign * self.dofs.iter().map(|&g| sys.full_residual[g]).sum::<f64>()
    }
}

/// A discrete problem with its loading output.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub fe: FeProblem,
    pub monitor: Monitor,
    /// Out-of-plane thickness (mm) multiplying reactions.
    pub thickness: f64,
}

impl LoadedProblem {
    pub fn load_kn(&self, sys: &AssembledSystem) -> f64 {
        self.monitor.reaction(sys) * self.thickness / 1000.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub u_mm: f64,
    pub load_kn: f64,
    /// Newton iterations summed over sub-steps.
    pub iters: usize,
    pub err: f64,
    pub substeps: usize,
    pub restarts: usize,
}

#[derive(Debug)]
pub enum Outcome {
    /// Every schedule step was taken.
    Completed,
    /// A stop criterion fired.
    Stopped(String),
    /// The step after the last record failed even after halving.
    Failed(Error),
}

#[derive(Debug)]
pub struct SimulationResult {
    pub records: Vec<StepRecord>,
    pub kkt: Vec<KktReport>,
    /// Last accepted state.
    pub state: SystemState,
    pub outcome: Outcome,
}

impl SimulationResult {
    pub fn peak_load(&self) -> f64 {
        self.records.iter().map(|r| r.load_kn).fold(0.0, f64::max)
    }
}

/// Callback after each accepted step, before `ⁿφ` is advanced, so that
/// `h = φ − ⁿφ` refers to the step just taken.
pub trait StepObserver {
    fn on_step(&mut self, problem: &LoadedProblem, state: &SystemState, record: &StepRecord, kkt: &KktReport) -> Result<()>;
}

impl StepObserver for () {
    fn on_step(&mut self, _: &LoadedProblem, _: &SystemState, _: &StepRecord, _: &KktReport) -> Result<()> {
        Ok(())
    }
}

impl<F> StepObserver for F
where
    F: FnMut(&LoadedProblem, &SystemState, &StepRecord, &KktReport) -> Result<()>,
{
    fn on_step(&mut self, problem: &LoadedProblem, state: &SystemState, record: &StepRecord, kkt: &KktReport) -> Result<()> {
        self(problem, state, record, kkt)
    }
}

struct Advance {
    iters: usize,
    err: f64,
    substeps: usize,
    restarts: usize,
    last: NewtonReport,
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. } | Error::DualInfeasible { .. } | Error::LinearSolve(_) | Error::ElementNaN { .. } | Error::Setup(_)
    )
}

/// Leaves `ⁿφ` at the start of the last sub-step.
fn advance(problem: &FeProblem, state: &mut SystemState, du: f64, depth: usize, cfg: &SolverConfig, lu: &mut SparseLu) -> Result<Advance> {
    let backup = state.clone();
    state.u_applied += du;
    state.apply_constraints(&problem.dofs);
    if !cfg.project_slack {
        seed_slack(problem, state, cfg.theta_seed);
    }
    match newton_step(problem, state, cfg, lu) {
        Ok(rep) => Ok(Advance {
            iters: rep.iterations,
            err: rep.err,
            substeps: 1,
            restarts: rep.restarts,
            last: rep,
        }),
        Err(e) if recoverable(&e) && depth < cfg.max_halvings => {
            *state = backup.clone();
            warn!("step at u = {:.6e} failed ({e}); halving increment", state.u_applied + du);
            let halves = advance(problem, state, 0.5 * du, depth + 1, cfg, lu).and_then(|a| {
                state.commit_phase(&problem.dofs);
                let b = advance(problem, state, 0.5 * du, depth + 1, cfg, lu)?;
                Ok(Advance {
                    iters: a.iters + b.iters,
                    err: b.err,
                    substeps: a.substeps + b.substeps,
                    restarts: a.restarts + b.restarts,
                    last: b.last,
                })
            });
            if halves.is_err() {
                *state = backup;
            }
            halves
        }
        Err(e) => {
            *state = backup;
            Err(e)
        }
    }
}

/// Runs the schedule from the unloaded state.
pub fn run_simulation(problem: &LoadedProblem, schedule: &StepSchedule, cfg: &SolverConfig) -> Result<SimulationResult> {
    run_simulation_from(problem, schedule, cfg, None, &mut ())
}

/// Runs the schedule, optionally continuing from an accepted state whose
/// `step` field says how many schedule steps are already done.
pub fn run_simulation_from(
    problem: &LoadedProblem,
    schedule: &StepSchedule,
    cfg: &SolverConfig,
    start: Option<SystemState>,
    observer: &mut dyn StepObserver,
) -> Result<SimulationResult> {
    cfg.validate()?;
    let fe = &problem.fe;
    if fe.dofs.formulation() != cfg.formulation {
        return Err(Error::Setup(format!(
            "problem was built for {} but the solver is configured for {}",
            fe.dofs.formulation(),
            cfg.formulation
        )));
    }
    let mut state = match start {
        Some(s) => {
            s.check(&fe.dofs)?;
            s
        }
        None => SystemState::new(&fe.dofs),
    };
    let mut lu = SparseLu::new();
    let mut records = Vec::new();
    let mut kkt = Vec::new();
    let mut peak: f64 = 0.0;
    let mut k = state.step;
    let outcome = loop {
        let Some(du) = schedule.increment(k) else {
            break Outcome::Completed;
        };
        if let Some(max) = cfg.max_steps {
            if state.step >= max {
                break Outcome::Stopped(format!("reached max_steps = {max}"));
            }
        }
        if let Some(end) = cfg.end_displacement {
            if state.u_applied.abs() >= end * (1.0 - 1e-12) {
                break Outcome::Stopped(format!("reached end displacement {end} mm"));
            }
        }
        let adv = match advance(fe, &mut state, du, 0, cfg, &mut lu) {
            Ok(a) => a,
            Err(e) if recoverable(&e) => break Outcome::Failed(e),
            Err(e) => return Err(e),
        };
        state.step += 1;
        state.t = state.step as f64;
        k += 1;
        let load = problem.load_kn(&adv.last.system);
        let rec = StepRecord {
            step: state.step,
            t: state.t,
            u_mm: state.u_applied,
            load_kn: load,
            iters: adv.iters,
            err: adv.err,
            substeps: adv.substeps,
            restarts: adv.restarts,
        };
        let report = kkt_report(&fe.dofs, &state, cfg.eta);
        info!(
            "step {:5}  u = {:.6e} mm  F = {:.6e} kN  iters = {:3}  err = {:.2e}",
            rec.step, rec.u_mm, rec.load_kn, rec.iters, rec.err
        );
        observer.on_step(problem, &state, &rec, &report)?;
        state.commit_phase(&fe.dofs);
        records.push(rec);
        kkt.push(report);
        peak = peak.max(load);
        if let Some(f) = cfg.stop_load_fraction {
            if peak > 0.0 && load < f * peak {
                break Outcome::Stopped(format!("load fell below {f} of the peak"));
            }
        }
    };
    Ok(SimulationResult {
        records,
        kkt,
        state,
        outcome,
    })
}
